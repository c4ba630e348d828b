# Difficulty-driven augmentation degree, loss gate and capability diagnostics
