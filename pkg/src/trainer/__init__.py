# Dual-flow training loop, ablation modes and checkpoints
