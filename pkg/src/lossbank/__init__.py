# Momentum-updated per-sample loss register and rank-based difficulty
