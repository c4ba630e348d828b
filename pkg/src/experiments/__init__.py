# Experiment drivers: config parsing, ablation sweeps, figure data and acceptance checks
