# File access: dataset codec, config files and checkpoints
