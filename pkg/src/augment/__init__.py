# RGB-shuffle augmentation and probability-gated application
