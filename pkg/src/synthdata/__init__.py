# Synthetic shape-vs-color domain-shift benchmark
