# Make scripts a package to allow importing main from scripts.run