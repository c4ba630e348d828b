"""
Shared package for cross-cutting types and errors used by the trainer, the experiment drivers and the CLI.
"""
