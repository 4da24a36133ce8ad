"""Optimal persistent checkpointing for heterogeneous back-propagation chains."""
