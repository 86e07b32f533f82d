"""Kac independence measure: estimation, baselines and experiments."""
