"""Residual conditional tabular GAN for imbalanced tables, plus its evaluation harness."""
