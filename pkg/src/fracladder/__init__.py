"""Fractional Laplacian ladders of positive solutions in 1D."""
