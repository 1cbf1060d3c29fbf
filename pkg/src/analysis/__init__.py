"""Nonparametric statistics and distribution summaries."""
