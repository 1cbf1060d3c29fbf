"""Fitness functions and scenario-batch evaluation."""
