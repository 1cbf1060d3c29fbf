"""Core functionality for morphoneat."""
