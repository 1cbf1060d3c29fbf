"""Pydantic models for configuration and the evaluation wire protocol."""
