"""Schemas layer: pydantic models for experiment specs and reports."""
