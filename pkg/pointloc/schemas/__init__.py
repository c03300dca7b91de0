"""Pydantic schemas for configuration and reports."""
