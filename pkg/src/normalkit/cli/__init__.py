"""Command-line interface for normalkit."""
