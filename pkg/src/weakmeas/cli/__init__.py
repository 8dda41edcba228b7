"""Scenario runner and validation harness."""
from .main import main

__all__ = ["main"]
