"""Toolkit for statement-level privacy-behavior annotation of Java methods."""

__version__ = "0.1.0"
