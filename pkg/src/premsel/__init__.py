"""Premise selection engine and evaluation harness for reasoning corpora."""

__version__ = "0.1.0"
