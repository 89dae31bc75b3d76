"""Seedable continuous double auction simulator with reaction-time scheduling
and urgency-aware ZIP traders."""

__version__ = "0.1.0"
