"""Configuration package for the flow map laboratory."""

from .settings import Settings, settings

__all__ = ['Settings', 'settings']
