"""Command-line package for the flow map laboratory."""

from .commands import build_parser, main
from .manifest import RunManifest

__all__ = ['build_parser', 'main', 'RunManifest']
