"""Tracking evaluation and motion-aware post-processing."""

from ._uotkit import Error, __version__, evaluate, matp_run

__all__ = ["Error", "evaluate", "matp_run"]
