"""Exact computer algebra for genus-g Heisenberg characters, Zhu reduction and cluster mutation."""
from __future__ import annotations

__version__ = "0.1.0"
