"""Square-base hypergraph-product codes, circulant lifts, and BP/OSD-lite decoding."""

from __future__ import annotations

__version__ = "0.1.0"
