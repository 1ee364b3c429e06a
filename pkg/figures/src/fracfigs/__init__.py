"""Batch figure rendering for fracbayes run directories.

Reads only the primary pipeline's CSV artifacts (summary.csv, marginals.csv,
run_meta.json) and produces reconstruction overlays, credible-interval bands,
and corner grids of one- and two-dimensional marginals.
"""

from .render import FigureJob, SchemaError, render

__version__ = "0.1.0"
