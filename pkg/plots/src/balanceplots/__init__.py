"""Figure rendering for balance-experiment CSV outputs.

Consumes only the documented CSV schemas (generations.csv, archive.csv,
impact.csv) and knows nothing about the simulator that produced them.
"""

__version__ = "0.1.0"

from .render import FigureKind, FigureSpec, SchemaError, build_figure, render
