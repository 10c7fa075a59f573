"""Figure replicas for the mitigation experiment CSVs.

Reads the frozen CSV schemas emitted by the neumann-mitigation CLI and
renders static images: the truncation-order step curve, the noisy-vs-
mitigated scatter with the true-value line and tolerance band, and the
per-qubit-count averages with error bars.  The plotter never recomputes
statistics; every number comes from the file.
"""

__version__ = "0.1.0"

from .render import FigureSpec, SchemaError, read_table, render

__all__ = ["FigureSpec", "SchemaError", "read_table", "render", "__version__"]
