"""Standard figures from recorded shock-formation runs.

Consumes only the documented schema-1 series CSV, snapshot tables,
shock_report files, and sweep aggregates; no in-process coupling to the
simulator.
"""

from .figures import FigureSpec, KINDS, render
from .io import MissingColumn, SchemaError

__version__ = "0.1.0"
