"""Figure regeneration for sgip simulation outputs.

Reads the simulator's snapshot binary and CSV formats (re-implemented here
from their specs; the simulator package is never imported) and renders the
standard figure kinds: 1-d profile overlays, front-position plots, 2-d
contour overlays and 3-d coordinate-plane slices.
"""

from .formats import FormatError, Snapshot, read_series_csv, read_snapshot
from .jobs import FigureJob, JobError, render
from .metrics import contour_radius_ratio

__version__ = "0.1.0"

__all__ = [
    "FigureJob",
    "FormatError",
    "JobError",
    "Snapshot",
    "contour_radius_ratio",
    "read_series_csv",
    "read_snapshot",
    "render",
]
