"""Figure rendering for simulator output files.

The package reads two documented file formats, the sweep estimates CSV and
the per-round JSONL log, and renders them with matplotlib.  It never
recomputes statistics: every plotted value comes straight out of the file,
and a text dump mode exposes the raw cells for comparison.
"""

from plotkit.readers import InputError, read_rounds_jsonl, read_sweep_csv
from plotkit.figures import (
    CurveSpec,
    build_eviction_figure,
    build_returns_figure,
    eviction_series,
    returns_series,
)

__all__ = [
    "CurveSpec",
    "InputError",
    "build_eviction_figure",
    "build_returns_figure",
    "eviction_series",
    "read_rounds_jsonl",
    "read_sweep_csv",
    "returns_series",
]
