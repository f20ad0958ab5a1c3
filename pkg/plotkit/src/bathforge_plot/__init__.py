"""bathforge-plot: publication-style figures from bathforge output files.

Reads the documented trajectory-CSV and run-report-JSON contracts and
renders population-vs-time panels, quadratic rate-scaling plots, and
steady-state-vs-amplitude curves as deterministic vector graphics.  The
package is strictly file-driven: it never imports the simulator, and
rendering never modifies its inputs.
"""

__version__ = "0.1.0"

from .contracts import ContractError, read_report, read_trajectory
from .jobs import KINDS, PlotJob, render

__all__ = [
    "__version__",
    "ContractError",
    "read_trajectory",
    "read_report",
    "PlotJob",
    "KINDS",
    "render",
]
