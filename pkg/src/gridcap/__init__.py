"""Sector-coupled capacity-expansion planning at desk scale.

Co-optimizes electricity, hydrogen (green and blue), and CO2 capture/storage
investment and operations over representative days, with three transport
networks (power lines, H2 pipelines, CO2 pipelines) and levelized-cost
reporting for electricity and hydrogen.
"""

__version__ = "0.1.0"

from .errors import GridcapError, ScenarioError, SolverError, ValidationError

__all__ = [
    "GridcapError", "ValidationError", "ScenarioError", "SolverError",
    "__version__",
]
