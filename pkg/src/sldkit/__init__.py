"""sldkit: a workbench for transmission single-line diagrams.

Diagram graph with strict connection rules, per-unit base resolution,
Gauss-Seidel / Newton-Raphson power flow, WLS and fast-decoupled state
estimation, iteration traces, .sld persistence, plus a CLI and HTTP service.
"""

from .components import (
    BUSBAR,
    GENERATOR,
    LINE,
    LOAD,
    METER,
    MODES,
    PER_UNIT,
    POWER_FLOW,
    PU_BASE,
    STATE_ESTIMATION,
    TRANSFORMER,
    BusBarSpec,
    BusSourceSpec,
    GeneratorSpec,
    LineSpec,
    LoadSpec,
    MeterSpec,
    PUBaseSpec,
    TransformerSpec,
)
from .geometry import Placement, route_line
from .network import Network, PortRef, Violation
from .persistence import load_project, save_project
from .pipeline import SolveOutcome, run_solve
from .trace import SolveTrace, render_text
from .units import Quantity, parse_property_string, render_property_string

__version__ = "0.1.0"

__all__ = [
    "Network", "PortRef", "Violation", "Placement", "route_line",
    "Quantity", "parse_property_string", "render_property_string",
    "GeneratorSpec", "TransformerSpec", "LoadSpec", "BusBarSpec", "BusSourceSpec",
    "LineSpec", "MeterSpec", "PUBaseSpec",
    "GENERATOR", "TRANSFORMER", "LOAD", "BUSBAR", "LINE", "METER", "PU_BASE",
    "PER_UNIT", "POWER_FLOW", "STATE_ESTIMATION", "MODES",
    "save_project", "load_project",
    "SolveTrace", "render_text",
    "SolveOutcome", "run_solve",
    "__version__",
]
