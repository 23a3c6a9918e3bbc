"""Intrinsic diameter bounds for discrete surfaces in conformally flat 3-manifolds.

Modules
-------
ambient     conformal metrics ``exp(2 phi) delta`` on chart domains
surface     triangle meshes, conformal area and mean curvature
geodesy     graph distances and intrinsic diameters
gates       smallness gates, constants and inequality reports
doubling    teardrop tubes gluing two copies of a surface
plateau     area minimization and boundary screening
io          OFF / OBJ / curves JSON files
cli         ``confdiam`` command line
"""

__version__ = "0.1.0"

from .ambient import ConformalAmbient, ambient_distance, from_name  # noqa: E402
from .errors import (  # noqa: E402
    ConfdiamError,
    ConnectivityError,
    ConstructionError,
    DomainError,
    GateViolation,
    MeshError,
    StalledSolverError,
    UnsupportedAmbientError,
)
from .gates import GateReport, main_inequality_report, wu_zheng_check  # noqa: E402
from .geodesy import intrinsic_diameter  # noqa: E402
from .surface import ImmersedMesh  # noqa: E402

__all__ = [
    "ConfdiamError",
    "ConformalAmbient",
    "ConnectivityError",
    "ConstructionError",
    "DomainError",
    "GateReport",
    "GateViolation",
    "ImmersedMesh",
    "MeshError",
    "StalledSolverError",
    "UnsupportedAmbientError",
    "__version__",
    "ambient_distance",
    "from_name",
    "intrinsic_diameter",
    "main_inequality_report",
    "wu_zheng_check",
]
