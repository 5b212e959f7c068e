"""trustos: continuous AI-governance engine over simulated provider telemetry."""

from .engine import TrustOs
from .ledger import compute_watermark
from .model import AssertionStatus, FrameworkId, ProviderKind, Role, Severity

__version__ = "0.1.0"

__all__ = [
    "TrustOs",
    "compute_watermark",
    "AssertionStatus",
    "FrameworkId",
    "ProviderKind",
    "Role",
    "Severity",
    "__version__",
]
