"""ciflab: numerical lab for trace-free integration formulas on flat tori.

Truncated Fourier-lattice operators, weak-trace asymptotics, Orlicz-norm
diagnostics, and randomized checks of the supporting operator inequalities.
"""

from .asymptotics import (
    CifReport,
    cif_check,
    cwikel_probe,
    l2_blowup_probe,
    weyl_constant,
)
from .errors import (
    BuildFailureError,
    ContractViolationError,
    InvalidFunctionError,
    InvalidParameterError,
    UnsupportedDimensionError,
)
from .lemmalab import TrialConfig, run_suite
from .orlicz import (
    QuadratureGrid,
    TorusFunction,
    membership_report,
    orlicz2_norm,
    orlicz_norm,
)
from .seqcore import SingularValueSeq, limit_estimator
from .torusop import LatticeBasis, build_symmetric, eig_hermitian, singvals

__version__ = "0.1.0"

__all__ = [
    "BuildFailureError",
    "ContractViolationError",
    "InvalidFunctionError",
    "InvalidParameterError",
    "UnsupportedDimensionError",
    "CifReport",
    "LatticeBasis",
    "QuadratureGrid",
    "SingularValueSeq",
    "TorusFunction",
    "TrialConfig",
    "cif_check",
    "cwikel_probe",
    "eig_hermitian",
    "l2_blowup_probe",
    "limit_estimator",
    "membership_report",
    "orlicz2_norm",
    "orlicz_norm",
    "run_suite",
    "singvals",
    "build_symmetric",
    "weyl_constant",
    "__version__",
]
