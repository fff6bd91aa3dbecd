"""Hot-kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``FMLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FMLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

log_power_integrals = _impl.log_power_integrals
cantor_membership = _impl.cantor_membership
cantor_cdf = _impl.cantor_cdf

# family codes are defined once, on the python side
from ._pykernels import (  # noqa: E402
    CONSTANT, POWER_ONE_PLUS, POWER_ABS, EXP, EXP_ABS, SUB_EXP, SUPER_EXP, PHI_EXP,
)

__all__ = [
    "BACKEND", "log_power_integrals", "cantor_membership", "cantor_cdf",
    "CONSTANT", "POWER_ONE_PLUS", "POWER_ABS", "EXP", "EXP_ABS", "SUB_EXP",
    "SUPER_EXP", "PHI_EXP",
]
