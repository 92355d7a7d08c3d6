"""Backend selection for the cycle loops.

The compiled extension is used when it was built; otherwise the pure-Python
twin is imported. Set ``CONCRETE_FATIGUE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

STATUS_OK = 0
STATUS_D = 1
STATUS_KAPPA = 2
STATUS_OMEGA = 3

STATUS_NAMES = {
    STATUS_OK: "ok",
    STATUS_D: "singular_lateral_stiffness",
    STATUS_KAPPA: "nonpositive_kappa",
    STATUS_OMEGA: "critical_damage",
}

SCHEMES = {"euler": 0, "rk4": 1}
KAPPA_FORMS = {"threshold": 0, "tangent": 1, "literal": 2}

python_backend = _pykernels

if os.environ.get("CONCRETE_FATIGUE_PURE_PYTHON", "") not in ("", "0"):
    compiled_backend = None
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "compiled" if compiled_backend is not None else "python"


def get_backend(name=None):
    """Return a kernel module by name (``"compiled"``, ``"python"`` or default)."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "compiled":
        if compiled_backend is None:
            raise RuntimeError("compiled kernels are not available")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
