"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
kernels are used.  Setting ``ARTIFACT_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

python_kernels = _pykernels

compiled_kernels = None
if os.environ.get("ARTIFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_kernels  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else _pykernels
NAME = "compiled" if compiled_kernels is not None else "python"

RiskKernel = kernels.RiskKernel
