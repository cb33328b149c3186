"""Hot-kernel backend selection.

The solver inner loops lean on a handful of tight numeric kernels (smoothed
box penalty and its gradient, the unit-norm bisection).  A compiled Cython
extension provides them when built; otherwise the NumPy twin in
``_kernels_py`` is used.  Set ``IRSEC_PURE_PYTHON=1`` to force the fallback.

Both backends are importable side by side for equivalence tests and the
benchmark in ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("IRSEC_PURE_PYTHON", "0") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

box_residuals = _impl.box_residuals
smoothed_box_penalty = _impl.smoothed_box_penalty
smoothed_box_penalty_grad = _impl.smoothed_box_penalty_grad
unit_norm_shift_root = _impl.unit_norm_shift_root


def available_backends() -> dict:
    """Map of backend name -> module for every importable implementation."""
    impls = {_kernels_py.BACKEND: _kernels_py}
    try:
        from . import _kernels

        impls[_kernels.BACKEND] = _kernels
    except ImportError:
        pass
    return impls
