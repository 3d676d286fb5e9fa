"""Oracle-construction kernels.

The compiled Cython kernel is preferred when it was built; otherwise the pure
Python implementation is used. Set IMPROVAE_PURE_PYTHON=1 to force the
fallback (useful for benchmarking and debugging).
"""

import os

from . import oracle_py

if os.environ.get("IMPROVAE_PURE_PYTHON"):
    _backend = oracle_py
    KERNEL_BACKEND = "python"
else:
    try:
        from . import oracle_cy as _backend  # type: ignore[no-redef]

        KERNEL_BACKEND = "cython"
    except ImportError:
        _backend = oracle_py
        KERNEL_BACKEND = "python"

build_oracle_arrays = _backend.build_oracle_arrays

__all__ = ["KERNEL_BACKEND", "build_oracle_arrays", "oracle_py"]
