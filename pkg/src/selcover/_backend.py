"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``SELCOVER_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("SELCOVER_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    NAME = "cython"
else:
    kernels = python_kernels
    NAME = "python"
