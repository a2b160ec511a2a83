"""Kernel backend selection.

The compiled extension is used when it was built; set
``A11YAUDIT_PURE_PYTHON=1`` to force the reference implementation.
"""
import os

from . import _pykernels

python_backend = _pykernels

compiled_backend = None
if os.environ.get("A11YAUDIT_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

two_means = backend.two_means
overlap_pairs = backend.overlap_pairs
