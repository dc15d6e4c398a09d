"""Kernel backend selection.

The hot kernels (local-entropy classification, resampling) exist in two
functionally identical variants: numba ``@njit`` loops and vectorized
numpy. The active variant is chosen once at import time from the
``MLEP_BACKEND`` environment variable:

  MLEP_BACKEND=numba   require numba (ImportError if unavailable)
  MLEP_BACKEND=numpy   force the pure-numpy path
  unset / "auto"       numba when importable, numpy otherwise

Both variants produce bit-identical outputs; the benchmark subcommand
(``mlep bench``) compares their throughput.
"""

import os

_choice = os.environ.get("MLEP_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"MLEP_BACKEND must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise
        HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _choice != "numpy"


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
