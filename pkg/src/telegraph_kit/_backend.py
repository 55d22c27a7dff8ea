"""Pick the compiled kernel when it was built, the numpy one otherwise.

Set ``TELEGRAPH_KIT_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernel_py

BACKEND = "python"
simulate_chunk = _kernel_py.simulate_chunk

if os.environ.get("TELEGRAPH_KIT_BACKEND", "").lower() != "python":
    try:
        from . import _kernel
    except ImportError:
        pass
    else:
        simulate_chunk = _kernel.simulate_chunk
        BACKEND = "cython"


def kernels():
    """Map of every available backend name to its ``simulate_chunk``."""
    found = {"python": _kernel_py.simulate_chunk}
    try:
        from . import _kernel
    except ImportError:
        return found
    found["cython"] = _kernel.simulate_chunk
    return found
