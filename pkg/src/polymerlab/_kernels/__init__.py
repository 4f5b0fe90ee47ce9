"""Hot kernels for the disorder field: compiled core with numpy fallback.

Import order: the Cython extension when built, else the numpy twin.  Set
``POLYMERLAB_PURE=1`` to force the fallback (used by the benchmark and the
cross-implementation tests).
"""

import os

if os.environ.get("POLYMERLAB_PURE"):
    from . import _pyhash as impl
else:
    try:
        from . import _chash as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pyhash as impl

from . import _pyhash as fallback_impl

BACKEND = impl.BACKEND

omega_words = impl.omega_words
uniform_from_words = impl.uniform_from_words
normal_from_words = impl.normal_from_words
normal_quantile = impl.normal_quantile
time_word = impl.time_word
