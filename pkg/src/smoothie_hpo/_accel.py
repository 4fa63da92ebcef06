"""Numba acceleration switch.

Hot kernels in :mod:`smoothie_hpo.kernels` ship in two versions: a numba
``@njit`` build and a pure-numpy fallback.  Which one backs the public
kernel names is decided once at import time:

* ``SMOOTHIE_HPO_NUMBA=0`` (or ``false``/``off``/``no``) forces the numpy
  fallback even when numba is installed.
* If numba is missing, the fallback is used silently.

Both versions stay importable for benchmarking and equivalence tests.
"""

import os


def _flag_enabled() -> bool:
    raw = os.environ.get("SMOOTHIE_HPO_NUMBA", "1").strip().lower()
    return raw not in ("0", "false", "off", "no")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _flag_enabled() and _numba_available()

if NUMBA_ENABLED:
    from numba import njit
else:
    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
