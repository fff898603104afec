"""Menu-evaluation kernel backend selection.

The compiled Cython extension is preferred when it built successfully;
otherwise the numpy implementation in ``pure.py`` is used.  Setting the
environment variable ``CONTRACTLAB_PURE=1`` forces the pure backend (used by
the benchmark to compare both).
"""

import os

from . import pure as _pure

_force_pure = os.environ.get("CONTRACTLAB_PURE", "0") not in ("", "0", "false")

if _force_pure:
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
batch_menu_rewards = _impl.batch_menu_rewards
menu_reward = _impl.menu_reward


def available_backends():
    """Names -> modules for every importable backend."""
    backends = {"pure": _pure}
    try:
        from . import _core
        backends["compiled"] = _core
    except ImportError:
        pass
    return backends
