"""Backend selection for the stencil kernels.

The compiled extension is used when it imports; otherwise the NumPy
reference kernels are used.  ``use_backend`` switches explicitly, which the
benchmark and the cross-backend tests rely on.
"""

import logging

from . import _stencils_py

log = logging.getLogger(__name__)

try:
    from . import _stencils as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _stencils_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _stencils_py


def available() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available()}")
    _active = _BACKENDS[name]
    log.debug("stencil backend: %s", name)


def active():
    return _active
