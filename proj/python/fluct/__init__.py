"""Fluctuation-theory toolkit: random walks conditioned to stay positive."""

try:
    from ._fluct import *  # noqa: F401,F403  (installed wheel layout)
    from ._fluct import __version__  # noqa: F401
except ImportError:  # build-tree layout: _fluct.so next to the package
    from _fluct import *  # noqa: F401,F403
    from _fluct import __version__  # noqa: F401

import json as _json


def run_experiment(name, *args, **kwargs):
    """Run a check_* experiment and return the parsed report dict."""
    from . import _fluct as _m  # type: ignore[attr-defined]
    fn = getattr(_m, "check_" + name.replace("-", "_"))
    return _json.loads(fn(*args, **kwargs))
