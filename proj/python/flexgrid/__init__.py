"""Grid trading research toolkit: flexible ladders, swarm-optimized parameters,
and a neural network that proposes them."""

try:
    from ._flexgrid import *  # noqa: F401,F403  installed wheel layout
    from ._flexgrid import __doc__ as _core_doc
except ImportError:  # in-tree build: the module sits directly on sys.path
    from _flexgrid import *  # noqa: F401,F403
    from _flexgrid import __doc__ as _core_doc

__version__ = "0.1.0"
