"""Decentralized heading synchronization and desynchronization simulator."""

from prcnet.errors import ConfigError, InvalidEventError, InvalidInputError, NoLiveAgentsError
from prcnet.phase import TWO_PI, circ_dist, containing_arc, splay_error, wrap

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "InvalidEventError",
    "InvalidInputError",
    "NoLiveAgentsError",
    "TWO_PI",
    "circ_dist",
    "containing_arc",
    "splay_error",
    "wrap",
    "__version__",
]
