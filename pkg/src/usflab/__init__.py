"""Uniform spanning trees and forests on weighted networks: samplers,
cycle-breaking updates, exact rational oracles and component statistics."""

from .errors import *  # noqa: F401,F403
from .network import (
    Edge,
    Minor,
    Network,
    OrientedEdge,
    WiredNetwork,
    build_network,
    dumps_network,
    induced_subnetwork,
    loads_network,
    minor,
    read_network,
    wired_contraction,
    write_network,
)
from .rng import RngHandle
from .sampler import (
    BoundaryForest,
    SpanningTree,
    WalkPath,
    loop_erase,
    sample_fusf_truncation,
    sample_wusf_truncation,
    walk_step,
    wilson_deferred,
    wilson_ust,
)

__version__ = "0.1.0"
