"""Small enumerable fixture networks shipped with the package."""

from __future__ import annotations

from pathlib import Path

from .errors import FixtureMissing
from .generators import grid_box
from .network import Network, WiredNetwork, build_network, read_network, write_network

FIXTURE_DIR = Path(__file__).with_name("data")


def unit_triangle() -> Network:
    return build_network(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


def weighted_triangle() -> Network:
    return build_network(3, [(0, 1, 1), (1, 2, 2), (2, 0, 3)])


def unit_k4() -> Network:
    return build_network(4, [(a, b, 1) for a in range(4) for b in range(a + 1, 4)])


def parallel_pair() -> Network:
    return build_network(2, [(0, 1, 1), (0, 1, 2)])


def weighted_4cycle() -> Network:
    return build_network(4, [(0, 1, 1), (1, 2, 2), (2, 3, 3), (3, 0, 4)])


def wired_grid_2x2() -> WiredNetwork:
    return grid_box(2, 2, wired=True)


BUILDERS = {
    "unit_triangle": unit_triangle,
    "weighted_triangle": weighted_triangle,
    "unit_k4": unit_k4,
    "parallel_pair": parallel_pair,
    "weighted_4cycle": weighted_4cycle,
    "wired_grid_2x2": wired_grid_2x2,
}


def builtin_fixtures() -> dict:
    return {name: build() for name, build in BUILDERS.items()}


def write_fixtures(directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, net in builtin_fixtures().items():
        write_network(net, directory / f"{name}.net")


def load_fixtures(directory=None) -> dict:
    """Read every ``*.net`` file in ``directory`` (default: the shipped set)."""
    directory = FIXTURE_DIR if directory is None else Path(directory)
    if not directory.is_dir():
        raise FixtureMissing(f"fixture directory {directory} does not exist")
    files = sorted(directory.glob("*.net"))
    if not files:
        raise FixtureMissing(f"no *.net fixtures in {directory}")
    return {f.stem: read_network(f) for f in files}
