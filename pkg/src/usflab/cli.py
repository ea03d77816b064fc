"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import deque
from pathlib import Path

from . import __version__
from .errors import (
    BadParams,
    InconsistentForest,
    InvalidForest,
    MissingWiredVertex,
    UnknownFamily,
    UsflabError,
)
from .fixtures import load_fixtures
from .generators import (
    boosted_tree,
    canopy_network,
    glued_canopy,
    glued_canopy_wired,
    grid_box,
    torus,
    tree_ball,
    _tree_ball_levels,
)
from .network import Network, WiredNetwork, dumps_network, induced_subnetwork, read_network, wired_contraction
from .rng import RngHandle
from .sampler import (
    BoundaryForest,
    SpanningTree,
    dumps_forest,
    loads_forest,
    sample_batch,
    sample_wusf_truncation,
    wilson_ust,
)
from .stats import (
    boundary_marks,
    components,
    deepest_vertex,
    ends_lower_bound,
    forest_frequencies,
    mean_log,
    spine_profile,
)
from .update import update_chain, write_trajectory
from .verify import run_suite

FAMILIES = ("grid", "torus", "canopy", "glued-canopy", "boosted-tree", "tree-ball")
STAT_CHOICES = ("size", "frequency", "ends", "logc")


def _header(args, argv) -> list:
    lines = [f"usflab {__version__}", "command: usflab " + " ".join(argv)]
    if getattr(args, "seed", None) is not None:
        lines.append(f"seed: {args.seed}")
    if getattr(args, "samples", None) is not None:
        lines.append(f"samples: {args.samples}")
    return lines


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise BadParams(f"family {args.family!r} needs --{', --'.join(missing)}")


def build_family(args):
    fam = args.family
    if fam not in FAMILIES:
        raise UnknownFamily(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")
    if fam == "grid":
        _require(args, "d", "side")
        return grid_box(args.d, args.side, wired=args.wired)
    if fam == "torus":
        _require(args, "d", "side")
        return torus(args.d, args.side)
    if fam == "canopy":
        _require(args, "n", "k")
        G = canopy_network(args.n, args.k)
        return wired_contraction(G, range(1, G.vertex_count)) if args.wired else G
    if fam == "glued-canopy":
        _require(args, "n", "k1", "k2")
        if args.wired:
            return glued_canopy_wired(args.n, args.k1, args.k2)
        return glued_canopy(args.n, args.k1, args.k2)
    if fam == "boosted-tree":
        _require(args, "radius")
        return boosted_tree(args.radius, args.seed or 0)
    _require(args, "radius")
    G = tree_ball(args.radius, args.degree)
    if args.wired:
        depth, _ = _tree_ball_levels(args.radius, args.degree)
        return wired_contraction(G, [v for v, r in enumerate(depth) if r < args.radius])
    return G


def cmd_generate(args, argv) -> int:
    net = build_family(args)
    _emit(dumps_network(net, _header(args, argv)), args.out)
    return 0


def _sample_ust(net, rng):
    return wilson_ust(net, 0, None, rng)


def cmd_sample(args, argv) -> int:
    target = read_network(args.network)
    wired = target if isinstance(target, WiredNetwork) else None
    edge_map = None
    if args.mode == "wusf-trunc":
        if wired is None:
            raise MissingWiredVertex("wusf-trunc needs a network file with a 'wired' line")
        samples = sample_batch(sample_wusf_truncation, wired, args.samples, args.seed)
    elif args.mode == "fusf-trunc" and wired is not None:
        sub = induced_subnetwork(wired.network, wired.interior)
        edge_map = sub.edge_map
        samples = sample_batch(_sample_ust, sub.network, args.samples, args.seed)
    else:
        net = wired.network if wired else target
        samples = sample_batch(_sample_ust, net, args.samples, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = _header(args, argv)
    rows = []
    width = max(5, len(str(args.samples)))
    for i, s in enumerate(samples):
        name = f"sample_{i:0{width}d}.forest"
        (out / name).write_text(dumps_forest(s, header + [f"sample: {i}"], edge_map), encoding="utf-8")
        rows.append([i, name, len(s.edges), components(s).count])
    buf = io.StringIO()
    for h in header:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample", "file", "edges", "components"])
    w.writerows(rows)
    (out / "manifest.csv").write_text(buf.getvalue(), encoding="utf-8")
    return 0


def cmd_verify(args, argv) -> int:
    fixtures = load_fixtures(args.fixtures)
    checks = run_suite(args.suite, fixtures, args.samples, args.seed)
    passed = all(c.passed for c in checks)
    report = {
        "tool": f"usflab {__version__}",
        "suite": args.suite,
        "seed": args.seed,
        "samples": args.samples,
        "passed": passed,
        "checks": [c.as_dict() for c in checks],
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip(), file=sys.stderr)
    return 0 if passed else 1


def _load_forest(target, path):
    edges, parent = loads_forest(Path(path).read_text(encoding="utf-8"))
    net = target.network if isinstance(target, WiredNetwork) else target
    if any(not 0 <= i < net.edge_count for i in edges):
        raise InconsistentForest(f"{path}: edge id out of range")
    try:
        if isinstance(target, WiredNetwork):
            if parent is not None:
                return BoundaryForest(target, edges, parent).validate(), None
            if net.is_spanning_tree(edges):
                return BoundaryForest.from_edges(target, edges), None
            sub = induced_subnetwork(net, target.interior)
            back = {old: new for new, old in enumerate(sub.edge_map)}
            if any(i not in back for i in edges):
                raise InconsistentForest(f"{path}: edges leave the interior")
            tree = SpanningTree(sub.network, [back[i] for i in edges]).validate()
            w = target.wired_vertex
            marks = {sub.merge_map[x] for x in net.neighbors(w) if x != w}
            return tree, marks
        if parent is not None:
            raise InconsistentForest(f"{path}: parent lines need a wired network")
        return SpanningTree(net, edges).validate(), None
    except (InvalidForest, KeyError) as exc:
        raise InconsistentForest(f"{path}: {exc}") from exc


def _far_from(net: Network, sources) -> dict:
    """Graph distance from the nearest vertex of ``sources``."""
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        x = queue.popleft()
        for y in net.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def forest_rows(forest, radius: int, steps: int, rng, which, marks=None) -> list:
    """One row per component: id, size, frequency, ends bounds, mean log-conductance.

    Ends are counted around the component vertex farthest from the marked
    (boundary-attached) vertices, so small radii stay clear of the boundary.
    Free trees with no wiring information use their leaves as marks.
    """
    part = components(forest)
    net = forest.network
    if isinstance(forest, BoundaryForest):
        marks = boundary_marks(forest, "touching")
        inner = [i for i in forest.edges if forest.wired.wired_vertex not in (net.edges[i].u, net.edges[i].v)]
        start = forest.wired.interior_sorted[0]
    else:
        adj = net.adjacency(forest.edges)
        if marks is None:
            marks = {v for v in range(net.vertex_count) if len(adj[v]) <= 1}
        inner = list(forest.edges)
        start = 0
    freq = forest_frequencies(forest, steps, start, rng) if "frequency" in which and steps > 0 else None
    depth = _far_from(net, marks) if marks else {}
    rows = []
    for cid, comp in enumerate(part.members):
        center = max(comp, key=lambda v: (depth.get(v, 0), -v))
        row = [cid]
        row.append(len(comp) if "size" in which else "")
        row.append(float(freq[cid]) if freq is not None else "")
        reach = depth.get(center, 0)
        for r in range(radius + 1):
            # once the ball touches a marked vertex the count is no longer a lower bound
            ok = "ends" in which and r < reach
            row.append(ends_lower_bound(net, inner, comp, center, r, marks) if ok else "")
        if "logc" in which:
            if isinstance(forest, BoundaryForest):
                value = mean_log(spine_profile(forest, deepest_vertex(forest, comp)))
            else:
                cs = set(comp)
                value = mean_log(net.conductance(i) for i in inner if net.edges[i].u in cs)
            row.append(value)
        else:
            row.append("")
        rows.append(row)
    return rows


def cmd_stats(args, argv) -> int:
    target = read_network(args.network)
    which = set(args.which.split(","))
    unknown = which - set(STAT_CHOICES)
    if unknown:
        raise BadParams(f"unknown statistics {sorted(unknown)}; choose from {', '.join(STAT_CHOICES)}")
    rng = RngHandle(args.seed)
    buf = io.StringIO()
    for h in _header(args, argv):
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["sample", "component_id", "size", "frequency"]
        + [f"ends_lb_r{r}" for r in range(args.radius + 1)]
        + ["mean_log_conductance"]
    )
    for s, path in enumerate(args.forests):
        forest, marks = _load_forest(target, path)
        for row in forest_rows(forest, args.radius, args.steps, rng.spawn(s), which, marks):
            w.writerow([s] + row)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_chain(args, argv) -> int:
    target = read_network(args.network)
    rng = RngHandle(args.seed)
    if isinstance(target, WiredNetwork):
        state = sample_wusf_truncation(target, rng.spawn(0))
    else:
        state = wilson_ust(target, 0, None, rng.spawn(0))
    schedule = args.schedule
    if schedule not in ("uniform", "round-robin"):
        try:
            schedule = int(schedule)
        except ValueError:
            raise BadParams(f"schedule must be uniform, round-robin or a vertex id, got {schedule!r}")
    outcomes = update_chain(state, args.steps, schedule, rng.spawn(1), validate=args.validate)
    buf = io.StringIO()
    write_trajectory(outcomes, buf, _header(args, argv))
    _emit(buf.getvalue(), args.out)
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="usflab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"usflab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated network")
    g.add_argument("--family", required=True)
    g.add_argument("--d", type=int)
    g.add_argument("--side", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--k")
    g.add_argument("--k1")
    g.add_argument("--k2")
    g.add_argument("--radius", type=int)
    g.add_argument("--degree", type=int, default=3)
    g.add_argument("--wired", action="store_true")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="sample spanning trees or truncated forests")
    s.add_argument("network")
    s.add_argument("--mode", choices=("ust", "wusf-trunc", "fusf-trunc"), default="ust")
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("verify", help="run exact and statistical verification suites")
    v.add_argument("--suite", choices=("oracle", "update", "markov", "mtp", "all"), default="all")
    v.add_argument("--fixtures")
    v.add_argument("--samples", type=int, default=20000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("stats", help="per-component statistics as CSV")
    t.add_argument("network")
    t.add_argument("forests", nargs="+")
    t.add_argument("--which", default=",".join(STAT_CHOICES))
    t.add_argument("--radius", type=int, default=2)
    t.add_argument("--steps", type=int, default=10000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_stats)

    c = sub.add_parser("chain", help="run an update chain and log its trajectory")
    c.add_argument("network")
    c.add_argument("--steps", type=int, default=100)
    c.add_argument("--schedule", default="uniform")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--validate", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_chain)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    if getattr(args, "samples", None) is not None and args.samples < 1:
        parser.error("--samples must be positive")
    try:
        return args.func(args, argv)
    except UsflabError as exc:
        print(f"usflab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
