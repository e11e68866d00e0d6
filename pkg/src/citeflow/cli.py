"""Command-line pipeline: validate inputs, compute artifacts, synthesize data.

All outputs are plain files with stable formatting (numbers carry 12
significant digits), so repeated runs and different thread counts
produce byte-identical artifacts. Stage progress goes to stderr, one
line per stage.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytics, citegraph, dependence, refkit


def _fmt(x) -> str:
    v = float(x)
    if v == 0.0:
        v = 0.0  # canonical zero, never "-0"
    return f"{v:.12g}"


@dataclass(frozen=True)
class RunConfig:
    """Everything the compute pipeline needs."""

    nodes: Path
    edges: Path
    membership: Path
    out: Path
    max_order: object = dependence.AUTO
    norm_kind: str = analytics.ENTRYWISE_L1
    hi_pct: int = 90
    lo_pct: int = 10
    betweenness: str = "unweighted"
    threads: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.lo_pct < self.hi_pct <= 100:
            raise ValueError(
                f"need 0 <= lo_pct < hi_pct <= 100, got {self.lo_pct}/{self.hi_pct}"
            )
        if self.max_order != dependence.AUTO and int(self.max_order) < 1:
            raise ValueError("max_order must be AUTO or >= 1")
        if self.norm_kind not in (analytics.ENTRYWISE_L1, analytics.FROBENIUS):
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        if self.betweenness not in ("weighted", "unweighted"):
            raise ValueError(f"unknown betweenness mode {self.betweenness!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def _log(msg: str) -> None:
    print(f"[citeflow] {msg}", file=sys.stderr)


def _ingest(nodes_path, edges_path, membership_path):
    nodes, node_warnings = citegraph.parse_nodes(nodes_path)
    edges = citegraph.parse_edges(edges_path)
    graph, report = citegraph.build_graph(nodes, edges)
    membership, mem_warnings = citegraph.parse_membership(membership_path, graph)
    all_warnings = tuple(node_warnings) + report.warnings + tuple(mem_warnings)
    report = dataclasses.replace(report, warnings=all_warnings)
    return graph, membership, report


def cmd_validate(nodes_path, edges_path, membership_path, stream=None) -> int:
    """Ingest everything, print the report, exit 0 (fatal errors exit 2)."""
    stream = stream or sys.stdout
    graph, membership, report = _ingest(nodes_path, edges_path, membership_path)
    print(f"nodes: {graph.n}", file=stream)
    print(
        f"edges: {graph.m} (read {report.edges_read}, "
        f"synchronous discarded {report.synchronous_edges_discarded}, "
        f"duplicates discarded {report.duplicate_edges_discarded})",
        file=stream,
    )
    print(f"longest path: {citegraph.longest_path_length(graph)}", file=stream)
    print(f"disciplines: {membership.k}", file=stream)
    print(f"warnings: {len(report.warnings)}", file=stream)
    for text in report.warnings[:50]:
        print(f"  {text}", file=stream)
    if len(report.warnings) > 50:
        print(f"  ... {len(report.warnings) - 50} more", file=stream)
    return 0


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _matrix_rows(labels, matrix):
    yield ["discipline", *labels]
    for label, row in zip(labels, np.asarray(matrix)):
        yield [label, *(_fmt(x) for x in row)]


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_text(name, labels, net, community_of) -> str:
    lines = [f"graph {name} {{"]
    for idx, label in enumerate(labels):
        lines.append(f'  "{_dot_escape(label)}" [color={community_of[idx]}];')
    for (u, v), w in sorted(net.edges.items()):
        lines.append(
            f'  "{_dot_escape(labels[u])}" -- "{_dot_escape(labels[v])}" '
            f'[weight={_fmt(w)}, label="{_fmt(w)}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _svg_text(contrib: analytics.OrderContributions) -> str:
    width, height = 800, 400
    left, top = 60.0, 30.0
    plot_w, plot_h = 720.0, 320.0
    x_axis_y = top + plot_h
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'  <text x="400.00" y="20.00" text-anchor="middle" font-family="monospace" '
        f'font-size="14">citation flow share by path order ({contrib.norm_kind})</text>',
        f'  <line x1="{left:.2f}" y1="{top:.2f}" x2="{left:.2f}" y2="{x_axis_y:.2f}" '
        f'stroke="black"/>',
        f'  <line x1="{left:.2f}" y1="{x_axis_y:.2f}" x2="{left + plot_w:.2f}" '
        f'y2="{x_axis_y:.2f}" stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = x_axis_y - tick * plot_h
        parts.append(
            f'  <line x1="{left - 5:.2f}" y1="{y:.2f}" x2="{left:.2f}" y2="{y:.2f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'  <text x="{left - 8:.2f}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{tick:.2f}</text>'
        )
    count = len(contrib.shares)
    if count:
        slot = plot_w / count
        bar_w = slot * 0.6
        for i, share in enumerate(contrib.shares):
            bar_h = share * plot_h
            x = left + slot * i + slot * 0.2
            y = x_axis_y - bar_h
            parts.append(
                f'  <rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{bar_h:.2f}" fill="steelblue"/>'
            )
            parts.append(
                f'  <text x="{x + bar_w / 2:.2f}" y="{y - 5:.2f}" text-anchor="middle" '
                f'font-family="monospace" font-size="11">{share:.4f}</text>'
            )
            parts.append(
                f'  <text x="{x + bar_w / 2:.2f}" y="{x_axis_y + 16:.2f}" '
                f'text-anchor="middle" font-family="monospace" font-size="11">{i + 1}</text>'
            )
    parts.append(
        f'  <text x="{left + plot_w / 2:.2f}" y="{height - 12:.2f}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">path length (order)</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_compute(config: RunConfig) -> int:
    """Run the full pipeline and write every artifact into the output dir."""
    started = time.perf_counter()
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory {out_dir} is not writable")

    graph, membership, report = _ingest(config.nodes, config.edges, config.membership)
    _log(
        f"graph: n={graph.n} m={graph.m} "
        f"synchronous={report.synchronous_edges_discarded} "
        f"duplicates={report.duplicate_edges_discarded} "
        f"warnings={len(report.warnings)}"
    )
    operator = dependence.build_operator(graph)
    _log(f"operator: longest path {operator.order_bound}, threads {config.threads}")
    stack = dependence.dependence_stack(
        operator, membership, max_order=config.max_order, threads=config.threads
    )
    decomp = dependence.flow_decomposition(stack, membership)
    r = dependence.dependence_vector(
        operator, max_order=config.max_order, threads=config.threads
    )
    _log(f"dependence: {stack.order_count} orders beyond the identity")

    flow = decomp.total
    contrib_l1 = analytics.order_contributions(decomp, analytics.ENTRYWISE_L1)
    contrib_fro = analytics.order_contributions(decomp, analytics.FROBENIUS)
    norm = analytics.normalized_flow(flow)
    positive, negative = analytics.threshold_network(
        norm.normalized, config.hi_pct, config.lo_pct
    )
    communities = analytics.detect_communities(positive)
    betweenness = analytics.betweenness_centrality(
        positive, weighted=(config.betweenness == "weighted")
    )
    rao = analytics.rao_entropy(flow)
    summary = analytics.discipline_summary(flow, membership.sizes())
    _log(f"analytics: k={membership.k} communities={len(communities)}")

    labels = membership.labels
    community_of = {}
    for number, group in enumerate(communities, start=1):
        for member in group:
            community_of[member] = number

    _write_rows(out_dir / "F.csv", _matrix_rows(labels, decomp.total))
    _write_rows(out_dir / "F0.csv", _matrix_rows(labels, decomp.partial_flows[0]))
    for i, order_flow in enumerate(decomp.order_flows, start=1):
        _write_rows(out_dir / f"M_{i}.csv", _matrix_rows(labels, order_flow))
    contrib_rows = [["order", "l1_norm", "l1_share", "frob_norm", "frob_share"]]
    for i in range(len(contrib_l1.norms)):
        contrib_rows.append(
            [
                str(i + 1),
                _fmt(contrib_l1.norms[i]),
                _fmt(contrib_l1.shares[i]),
                _fmt(contrib_fro.norms[i]),
                _fmt(contrib_fro.shares[i]),
            ]
        )
    _write_rows(out_dir / "contributions.csv", contrib_rows)
    _write_rows(out_dir / "E.csv", _matrix_rows(labels, norm.expected))
    _write_rows(out_dir / "fhat.csv", _matrix_rows(labels, norm.normalized))
    _write_rows(
        out_dir / "summary.csv",
        [["discipline", "size", "self_flow", "incoming_flow", "outgoing_flow"]]
        + [
            [labels[row.discipline], _fmt(row.size), _fmt(row.self_flow),
             _fmt(row.incoming_flow), _fmt(row.outgoing_flow)]
            for row in summary
        ],
    )
    _write_rows(
        out_dir / "r.csv",
        [["id", "dependence"]]
        + [[graph.node_ids[i], _fmt(r[i])] for i in range(graph.n)],
    )
    _write_rows(
        out_dir / "communities.csv",
        [["discipline", "community"]]
        + [[labels[v], str(community_of[v])] for v in range(membership.k)],
    )
    _write_rows(
        out_dir / "betweenness.csv",
        [["discipline", "betweenness"]]
        + [[labels[v], _fmt(betweenness[v])] for v in range(membership.k)],
    )
    _write_rows(
        out_dir / "rao.csv",
        [["discipline", "score"]]
        + [[labels[v], _fmt(rao.scores[v])] for v in range(membership.k)],
    )
    (out_dir / "positive.dot").write_text(
        _dot_text("positive", labels, positive, community_of), encoding="utf-8"
    )
    (out_dir / "negative.dot").write_text(
        _dot_text("negative", labels, negative, community_of), encoding="utf-8"
    )
    chosen = contrib_l1 if config.norm_kind == analytics.ENTRYWISE_L1 else contrib_fro
    (out_dir / "contributions.svg").write_text(_svg_text(chosen), encoding="utf-8")

    file_count = 14 + len(decomp.order_flows)
    _log(f"wrote {file_count} files to {out_dir} in {time.perf_counter() - started:.2f}s")
    return 0


def cmd_synth(spec: refkit.SynthSpec, out_dir) -> int:
    """Generate a synthetic dataset as the three input CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph, membership = refkit.random_dag(spec)
    _write_rows(
        out / "nodes.csv",
        [["id", "year", "month"]]
        + [
            [graph.node_ids[i], str(graph.times[i].year), str(graph.times[i].month)]
            for i in range(graph.n)
        ],
    )
    edge_rows = [["citing", "cited"]]
    for u in range(graph.n):
        for v in graph.out_neighbors(u):
            edge_rows.append([graph.node_ids[u], graph.node_ids[int(v)]])
    _write_rows(out / "edges.csv", edge_rows)
    weights = membership.weights.tocoo()
    mem_rows = [["id", "discipline", "weight"]]
    for i, j, w in zip(weights.row, weights.col, weights.data):
        mem_rows.append([graph.node_ids[int(i)], membership.labels[int(j)], _fmt(w)])
    _write_rows(out / "membership.csv", mem_rows)
    _log(f"synthesized n={graph.n} m={graph.m} k={membership.k} into {out}")
    return 0


def _max_order_arg(value: str):
    if value.lower() == "auto":
        return dependence.AUTO
    try:
        parsed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected AUTO or a positive integer, got {value!r}"
        ) from None
    if parsed < 1:
        raise argparse.ArgumentTypeError("max order must be >= 1")
    return parsed


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("CITEFLOW_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"CITEFLOW_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citeflow",
        description="Higher-order citation influence over citation DAGs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="ingest inputs and report, no outputs")
    compute = sub.add_parser("compute", help="run the pipeline and write artifacts")
    synth = sub.add_parser("synth", help="generate a synthetic dataset")

    for p in (validate, compute):
        p.add_argument("--nodes", required=True, type=Path, help="nodes.csv path")
        p.add_argument("--edges", required=True, type=Path, help="edges.csv path")
        p.add_argument(
            "--membership", required=True, type=Path, help="membership.csv path"
        )
    compute.add_argument("--out", required=True, type=Path, help="output directory")
    compute.add_argument(
        "--max-order",
        type=_max_order_arg,
        default=dependence.AUTO,
        help="AUTO (default) or a positive path-length cap",
    )
    compute.add_argument(
        "--norm",
        choices=[analytics.ENTRYWISE_L1, analytics.FROBENIUS],
        default=analytics.ENTRYWISE_L1,
        help="which share column drives the SVG chart (both land in the CSV)",
    )
    compute.add_argument("--hi-pct", type=int, default=90)
    compute.add_argument("--lo-pct", type=int, default=10)
    compute.add_argument(
        "--betweenness", choices=["weighted", "unweighted"], default="unweighted"
    )
    compute.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker count; falls back to CITEFLOW_THREADS, then CPU count",
    )

    synth.add_argument("--n", required=True, type=int, help="node count")
    synth.add_argument("--m", required=True, type=int, help="target edge count")
    synth.add_argument("--k", required=True, type=int, help="discipline count")
    synth.add_argument("--seed", required=True, type=int)
    synth.add_argument("--month-span", type=int, default=24)
    synth.add_argument("--out", required=True, type=Path, help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.nodes, args.edges, args.membership)
        if args.command == "compute":
            config = RunConfig(
                nodes=args.nodes,
                edges=args.edges,
                membership=args.membership,
                out=args.out,
                max_order=args.max_order,
                norm_kind=args.norm,
                hi_pct=args.hi_pct,
                lo_pct=args.lo_pct,
                betweenness=args.betweenness,
                threads=_resolve_threads(args.threads),
            )
            return cmd_compute(config)
        if args.command == "synth":
            spec = refkit.SynthSpec(
                n=args.n,
                target_m=args.m,
                k=args.k,
                seed=args.seed,
                month_span=args.month_span,
            )
            return cmd_synth(spec, args.out)
    except citegraph.InternalInvariantError as exc:
        print(f"citeflow: internal invariant violation: {exc}", file=sys.stderr)
        return 1
    except (citegraph.IngestError, ValueError, OSError) as exc:
        print(f"citeflow: error: {exc}", file=sys.stderr)
        return 2
    return 2


def entry() -> None:
    sys.exit(main())
