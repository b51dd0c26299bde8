"""Command-line front end: graph files in, spectra and verdicts out.

Chiral matrices are written row-by-row as "1,5,-1;4,1,0". Quasimomenta on
the command line are exact rationals scaled by pi, so --k0 1,1,1 means
(pi, pi, pi) and --k0 2/3,-2/3 means the conical point. Output is plain
text, JSON, or CSV with 17 significant digits and LF line endings; byte
content does not depend on the worker count.

Exit codes: 0 success, 1 negative verdict (not primitive, not isospectral),
2 bad usage or unreadable input, 3 computation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Mapping, Sequence, TextIO

from .asymptotics import DEFAULT_STEP, band_edge_asymptotic
from .errors import (
    NotPrimitive,
    ParseError,
    ValidationError,
    WrongShape,
    ZonefoldError,
)
from .floquet import sample_dispersion
from .graph import (
    FundamentalGraph,
    connectivity_check,
    quotient_general,
    quotient_primitive,
)
from .intlat import IntMatrix, as_chiral_matrix, complete_to_basis, is_primitive_set
from .iso import RationalQuasimomentum, isospectral_verdict, parse_level_set_file
from .spectrum import (
    DEFAULT_GRID,
    DEFAULT_REFINE,
    FLAT_TOL,
    band_edges,
    spectrum_set,
    subcovering_band_edges,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_FAILURE = 3

_FORMATS = ("text", "json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """Numeric and output knobs shared by every subcommand."""

    grid: tuple[int, ...] | None = None
    refine: float = DEFAULT_REFINE
    flat_tol: float = FLAT_TOL
    step: float = DEFAULT_STEP
    fmt: str = "text"
    workers: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.grid is not None:
            if not self.grid:
                raise ValidationError("grid needs at least one count")
            for c in self.grid:
                if isinstance(c, bool) or not isinstance(c, int) or c < 2:
                    raise ValidationError(f"grid counts must be integers >= 2, got {c!r}")
        for name in ("refine", "flat_tol", "step"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ValidationError(f"{name} must be a positive number, got {v!r}")
        if self.fmt not in _FORMATS:
            raise ValidationError(f"format must be one of {_FORMATS}, got {self.fmt!r}")
        if self.workers is not None and (
            isinstance(self.workers, bool)
            or not isinstance(self.workers, int)
            or self.workers < 1
        ):
            raise ValidationError(f"workers must be a positive integer, got {self.workers!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_chiral(text: str) -> IntMatrix:
    """Rows separated by ';', entries by ',': "1,5,-1;4,1,0"."""
    rows = []
    for rtext in text.split(";"):
        row = []
        for item in rtext.split(","):
            item = item.strip()
            try:
                row.append(int(item, 10))
            except ValueError as exc:
                raise ParseError(f"chiral entry {item!r} is not an integer") from exc
        rows.append(row)
    return as_chiral_matrix(rows)


def parse_rational_point(text: str) -> RationalQuasimomentum:
    """Comma-separated rationals, each meaning that multiple of pi."""
    return RationalQuasimomentum(item.strip() for item in text.split(","))


def parse_graph_file(path: str) -> FundamentalGraph:
    """Read and validate a JSON graph document.

    The periodic cover must be connected; label references are resolved
    here, all structural constraints are enforced by the graph type.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read graph file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ParseError(f"{path}: top level must be an object")
    for key in ("dimension", "vertices", "edges"):
        if key not in data:
            raise ParseError(f"{path}: missing field {key!r}")

    dimension = data["dimension"]
    if isinstance(dimension, bool) or not isinstance(dimension, int):
        raise ParseError(f"{path}: dimension must be an integer")

    vertices = []
    index: dict[str, int] = {}
    if not isinstance(data["vertices"], Sequence) or isinstance(data["vertices"], str):
        raise ParseError(f"{path}: vertices must be an array")
    for pos, rec in enumerate(data["vertices"]):
        if not isinstance(rec, Mapping) or "label" not in rec or "potential" not in rec:
            raise ParseError(f"{path}: vertex {pos} needs label and potential")
        label = rec["label"]
        potential = rec["potential"]
        if not isinstance(label, str) or not label:
            raise ParseError(f"{path}: vertex {pos} label must be a non-empty string")
        if isinstance(potential, bool) or not isinstance(potential, (int, float)):
            raise ParseError(f"{path}: vertex {label!r} potential must be a number")
        if label in index:
            raise ParseError(f"{path}: duplicate vertex label {label!r}")
        index[label] = pos
        vertices.append((label, float(potential)))

    edges = []
    if not isinstance(data["edges"], Sequence) or isinstance(data["edges"], str):
        raise ParseError(f"{path}: edges must be an array")
    for pos, rec in enumerate(data["edges"]):
        if not isinstance(rec, Mapping) or any(
            key not in rec for key in ("tail", "head", "offset")
        ):
            raise ParseError(f"{path}: edge {pos} needs tail, head and offset")
        ends = []
        for key in ("tail", "head"):
            label = rec[key]
            if label not in index:
                raise ParseError(f"{path}: edge {pos} references unknown vertex {label!r}")
            ends.append(index[label])
        offset = rec["offset"]
        if not isinstance(offset, Sequence) or isinstance(offset, str):
            raise ParseError(f"{path}: edge {pos} offset must be an array")
        for c in offset:
            if isinstance(c, bool) or not isinstance(c, int):
                raise ParseError(f"{path}: edge {pos} offset components must be integers")
        edges.append((ends[0], ends[1], tuple(offset)))

    graph = FundamentalGraph(dimension, vertices, edges)
    report = connectivity_check(graph)
    if not report.quotient_connected:
        raise ValidationError(
            f"{path}: the periodic cover is disconnected"
            f" ({len(report.components)} components)"
        )
    return graph


def write_graph_file(graph: FundamentalGraph, path: str) -> None:
    data = {
        "dimension": graph.dimension,
        "vertices": [
            {"label": v.label, "potential": v.potential} for v in graph.vertices
        ],
        "edges": [
            {
                "tail": graph.vertices[e.tail].label,
                "head": graph.vertices[e.head].label,
                "offset": list(e.offset),
            }
            for e in graph.edges
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _emit(cfg: RunConfig, out: TextIO, payload: dict, text_lines: Sequence[str],
          csv_table: tuple[Sequence[str], Sequence[Sequence[str]]] | None = None) -> None:
    if cfg.fmt == "json":
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    elif cfg.fmt == "csv" and csv_table is not None:
        header, rows = csv_table
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")
    else:
        for line in text_lines:
            out.write(line + "\n")


def _grid_for(cfg: RunConfig, fallback: int | None) -> int | Sequence[int] | None:
    if cfg.grid is None:
        return fallback
    if len(cfg.grid) == 1:
        return cfg.grid[0]
    return cfg.grid


def _edge_payload(edges, spectrum) -> dict:
    return {
        "edges": [
            {
                "band": e.band,
                "lower": e.lower,
                "upper": e.upper,
                "residual": e.residual,
                "argmin": [list(p) for p in e.argmin],
                "argmax": [list(p) for p in e.argmax],
                "min_non_isolated": e.min_non_isolated,
                "max_non_isolated": e.max_non_isolated,
            }
            for e in edges
        ],
        "intervals": [list(iv) for iv in spectrum.intervals],
        "flat_bands": [[v, band] for v, band in spectrum.flat_bands],
    }


def _edge_lines(edges, spectrum) -> list[str]:
    lines = []
    for e in edges:
        flags = ""
        if e.min_non_isolated or e.max_non_isolated:
            flags = " (non-isolated extremum)"
        lines.append(
            f"band {e.band}: [{_fmt(e.lower)}, {_fmt(e.upper)}]"
            f" residual {_fmt(e.residual)}{flags}"
        )
    parts = [f"[{_fmt(lo)}, {_fmt(hi)}]" for lo, hi in spectrum.intervals]
    lines.append("spectrum: " + (" u ".join(parts) if parts else "(empty)"))
    for value, band in spectrum.flat_bands:
        lines.append(f"flat band {band}: {_fmt(value)}")
    return lines


def _edge_csv(edges) -> tuple[list[str], list[list[str]]]:
    header = ["band", "lower", "upper", "residual", "min_non_isolated", "max_non_isolated"]
    rows = [
        [
            str(e.band),
            _fmt(e.lower),
            _fmt(e.upper),
            _fmt(e.residual),
            str(e.min_non_isolated).lower(),
            str(e.max_non_isolated).lower(),
        ]
        for e in edges
    ]
    return header, rows


def _dispersion_table(graph, sample) -> tuple[list[str], list[list[str]]]:
    d = graph.dimension
    header = [f"k{i + 1}" for i in range(d)] + [
        f"band{j + 1}" for j in range(graph.nu)
    ]
    rows = []
    for point, values in zip(sample.grid, sample.values):
        rows.append([_fmt(x) for x in point] + [_fmt(v) for v in values])
    return header, rows


def _cmd_check_primitive(ns, cfg: RunConfig, out: TextIO) -> int:
    t = parse_chiral(ns.chiral)
    ok = is_primitive_set(t)
    label = "true" if ok else "false"
    _emit(cfg, out, {"primitive": ok}, [f"primitive: {label}"], (["primitive"], [[label]]))
    return EXIT_OK if ok else EXIT_NEGATIVE


def _cmd_complete(ns, cfg: RunConfig, out: TextIO) -> int:
    completion = complete_to_basis(parse_chiral(ns.chiral))
    rows = [list(row) for row in completion.matrix.entries]
    _emit(
        cfg,
        out,
        {"completion": rows},
        [",".join(str(x) for x in row) for row in rows],
        ([f"c{i + 1}" for i in range(len(rows[0]))], [[str(x) for x in row] for row in rows]),
    )
    return EXIT_OK


def _cmd_bands(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    sample = sample_dispersion(graph, _grid_for(cfg, DEFAULT_GRID), workers=cfg.workers)
    header, rows = _dispersion_table(graph, sample)
    payload = {
        "grid": [[float(x) for x in p] for p in sample.grid],
        "values": [[float(v) for v in row] for row in sample.values],
    }
    table_lines = [",".join(header)] + [",".join(row) for row in rows]
    _emit(cfg, out, payload, table_lines, (header, rows))
    return EXIT_OK


def _cmd_edges(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    edges = band_edges(
        graph, grid=_grid_for(cfg, DEFAULT_GRID), refine=cfg.refine, workers=cfg.workers
    )
    spectrum = spectrum_set(edges, cfg.flat_tol)
    _emit(cfg, out, _edge_payload(edges, spectrum), _edge_lines(edges, spectrum), _edge_csv(edges))
    return EXIT_OK


def _cmd_sub_edges(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    view = quotient_primitive(graph, parse_chiral(ns.chiral))
    edges = subcovering_band_edges(
        view, grid=_grid_for(cfg, None), refine=cfg.refine, workers=cfg.workers
    )
    spectrum = spectrum_set(edges, cfg.flat_tol)
    payload = _edge_payload(edges, spectrum)
    payload["chiral"] = [list(row) for row in view.chiral.entries]
    lines = [f"chiral: {ns.chiral}"] + _edge_lines(edges, spectrum)
    _emit(cfg, out, payload, lines, _edge_csv(edges))
    return EXIT_OK


def _cmd_quotient(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    reduced = quotient_general(graph, parse_chiral(ns.chiral))
    write_graph_file(reduced, ns.out)
    payload = {
        "out": ns.out,
        "dimension": reduced.dimension,
        "vertices": reduced.nu,
    }
    _emit(
        cfg,
        out,
        payload,
        [f"wrote {ns.out}: {reduced.nu} vertices in dimension {reduced.dimension}"],
        (["out", "dimension", "vertices"], [[ns.out, str(reduced.dimension), str(reduced.nu)]]),
    )
    return EXIT_OK


def _cmd_asymptotics(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    point = parse_rational_point(ns.k0)
    est = band_edge_asymptotic(
        graph, ns.band, ns.side, point.angles(), parse_chiral(ns.chiral), h=cfg.step
    )
    payload = {
        "band": est.band,
        "side": est.side,
        "k_o": list(est.k_o),
        "x_o": list(est.x_o),
        "h_matrix": [list(row) for row in est.h_matrix],
        "correction": est.correction,
        "predicted": est.predicted,
        "tau": est.tau,
        "remainder_order": est.remainder_order,
        "snapped": est.snapped,
        "warnings": list(est.warnings),
    }
    lines = [
        f"band {est.band} {est.side} edge",
        f"predicted: {_fmt(est.predicted)}",
        f"correction: {_fmt(est.correction)}",
        f"tau: {_fmt(est.tau)}",
        f"remainder order: {est.remainder_order}",
    ]
    if est.snapped:
        lines.append("k_o snapped to rational multiples of pi")
    lines.extend(f"warning: {w}" for w in est.warnings)
    header = ["band", "side", "predicted", "correction", "tau", "remainder_order", "snapped"]
    row = [
        str(est.band),
        est.side,
        _fmt(est.predicted),
        _fmt(est.correction),
        _fmt(est.tau),
        str(est.remainder_order),
        str(est.snapped).lower(),
    ]
    _emit(cfg, out, payload, lines, (header, [row]))
    return EXIT_OK


def _cmd_isospectral(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    try:
        with open(ns.level_sets, "r", encoding="utf-8") as fh:
            sets = parse_level_set_file(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read level-set file {ns.level_sets}: {exc}") from exc
    verdict = isospectral_verdict(sets, parse_chiral(ns.chiral), expected_bands=graph.nu)
    label = "true" if verdict.isospectral else "false"
    lines = [f"isospectral: {label}", f"conclusive: {str(verdict.conclusive).lower()}"]
    lines.extend(verdict.detail)
    payload = {
        "isospectral": verdict.isospectral,
        "conclusive": verdict.conclusive,
        "failing": [[band, side] for band, side in verdict.failing],
        "detail": list(verdict.detail),
    }
    header = ["isospectral", "conclusive", "failing"]
    row = [
        label,
        str(verdict.conclusive).lower(),
        ";".join(f"{band} {side}" for band, side in verdict.failing),
    ]
    _emit(cfg, out, payload, lines, (header, [row]))
    return EXIT_OK if verdict.isospectral else EXIT_NEGATIVE


def _cmd_export_dispersion(ns, cfg: RunConfig, out: TextIO) -> int:
    graph = parse_graph_file(ns.graph)
    sample = sample_dispersion(graph, _grid_for(cfg, DEFAULT_GRID), workers=cfg.workers)
    header, rows = _dispersion_table(graph, sample)
    try:
        with open(ns.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise ParseError(f"cannot write {ns.out}: {exc}") from exc
    payload = {"out": ns.out, "rows": len(rows)}
    _emit(
        cfg,
        out,
        payload,
        [f"wrote {ns.out}: {len(rows)} rows"],
        (["out", "rows"], [[ns.out, str(len(rows))]]),
    )
    return EXIT_OK


def _parse_grid_option(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(item.strip(), 10) for item in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid counts must be integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_parse_grid_option, default=None,
                        help="sample counts per axis, e.g. 101 or 101,201")
    common.add_argument("--refine", type=float, default=DEFAULT_REFINE,
                        help="extremum refinement tolerance")
    common.add_argument("--flat-tol", type=float, default=FLAT_TOL,
                        help="band width below which a band counts as flat")
    common.add_argument("--step", type=float, default=DEFAULT_STEP,
                        help="finite-difference step for curvature")
    common.add_argument("--format", choices=_FORMATS, default="text", dest="fmt",
                        help="output format")
    common.add_argument("--workers", type=int, default=None,
                        help="parallel sampling threads (default: ZONEFOLD_WORKERS)")
    common.add_argument("--seed", type=int, default=0,
                        help="random seed for randomized subcommands")

    parser = argparse.ArgumentParser(
        prog="zonefold",
        description="Spectra of periodic graphs and their rolled-up subcoverings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-primitive", parents=[common],
                       help="test whether integer row vectors extend to a lattice basis")
    p.add_argument("chiral")
    p.set_defaults(func=_cmd_check_primitive)

    p = sub.add_parser("complete", parents=[common],
                       help="print a unimodular completion of the chiral rows")
    p.add_argument("chiral")
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("bands", parents=[common], help="tabulate band functions on a grid")
    p.add_argument("graph")
    p.set_defaults(func=_cmd_bands)

    p = sub.add_parser("edges", parents=[common], help="refined band edges and spectrum")
    p.add_argument("graph")
    p.set_defaults(func=_cmd_edges)

    p = sub.add_parser("sub-edges", parents=[common],
                       help="band edges restricted to the rolled-up zone")
    p.add_argument("graph")
    p.add_argument("--chiral", required=True)
    p.set_defaults(func=_cmd_sub_edges)

    p = sub.add_parser("quotient", parents=[common],
                       help="write the general quotient as a new graph file")
    p.add_argument("graph")
    p.add_argument("--chiral", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_quotient)

    p = sub.add_parser("asymptotics", parents=[common],
                       help="band-edge correction for a large chiral matrix")
    p.add_argument("graph")
    p.add_argument("--chiral", required=True)
    p.add_argument("--band", type=int, required=True)
    p.add_argument("--side", choices=("lower", "upper"), required=True)
    p.add_argument("--k0", required=True,
                   help="extremum as rationals scaled by pi, e.g. 1,1,1 or 2/3,-2/3")
    p.set_defaults(func=_cmd_asymptotics)

    p = sub.add_parser("isospectral", parents=[common],
                       help="exact band-edge coincidence verdict")
    p.add_argument("graph")
    p.add_argument("--chiral", required=True)
    p.add_argument("--level-sets", required=True, dest="level_sets")
    p.set_defaults(func=_cmd_isospectral)

    p = sub.add_parser("export-dispersion", parents=[common],
                       help="write the dispersion table to a CSV file")
    p.add_argument("graph")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_dispersion)

    return parser


def _config_from(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        grid=ns.grid,
        refine=ns.refine,
        flat_tol=ns.flat_tol,
        step=ns.step,
        fmt=ns.fmt,
        workers=ns.workers,
        seed=ns.seed,
    )


def _report_error(stream: TextIO, fmt: str, exc: Exception) -> None:
    if fmt == "json":
        stream.write(
            json.dumps({"error": str(exc), "kind": type(exc).__name__}, sort_keys=True) + "\n"
        )
    else:
        stream.write(f"error: {exc}\n")


def dispatch(argv: Sequence[str], stdout: TextIO | None = None,
             stderr: TextIO | None = None) -> int:
    """Run one command line; returns the exit code instead of exiting."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return EXIT_OK if not exc.code else EXIT_USAGE
    fmt = getattr(ns, "fmt", "text")
    try:
        cfg = _config_from(ns)
        return ns.func(ns, cfg, out)
    except NotPrimitive as exc:
        _report_error(err, fmt, exc)
        return EXIT_NEGATIVE
    except (ParseError, ValidationError, WrongShape) as exc:
        _report_error(err, fmt, exc)
        return EXIT_USAGE
    except ZonefoldError as exc:
        _report_error(err, fmt, exc)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
