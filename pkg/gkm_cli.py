"""
Command-line surface for the GKM graph toolkit.

Commands:
    validate     axiom report for an interchange file
    betti        graph Betti numbers for a seeded generic direction
    cohom        solver dimensions against the Morse formula (optionally with a fiber)
    connection   compatible connection tables
    chern-check  Chern-label compatibility along the connection
    transport    symplectic class along a path or around a cycle
    defect       cycle defects around given or fundamental cycles
    generate     write a builder graph in the interchange format

Exit codes: 0 success, 1 domain violation, 2 I/O or parse error.
Logs go to stderr; stdout carries only results, so identical invocations give
byte-identical output.
"""

import argparse
import asyncio
import json
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from tabulate import tabulate

from builders import BuilderSpec, build_bundle_example
from cohomology_solver import (
    FiberData,
    formula_nonisolated_dims,
    morse_check,
    solve,
    solve_async,
    solve_nonisolated,
    tensor_dims,
)
from connection_chern import (
    EdgeGeometry,
    OmegaClass,
    check_chern_compat,
    compute_connection,
    cycle_defect,
    fundamental_cycles,
    path_from_vertices,
    transport_omega,
)
from gkm_config import FORMATS, configure_logging, get_run_defaults_from_env
from gkm_errors import DomainError, GkmError, InputError, InvalidGraph, MissingChernData
from gkm_graph import betti, pick_generic, validate
from graph_handler import GraphDataHandler, LoadedGraph

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2

_VERTEX_TOKEN = re.compile(r"\{[^}]*\}|[^,]+")


@dataclass
class RunConfig:
    """One resolved invocation: environment defaults with flags applied on top."""
    command: str
    source: Optional[str] = None
    builder: Optional[str] = None
    k_max: int = 3
    seed: int = 0
    output_format: str = "tsv"
    strict: bool = False

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError(f"k_max must be non-negative, got {self.k_max}")
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")


def split_vertex_list(text: str) -> List[str]:
    """Comma-separated vertex names; braces keep subset labels such as {1,2} whole."""
    return [token.strip() for token in _VERTEX_TOKEN.findall(text) if token.strip()]


# ============================================================================
# OUTPUT
# ============================================================================

def _emit(config: RunConfig, headers: Sequence[str], rows: Sequence[Sequence[Any]], payload: Dict) -> None:
    if config.output_format == "json":
        print(json.dumps(payload, indent=2))
    elif config.output_format == "table":
        print(tabulate(rows, headers=list(headers), tablefmt="grid", disable_numparse=True))
    else:
        print(tabulate(rows, headers=list(headers), tablefmt="tsv", disable_numparse=True,
                       numalign=None, stralign=None))


def _flag(value: bool) -> str:
    return "true" if value else "false"


# ============================================================================
# INPUT
# ============================================================================

def _load(config: RunConfig, fiber_text: Optional[str] = None, strict_schema: bool = False) -> LoadedGraph:
    if config.builder:
        spec = BuilderSpec.parse(config.builder)
        fiber = FiberData.parse(fiber_text) if fiber_text else None
        if spec.family == "bundle":
            graph, fiber, geometry = build_bundle_example(spec.inner, fiber or FiberData.point())
            return LoadedGraph(graph, geometry, fiber, source_file=spec.render())
        return LoadedGraph(spec.build(), None, fiber, source_file=spec.render())
    if not config.source:
        raise InputError("give an interchange file or --builder")
    loaded = GraphDataHandler(strict=strict_schema).ingest_json(config.source)
    if fiber_text:
        loaded.fiber = FiberData.parse(fiber_text)
    return loaded


def _load_valid(config: RunConfig, fiber_text: Optional[str] = None) -> LoadedGraph:
    """Load and refuse graphs that fail validation; generic directions and connections need the axioms."""
    loaded = _load(config, fiber_text=fiber_text)
    report = validate(loaded.graph)
    if not report.is_valid:
        for v in report.violations:
            logger.error(f"{loaded.source_file}: {v.axiom} at {v.location}: {v.message}")
        first = report.violations[0]
        raise InvalidGraph(
            f"{loaded.source_file} fails validation ({len(report.violations)} violation(s)); "
            f"first: {first.axiom} at {first.location}",
            report=report,
        )
    return loaded


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_validate(config: RunConfig, args: argparse.Namespace) -> int:
    loaded = _load(config, strict_schema=args.strict_schema)
    report = validate(loaded.graph)
    rows = [[v.axiom, v.location, v.message] for v in report.violations]
    if config.output_format == "tsv" and report.is_valid:
        print("valid")
    else:
        _emit(config, ["axiom", "location", "message"], rows, report.to_dict())
    if not report.is_valid:
        logger.error(f"{loaded.source_file}: {len(report.violations)} axiom violation(s)")
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_betti(config: RunConfig, args: argparse.Namespace) -> int:
    graph = _load_valid(config).graph
    direction = pick_generic(graph, config.seed)
    betti_vector = betti(graph, direction)
    if config.output_format == "tsv":
        print(betti_vector.render())
    else:
        _emit(
            config,
            ["i", "beta_i"],
            [[i, b] for i, b in enumerate(betti_vector)],
            {"xi": list(direction.xi), "betti": list(betti_vector.values)},
        )
    return EXIT_OK


def cmd_cohom(config: RunConfig, args: argparse.Namespace) -> int:
    loaded = _load_valid(config, fiber_text=args.fiber)
    graph = loaded.graph
    if args.parallel:
        solution = asyncio.run(solve_async(graph, config.k_max))
    else:
        solution = solve(graph, config.k_max)
    report = morse_check(graph, config.k_max, seed=config.seed, solution=solution)

    if loaded.fiber is None:
        rows = [[r.k, r.cohomology_degree, r.solver_dim, r.formula_bound, _flag(r.equal)] for r in report.rows]
        payload = {
            "betti": list(report.betti.values),
            "rows": [
                {"k": r.k, "degree": r.cohomology_degree, "dim": r.solver_dim,
                 "formula": r.formula_bound, "equal": r.equal}
                for r in report.rows
            ],
        }
        _emit(config, ["k", "degree", "dim", "formula", "equal"], rows, payload)
    else:
        fiber = loaded.fiber
        max_real_degree = 2 * config.k_max
        direct = solve_nonisolated(graph, fiber, max_real_degree)
        tensor = tensor_dims(solution, fiber, max_real_degree)
        formula = formula_nonisolated_dims(report.betti, graph.rank, fiber, max_real_degree)
        rows = [
            [d, direct.dims[d], tensor[d], formula[d], _flag(direct.dims[d] == tensor[d] == formula[d])]
            for d in range(max_real_degree + 1)
        ]
        payload = {
            "betti": list(report.betti.values),
            "fiber": list(fiber.poincare),
            "rows": [
                {"degree": d, "dim": direct.dims[d], "tensor": tensor[d], "formula": formula[d],
                 "equal": direct.dims[d] == tensor[d] == formula[d]}
                for d in range(max_real_degree + 1)
            ],
        }
        _emit(config, ["degree", "dim", "tensor", "formula", "equal"], rows, payload)

    if not report.inequality_holds:
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_connection(config: RunConfig, args: argparse.Namespace) -> int:
    graph = _load_valid(config).graph
    connection = compute_connection(graph, strict=config.strict)
    rows = [
        [edge.label, source.label, image.label]
        for edge, mapping in connection.maps.items()
        for source, image in mapping.items()
    ]
    payload = connection.to_dict()
    payload["oriented_edges"] = len(connection.maps)
    payload["bijective"] = all(len(set(m.values())) == len(m) for m in connection.maps.values())
    _emit(config, ["edge", "from", "to"], rows, payload)
    if config.output_format != "json":
        state = "confirmed" if payload["bijective"] else "failed"
        print(f"bijectivity {state} on {payload['oriented_edges']} oriented edges")
    return EXIT_OK


def _require_geometry(loaded: LoadedGraph) -> EdgeGeometry:
    if loaded.geometry is None:
        raise MissingChernData(f"{loaded.source_file} carries no edge lengths or chern labels")
    return loaded.geometry


def cmd_chern_check(config: RunConfig, args: argparse.Namespace) -> int:
    loaded = _load_valid(config)
    geometry = _require_geometry(loaded)
    connection = compute_connection(loaded.graph, strict=config.strict)
    report = check_chern_compat(loaded.graph, connection, geometry)
    if config.output_format == "tsv" and report.is_compatible:
        print("compatible")
    else:
        rows = [
            [v.traversed.label, v.edge.label, v.image.label,
             ",".join(map(str, v.edge_chern)), ",".join(map(str, v.image_chern))]
            for v in report.violations
        ]
        _emit(config, ["traversed", "edge", "image", "edge_chern", "image_chern"], rows, report.to_dict())
    if not report.is_compatible:
        logger.error(f"chern labels incompatible on edges {report.flagged_edges()}")
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_transport(config: RunConfig, args: argparse.Namespace) -> int:
    loaded = _load(config)
    geometry = _require_geometry(loaded)
    closed = args.cycle is not None
    vertices = split_vertex_list(args.cycle if closed else args.path)
    path = path_from_vertices(loaded.graph, vertices)
    omega = OmegaClass.parse(args.omega) if args.omega else OmegaClass.zero(geometry.chern_rank)
    classes = transport_omega(loaded.graph, geometry, path, omega)
    rows = [[step, vertex, omega_class.render()] for step, (vertex, omega_class) in enumerate(zip(vertices, classes))]
    payload: Dict[str, Any] = {
        "path": vertices,
        "classes": [omega_class.render() for omega_class in classes],
    }
    if closed:
        defect = cycle_defect(loaded.graph, geometry, path)
        rows.append(["defect", "", defect.render()])
        payload["defect"] = defect.render()
    _emit(config, ["step", "vertex", "omega"], rows, payload)
    return EXIT_OK


def cmd_defect(config: RunConfig, args: argparse.Namespace) -> int:
    loaded = _load(config)
    geometry = _require_geometry(loaded)
    if args.cycle:
        cycles = [path_from_vertices(loaded.graph, split_vertex_list(args.cycle))]
    else:
        cycles = fundamental_cycles(loaded.graph)
    rows = []
    for cycle in cycles:
        route = ",".join([cycle[0].source] + [edge.target for edge in cycle])
        rows.append([route, cycle_defect(loaded.graph, geometry, cycle).render()])
    payload = {"cycles": [{"cycle": route, "defect": defect} for route, defect in rows]}
    _emit(config, ["cycle", "defect"], rows, payload)
    return EXIT_OK


def cmd_generate(config: RunConfig, args: argparse.Namespace) -> int:
    text = args.family if not args.params else f"{args.family}:{args.params}"
    spec = BuilderSpec.parse(text)
    handler = GraphDataHandler()
    if spec.family == "bundle":
        fiber = FiberData.parse(args.fiber) if args.fiber else FiberData((1, 0, 1))
        graph, fiber, geometry = build_bundle_example(spec.inner, fiber)
        document = handler.dump_json(graph, geometry, fiber)
    else:
        document = handler.dump_json(spec.build())
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        logger.info(f"wrote {spec.render()} to {args.out}")
    else:
        sys.stdout.write(document)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "betti": cmd_betti,
    "cohom": cmd_cohom,
    "connection": cmd_connection,
    "chern-check": cmd_chern_check,
    "transport": cmd_transport,
    "defect": cmd_defect,
    "generate": cmd_generate,
}


# ============================================================================
# PARSER
# ============================================================================

def build_parser(defaults: Dict[str, Any]) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=FORMATS, default=defaults["output_format"])
    common.add_argument("--seed", type=int, default=defaults["seed"], help="seed for the generic direction")
    common.add_argument("--log-level", default=defaults["log_level"], help="log level for stderr (GKM_LOG)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("file", nargs="?", help="graph interchange file (JSON)")
    source.add_argument("--builder", help="builder spec instead of a file, e.g. projective:2")
    source.add_argument("--strict", action="store_true", default=defaults["strict"],
                        help="require integral congruence multiples")
    source.add_argument("--strict-schema", action="store_true", help="reject unknown JSON fields")

    parser = argparse.ArgumentParser(prog="gkm", description="GKM graph toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common, source], help="check the action axioms")
    sub.add_parser("betti", parents=[common, source], help="graph Betti numbers")

    cohom = sub.add_parser("cohom", parents=[common, source], help="graded dimensions of H(Gamma)")
    cohom.add_argument("--kmax", type=int, default=defaults["k_max"])
    cohom.add_argument("--fiber", help="Poincare list of the fixed component, e.g. 1,0,1")
    cohom.add_argument("--parallel", action="store_true", help="solve degrees concurrently")

    sub.add_parser("connection", parents=[common, source], help="compatible connection")
    sub.add_parser("chern-check", parents=[common, source], help="chern-label compatibility")

    transport = sub.add_parser("transport", parents=[common, source], help="transport the symplectic class")
    route = transport.add_mutually_exclusive_group(required=True)
    route.add_argument("--path", help="comma-separated vertex list")
    route.add_argument("--cycle", help="comma-separated closed vertex list")
    transport.add_argument("--omega", help="starting class as comma-separated rationals (default zero)")

    defect = sub.add_parser("defect", parents=[common, source], help="cycle defects")
    defect.add_argument("--cycle", help="comma-separated closed vertex list (default: fundamental cycles)")

    generate = sub.add_parser("generate", parents=[common], help="write a builder graph")
    generate.add_argument("family", help="projective | grassmannian | toric-product | bundle")
    generate.add_argument("params", nargs="?", default="", help="e.g. 2, or 4,2, or projective:1 for bundle")
    generate.add_argument("--out", help="output file (default stdout)")
    generate.add_argument("--fiber", help="fiber Poincare list for bundles (default 1,0,1)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    defaults = get_run_defaults_from_env()
    args = build_parser(defaults).parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = RunConfig(
            command=args.command,
            source=getattr(args, "file", None),
            builder=getattr(args, "builder", None),
            k_max=getattr(args, "kmax", defaults["k_max"]),
            seed=args.seed,
            output_format=args.output_format,
            strict=getattr(args, "strict", False),
        )
        return COMMANDS[args.command](config, args)
    except (InputError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except GkmError as e:
        logger.exception(f"internal error in {args.command}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
