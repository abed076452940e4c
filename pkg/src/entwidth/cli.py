"""Command-line front end: ``entwidth {rankwidth,ttn-build,simulate,verify}``.

Every run prints its resolved configuration first and embeds it in any file
it writes, so a run can be repeated from its own output. Output depends only
on the inputs, flags and seed.

Exit codes: 0 success, 1 usage or parse error, 2 size refusal, 3 failed
verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .dense import (
    DEFAULT_DENSE_LIMIT,
    align_global_phase,
    check_dense_size,
    fidelity,
    num_qubits,
    read_statevector,
    schmidt_rank_dense,
)
from .errors import EntwidthError, FormatError, ImpossibleBranchError, SizeLimitError
from .gf2 import cut_rank
from .graph import Graph, SubcubicTree, format_tree, read_graph, read_tree
from .mqc import oracle_run, read_program, run_program
from .rankwidth import DEFAULT_EXACT_LIMIT, greedy_tree, rank_width_exact, rank_width_heuristic
from .stabilizer import graph_state_dense, graph_state_stabilizer, stabilizer_state_to_dense
from .ttn import (
    DEFAULT_EXHAUSTIVE_LIMIT,
    TreeTensorNetwork,
    build_ttn_from_state,
    build_ttn_graph_state,
    chi_width_dense,
    contract_full,
    normal_form_check,
    ttn_from_json,
    write_ttn,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SIZE = 2
EXIT_VERIFY = 3

ORACLE_PROB_TOL = 1e-9
ORACLE_FIDELITY_TOL = 1e-9
ROUNDTRIP_TOL = 1e-10
AMPLITUDE_TOL = 1e-10


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    tree: str | None = None
    seed: int | None = None
    shots: int | None = None
    mode: str | None = None
    limit: int | None = None
    dense_limit: int = DEFAULT_DENSE_LIMIT
    threads: int = 1
    oracle: bool = False
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


# --- input helpers ----------------------------------------------------------


def _load_json(path: str):
    with open(path) as fh:
        text = fh.read()
    if not text.lstrip().startswith(("[", "{")):
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None


def _auto_graph_tree(graph: Graph, cfg: RunConfig) -> tuple[SubcubicTree, str]:
    if cfg.mode == "exact" or (cfg.mode == "auto" and graph.n <= cfg.limit):
        res = rank_width_exact(graph, cfg.limit, cfg.threads)
    else:
        res = rank_width_heuristic(graph)
    kind = "exact" if res.exact else "heuristic"
    return res.tree, f"rank width {res.width} {kind}"


def _auto_state_tree(psi: np.ndarray, cfg: RunConfig) -> tuple[SubcubicTree, str]:
    n = num_qubits(psi)
    if cfg.mode == "exact" or (cfg.mode == "auto" and n <= cfg.limit):
        res = chi_width_dense(psi, cfg.limit)
        return res.tree, f"chi-width {res.chi_width} exact"
    tree = greedy_tree(n, lambda part: schmidt_rank_dense(psi, part).bit_length() - 1)
    return tree, "chi-width heuristic"


def _tree_for(n: int, cfg: RunConfig, auto) -> tuple[SubcubicTree, str]:
    if cfg.tree is not None:
        tree = read_tree(cfg.tree)
        if tree.n != n:
            raise FormatError(f"tree has {tree.n} leaves but the input has {n} qubits", None, cfg.tree)
        return tree, f"from {cfg.tree}"
    return auto()


def _load_network(path: str, cfg: RunConfig) -> tuple[TreeTensorNetwork, Graph | None, np.ndarray | None, str]:
    """Return ``(ttn, graph, statevector, tree note)`` for a TTN, statevector or graph file."""
    data = _load_json(path)
    if isinstance(data, dict) and "tensors" in data:
        return ttn_from_json(data, path), None, None, f"from {path}"
    if data is not None:
        psi = read_statevector(path)
        check_dense_size(num_qubits(psi), cfg.dense_limit)
        n = num_qubits(psi)
        if n < 2:
            raise FormatError("a network needs at least 2 qubits", None, path)
        tree, note = _tree_for(n, cfg, lambda: _auto_state_tree(psi, cfg))
        return build_ttn_from_state(psi, tree), None, psi, note
    graph = read_graph(path)
    if graph.n < 2:
        raise FormatError("a network needs at least 2 qubits", None, path)
    tree, note = _tree_for(graph.n, cfg, lambda: _auto_graph_tree(graph, cfg))
    return build_ttn_graph_state(graph, tree, cfg.dense_limit), graph, None, note


# --- commands ---------------------------------------------------------------


def cmd_rankwidth(args: argparse.Namespace) -> int:
    mode = "exact" if args.exact else "heuristic" if args.heuristic else "auto"
    cfg = RunConfig(
        "rankwidth", [args.graph], mode=mode, limit=args.limit, threads=args.threads, output=args.output
    )
    graph = read_graph(args.graph)
    if mode == "exact" or (mode == "auto" and graph.n <= args.limit):
        res = rank_width_exact(graph, args.limit, args.threads)
    else:
        res = rank_width_heuristic(graph)
    _out(f"# config {cfg.dumps()}")
    _out(f"width {res.width} {'exact' if res.exact else 'heuristic'}")
    if res.tree is None:
        _out("tree none (fewer than 2 vertices)")
        return EXIT_OK
    text = format_tree(res.tree, f"config {cfg.dumps()}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _out(f"tree written to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ttn_build(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        "ttn-build",
        [args.input],
        tree=args.tree,
        mode="exact" if args.exact else "heuristic" if args.heuristic else "auto",
        limit=args.limit,
        dense_limit=args.dense_limit,
        threads=args.threads,
        output=args.output,
    )
    data = _load_json(args.input)
    if cfg.limit is None:
        cfg.limit = DEFAULT_EXACT_LIMIT if data is None else DEFAULT_EXHAUSTIVE_LIMIT
    if isinstance(data, dict) and "tensors" in data:
        raise FormatError("input is already a TTN file", None, args.input)
    ttn, _, _, note = _load_network(args.input, cfg)
    _out(f"# config {cfg.dumps()}")
    _out(f"tree {note}")
    _out(f"D {ttn.schmidt_dimension()}")
    for (u, v), d in ttn.bond_dims.items():
        _out(f"bond {u}-{v} {d}")
    if args.output:
        write_ttn(ttn, args.output, cfg.to_json())
        _out(f"ttn written to {args.output}")
    return EXIT_OK


def _parse_forced(text: str | None) -> list[int] | None:
    if text is None:
        return None
    if any(c not in "01" for c in text):
        raise FormatError(f"--forced must be a bit string, got {text!r}")
    return [int(c) for c in text]


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        "simulate",
        [args.input, args.program],
        tree=args.tree,
        seed=args.seed,
        shots=args.shots,
        mode="exact" if args.exact else "heuristic" if args.heuristic else "auto",
        limit=args.limit,
        dense_limit=args.dense_limit,
        threads=args.threads,
        oracle=args.oracle,
        output=args.output,
    )
    if args.shots < 0:
        raise FormatError("--shots must be non-negative")
    forced = _parse_forced(args.forced)
    cfg.extra = {"forced": args.forced}
    data = _load_json(args.input)
    if cfg.limit is None:
        cfg.limit = DEFAULT_EXACT_LIMIT if data is None else DEFAULT_EXHAUSTIVE_LIMIT
    program = read_program(args.program)
    ttn, graph, psi, note = _load_network(args.input, cfg)
    program.check_qubits(ttn.n)
    cfg.extra["tree"] = note
    if args.oracle:
        check_dense_size(ttn.n, cfg.dense_limit)
        if psi is None:
            psi = graph_state_dense(graph, cfg.dense_limit) if graph is not None else contract_full(ttn, cfg.dense_limit)
    lines = [json.dumps({"config": cfg.to_json()}, sort_keys=True)]
    max_disc = 0.0
    min_fid = 1.0
    try:
        records = run_program(ttn, program, seed=args.seed, shots=args.shots, forced=forced)
        for rec in records:
            item = rec.to_json()
            if args.oracle:
                ref = oracle_run(psi, program, seed=args.seed, shot=rec.shot, forced=rec.outcomes, limit=cfg.dense_limit)
                disc = max((abs(a - b) for a, b in zip(rec.probabilities, ref.probabilities)), default=0.0)
                fid = fidelity(contract_full(rec.final_state, cfg.dense_limit), ref.final_state)
                item["oracle_discrepancy"] = disc
                item["oracle_fidelity"] = fid
                max_disc = max(max_disc, disc)
                min_fid = min(min_fid, fid)
            lines.append(json.dumps(item, sort_keys=True))
    except ImpossibleBranchError:
        sys.stdout.write("\n".join(lines) + "\n")
        raise
    failed = False
    if args.oracle:
        failed = max_disc >= ORACLE_PROB_TOL or min_fid < 1 - ORACLE_FIDELITY_TOL
        summary = {
            "oracle": {
                "max_probability_discrepancy": max_disc,
                "min_final_fidelity": min_fid,
                "passed": not failed,
            }
        }
        lines.append(json.dumps(summary, sort_keys=True))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_VERIFY if failed else EXIT_OK


def _verify_checks(graph: Graph, cfg: RunConfig) -> list[tuple[str, bool | None, str]]:
    n = graph.n
    checks: list[tuple[str, bool | None, str]] = []

    psi = graph_state_dense(graph, cfg.dense_limit)
    stab = stabilizer_state_to_dense(graph_state_stabilizer(graph), cfg.dense_limit)
    err = float(np.max(np.abs(align_global_phase(stab, psi) - psi)))
    checks.append(("amplitudes", err < AMPLITUDE_TOL, f"max |stabilizer - formula| = {err!r}"))

    bad = 0
    total = 0
    for mask in range(1, 1 << max(n - 1, 0)):
        part = [q for q in range(n) if (mask >> q) & 1]
        total += 1
        if schmidt_rank_dense(psi, part) != 1 << cut_rank(graph, part):
            bad += 1
    checks.append(("cut-rank", bad == 0, f"{total - bad}/{total} bipartitions agree"))

    if n < 2:
        checks.append(("ttn-roundtrip", True, "trivial (fewer than 2 qubits)"))
        checks.append(("rank-width", True, "trivial (fewer than 2 qubits)"))
        return checks
    width = rank_width_exact(graph, cfg.limit, cfg.threads) if n <= cfg.limit else rank_width_heuristic(graph)
    ttn = build_ttn_graph_state(graph, width.tree, cfg.dense_limit)
    fid = fidelity(contract_full(ttn, cfg.dense_limit), psi)
    nf = normal_form_check(ttn)
    ok = fid >= 1 - ROUNDTRIP_TOL and nf.passed
    checks.append(("ttn-roundtrip", ok, f"fidelity {fid!r}, normal form {'holds' if nf.passed else 'violated'}"))

    if n > DEFAULT_EXHAUSTIVE_LIMIT or not width.exact:
        checks.append(("rank-width", None, f"skipped: exhaustive chi-width limited to n <= {DEFAULT_EXHAUSTIVE_LIMIT}"))
    else:
        chi = chi_width_dense(psi, DEFAULT_EXHAUSTIVE_LIMIT)
        checks.append(("rank-width", chi.chi_width == width.width, f"rank width {width.width}, chi-width {chi.chi_width}"))
    return checks


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        "verify", [args.graph], limit=args.limit, dense_limit=args.dense_limit, threads=args.threads, output=args.output
    )
    graph = read_graph(args.graph)
    check_dense_size(graph.n, cfg.dense_limit)
    checks = _verify_checks(graph, cfg)
    lines = [f"# config {cfg.dumps()}"]
    for name, ok, detail in checks:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        lines.append(f"{status} {name}: {detail}")
    failed = any(ok is False for _, ok, _ in checks)
    lines.append("result FAIL" if failed else "result PASS")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_VERIFY if failed else EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker processes for tree search (default 1)")
    common.add_argument("--output", "-o", default=None, help="output file")

    mode = argparse.ArgumentParser(add_help=False)
    grp = mode.add_mutually_exclusive_group()
    grp.add_argument("--exact", action="store_true", help="force exhaustive tree search")
    grp.add_argument("--heuristic", action="store_true", help="force the greedy tree")

    dense = argparse.ArgumentParser(add_help=False)
    dense.add_argument("--dense-limit", type=int, default=DEFAULT_DENSE_LIMIT, help="largest dense statevector (qubits)")

    parser = _Parser(prog="entwidth", description="Entanglement width, tree tensor networks and MQC simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rankwidth", parents=[common, mode], help="rank width and an optimal tree")
    p.add_argument("graph")
    p.add_argument("--limit", type=int, default=DEFAULT_EXACT_LIMIT, help="largest n for exact search")
    p.set_defaults(func=cmd_rankwidth)

    p = sub.add_parser("ttn-build", parents=[common, mode, dense], help="build a normal-form TTN")
    p.add_argument("input", help="graph file or statevector JSON")
    p.add_argument("--tree", default=None, help="tree file (computed when omitted)")
    p.add_argument("--limit", type=int, default=None, help="largest n for exact tree search")
    p.set_defaults(func=cmd_ttn_build)

    p = sub.add_parser("simulate", parents=[common, mode, dense], help="run a measurement program")
    p.add_argument("input", help="TTN JSON, statevector JSON or graph file")
    p.add_argument("program", help="measurement program JSON")
    p.add_argument("--tree", default=None, help="tree file for graph or statevector input")
    p.add_argument("--limit", type=int, default=None, help="largest n for exact tree search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--forced", default=None, help="force outcomes, e.g. 0110")
    p.add_argument("--oracle", action="store_true", help="cross-check every shot against the dense oracle")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common, dense], help="cross-check the stack on a graph")
    p.add_argument("graph")
    p.add_argument("--limit", type=int, default=DEFAULT_EXACT_LIMIT, help="largest n for exact search")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        sys.stderr.write("entwidth: error: --threads must be at least 1\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except SizeLimitError as exc:
        sys.stderr.write(f"entwidth: size limit: {exc}\n")
        return EXIT_SIZE
    except ImpossibleBranchError as exc:
        sys.stderr.write(f"entwidth: impossible branch at step {exc.step}: {exc}\n")
        return EXIT_USAGE
    except (EntwidthError, OSError) as exc:
        sys.stderr.write(f"entwidth: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
