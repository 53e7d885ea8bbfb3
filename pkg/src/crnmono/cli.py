"""Command-line front end: ``crnmono {analyze,graph,simulate,sweep,oracle} FILE``.

Exit codes: 0 success, 1 inconclusive verdict (``analyze``) or oracle
disagreement, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .core import Network, NetworkError
from .graphs import (
    BRUTE_FORCE_LIMIT,
    OddCycle,
    Verdict,
    VerdictKind,
    augment,
    brute_force_labeling,
    build_r_graph,
    build_sr_graph,
    check_io_monotonicity,
    find_consistent_labeling,
    to_dot,
    verify_labeling,
)
from .parser import NetworkDocument, ParseError, parse
from .sim import SimConfig, SimulationError, SweepError, check_empirical_monotonicity, simulate, sweep, sweep_csv, trajectory_csv

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_argparser() -> argparse.ArgumentParser:
    p = _Parser(prog="crnmono", description="Structural input/output monotonicity of reaction networks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="decide monotonicity of OUTPUT with respect to INPUT")
    a.add_argument("file")
    a.add_argument("--input")
    a.add_argument("--output")
    a.add_argument("--json", action="store_true", help="emit a machine-readable report")

    g = sub.add_parser("graph", help="print the SR-graph or R-graph as DOT")
    g.add_argument("file")
    g.add_argument("--kind", choices=("sr", "r"), default="r")
    g.add_argument("--augment", action="store_true", help="add the input/output dummy reactions first")
    g.add_argument("--input")
    g.add_argument("--output")
    g.add_argument("--format", choices=("dot",), default="dot")

    s = sub.add_parser("simulate", help="integrate from the file's initial concentrations")
    s.add_argument("file")
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--out", help="write the trajectory CSV here instead of stdout")

    w = sub.add_parser("sweep", help="steady-state output over a range of initial input values")
    w.add_argument("file")
    w.add_argument("--input")
    w.add_argument("--output")
    w.add_argument("--from", dest="lo", type=float, required=True)
    w.add_argument("--to", dest="hi", type=float, required=True)
    w.add_argument("--points", type=int, required=True)
    w.add_argument("--log", action="store_true", help="log-spaced values")
    w.add_argument("--empirical", action="store_true", help="also run the pointwise dominance check")
    w.add_argument("--t-end", type=float, default=100.0)
    w.add_argument("--out", help="write the sweep CSV here instead of stdout")

    o = sub.add_parser("oracle", help="compare the fast labeling search with exhaustive search")
    o.add_argument("file")
    o.add_argument("--input")
    o.add_argument("--output")
    return p


def _load(path: str) -> NetworkDocument:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _io(doc: NetworkDocument, args, required: bool = True) -> tuple[int, int] | None:
    net = doc.network
    inp = args.input or doc.declared_input
    out = args.output or doc.declared_output
    if inp is None or out is None:
        if required:
            raise UsageError("input and output species are required (flags or 'input'/'output' lines)")
        return None
    try:
        i, o = net.species_id(inp), net.species_id(out)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if i == o:
        raise UsageError("input and output species must be distinct")
    return i, o


def _sign(v: int) -> str:
    return "+1" if v > 0 else "-1"


def _cycle_text(net: Network, cyc: OddCycle) -> list[str]:
    names, sp = net.reaction_names, net.species_names
    out = []
    n = len(cyc.nodes)
    for step, e in enumerate(cyc.edges):
        a, b = names[cyc.nodes[step]], names[cyc.nodes[(step + 1) % n]]
        wit = ",".join(sp[j] for j in e.witnesses)
        out.append(f"  {a} -- {b}  [{'+' if e.sign > 0 else '-'}]  via {wit}")
    return out


def verdict_report(v: Verdict, doc: NetworkDocument) -> dict:
    aug = v.augmented
    names = aug.reaction_names
    sp = aug.species_names
    rep = {
        "input": sp[v.input],
        "output": sp[v.output],
        "verdict": v.kind.value,
        "sign_product": v.sign_product,
        "disconnected": v.disconnected,
        "sigma": {names[i]: v.labeling[i] for i in range(len(names))} if v.labeling else None,
        "certificate": None,
        "rule_of_two_violations": [
            {"species": sp[j], "n": v.rule_of_two.counts[j]} for j in v.rule_of_two_witnesses
        ],
    }
    if v.certificate is not None:
        n = len(v.certificate.nodes)
        rep["certificate"] = {
            "type": "odd_negative_cycle",
            "negative_edges": v.certificate.negative_count,
            "edges": [
                {
                    "from": names[v.certificate.nodes[s]],
                    "to": names[v.certificate.nodes[(s + 1) % n]],
                    "sign": e.sign,
                    "witnesses": [sp[j] for j in e.witnesses],
                }
                for s, e in enumerate(v.certificate.edges)
            ],
        }
    return rep


def _analyze(args, out, err) -> int:
    doc = _load(args.file)
    i, o = _io(doc, args)
    v = check_io_monotonicity(doc.network, i, o)
    if args.json:
        out.write(json.dumps(verdict_report(v, doc), indent=2, sort_keys=True) + "\n")
        return EXIT_INCONCLUSIVE if v.kind is VerdictKind.INCONCLUSIVE else EXIT_OK

    aug = v.augmented
    sp = aug.species_names
    out.write(f"input: {sp[i]}\noutput: {sp[o]}\nverdict: {v.kind.value}\n")
    if v.labeling is not None:
        out.write(f"sigma(R_IN)*sigma(R_OUT) = {_sign(v.sign_product)}\n")
        if v.disconnected:
            out.write("note: disconnected input/output (R_IN and R_OUT lie in different R-graph components)\n")
        out.write("sigma:\n")
        for idx, name in enumerate(aug.reaction_names):
            out.write(f"  {name}\t{_sign(v.labeling[idx])}\n")
        return EXIT_OK
    out.write(f"odd-negative cycle ({v.certificate.negative_count} negative edge(s)):\n")
    out.write("\n".join(_cycle_text(aug, v.certificate)) + "\n")
    for j in v.rule_of_two_witnesses:
        out.write(f"rule of 2 fails at {sp[j]}: n = {v.rule_of_two.counts[j]}\n")
    return EXIT_INCONCLUSIVE


def _graph(args, out, err) -> int:
    doc = _load(args.file)
    net = doc.network
    labeling = None
    if args.augment:
        i, o = _io(doc, args)
        net = augment(net, i, o)
    if args.kind == "sr":
        out.write(to_dot(build_sr_graph(net)))
    else:
        rg = build_r_graph(net)
        found = find_consistent_labeling(rg)
        if args.augment:
            v = check_io_monotonicity(doc.network, i, o)
            labeling = v.labeling
        elif not isinstance(found, OddCycle):
            labeling = found
        out.write(to_dot(rg, labeling))
    return EXIT_OK


def _simulate(args, out, err) -> int:
    doc = _load(args.file)
    try:
        cfg = SimConfig(t_end=args.t_end)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        traj = simulate(doc.network, None, cfg)
    except SimulationError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    text = trajectory_csv(traj)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    ss = traj.steady_state
    err.write(f"steady state: {'converged' if ss.converged else 'not converged'} (max change {ss.max_change:.3g})\n")
    return EXIT_OK


def _sweep(args, out, err) -> int:
    doc = _load(args.file)
    i, o = _io(doc, args)
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.log:
        if args.lo <= 0:
            raise UsageError("--log needs a positive --from")
        values = np.geomspace(args.lo, args.hi, args.points)
    else:
        values = np.linspace(args.lo, args.hi, args.points)
    try:
        cfg = SimConfig(t_end=args.t_end)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        if args.empirical:
            res = check_empirical_monotonicity(doc.network, i, o, values, cfg)
            result = res.sweep
        else:
            result = sweep(doc.network, i, values, o, cfg, keep_trajectories=False)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except SweepError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    text = sweep_csv(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    if args.empirical:
        line = f"empirical: {res.kind.value}"
        if res.gap is not None and res.pair is not None:
            line += f" (worst gap {res.gap:.3g} at t={res.time:.6g} between inputs {res.pair[0]:.6g} and {res.pair[1]:.6g})"
        err.write(line + "\n")
    return EXIT_OK


def _oracle(args, out, err) -> int:
    doc = _load(args.file)
    nets = [("network", doc.network)]
    io_pair = _io(doc, args, required=False)
    if io_pair is not None:
        nets.append(("augmented", augment(doc.network, *io_pair)))
    agree_all = True
    for label, net in nets:
        if net.n_reactions > BRUTE_FORCE_LIMIT:
            raise UsageError(f"oracle supports at most {BRUTE_FORCE_LIMIT} reactions, {label} has {net.n_reactions}")
        rg = build_r_graph(net)
        fast = find_consistent_labeling(rg)
        slow = brute_force_labeling(rg)
        fast_ok = not isinstance(fast, OddCycle)
        agree = fast_ok == (slow is not None)
        if fast_ok:
            agree = agree and verify_labeling(net, fast)
        agree_all &= agree
        out.write(
            f"{label}: fast={'labeling' if fast_ok else 'odd cycle'} "
            f"brute_force={'labeling' if slow is not None else 'none'} "
            f"agree={'yes' if agree else 'NO'}\n"
        )
    return EXIT_OK if agree_all else EXIT_INCONCLUSIVE


_COMMANDS = {
    "analyze": _analyze,
    "graph": _graph,
    "simulate": _simulate,
    "sweep": _sweep,
    "oracle": _oracle,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = _build_argparser().parse_args(list(argv) if argv is not None else None)
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NetworkError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
