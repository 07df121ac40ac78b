"""Command-line front end: ``python -m docalc <command> ...``.

Exit status is 0 on success, 1 on a usage or input error, and 2 when a
numeric check fails.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import asdict

from .bayesnet import BayesNet, ProbTable, StateSpaceError, conditional, joint
from .dsep import d_separated
from .formats import FormatError, format_graph, parse_graph, parse_net
from .graph import Dag, GraphError, add_roots, cut_incoming, cut_outgoing
from .harness import GenConfig, fuzz, render_json
from .interventions import UnsupportedQuery, do_query, root_switch_net
from .rules import RuleQuery, rule_applicable

OK, USER_ERROR, CHECK_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _names(text: str) -> list[str]:
    return sorted({t.strip() for t in text.split(",") if t.strip()})


def _assignment(text: str, allow_bare: bool = False) -> tuple[dict[str, int], list[str]]:
    """``X=1,Z=0`` to a dict; with ``allow_bare`` a plain ``E`` goes to the second list."""
    fixed, bare = {}, []
    for item in filter(None, (t.strip() for t in text.split(","))):
        name, eq, value = item.partition("=")
        if not eq:
            if not allow_bare:
                raise UsageError(f"expected NAME=STATE, got {item!r}")
            bare.append(name.strip())
            continue
        try:
            fixed[name.strip()] = int(value)
        except ValueError:
            raise UsageError(f"state of {name.strip()} must be an integer, got {value!r}") from None
    return fixed, sorted(bare)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _edges(g: Dag) -> list[str]:
    return [f"{u} -> {v}" for u, v in g.sorted_edges()]


def _emit(args, data: dict, lines: list[str]) -> None:
    print(render_json(data) if args.json else "\n".join(lines))


def _cells(t: ProbTable) -> list[dict]:
    out = []
    for x in _states(t):
        out.append({"assignment": x, "p": float(t[x]) if t.is_defined(x) else None})
    return out


def _states(t: ProbTable):
    for combo in itertools.product(*(range(k) for k in t.shape)):
        yield dict(zip(t.scope, combo))


def _table_lines(t: ProbTable) -> list[str]:
    lines = []
    for cell in _cells(t):
        label = " ".join(f"{v}={s}" for v, s in cell["assignment"].items()) or "()"
        p = "undefined" if cell["p"] is None else f"{cell['p']:.12g}"
        lines.append(f"  {label}  {p}")
    return lines


def cmd_dsep(args) -> int:
    g = parse_graph(_read(args.graph))
    verdict = d_separated(g, _names(args.a), _names(args.b), _names(args.given))
    witness = verdict.witness.render() if verdict.witness else None
    lines = ["SEPARATED" if verdict.separated else "NOT SEPARATED"]
    if witness:
        lines.append(f"witness: {witness}")
    _emit(args, {"separated": verdict.separated, "witness": witness}, lines)
    return OK


def cmd_mutilate(args) -> int:
    g = parse_graph(_read(args.graph))
    g = cut_incoming(g, _names(args.cut_in))
    g = cut_outgoing(g, _names(args.cut_out))
    g, roots = add_roots(g, _names(args.add_roots))
    data = {"nodes": sorted(g.nodes), "edges": [list(e) for e in g.sorted_edges()], "roots": roots}
    _emit(args, data, [format_graph(g).rstrip("\n")])
    return OK


def _switch_table(bn: BayesNet, target: list[str], do: dict[str, int], given: dict[str, int],
                  free: list[str]) -> ProbTable:
    rs = root_switch_net(bn, do)
    roots = {f"rt__{v}": 1 for v in do}
    t = conditional(joint(rs), target, set(do) | set(given) | set(free) | set(roots))
    return t.slice({**do, **given, **roots})


def cmd_intervene(args) -> int:
    bn = parse_net(_read(args.net))
    do, bare = _assignment(args.do)
    if bare or not do:
        raise UsageError("--do needs at least one NAME=STATE")
    given, free = _assignment(args.given, allow_bare=True)
    target = _names(args.target)
    if not target:
        raise UsageError("--target needs at least one node")
    tables = {}
    if args.method in ("truncate", "both"):
        t = do_query(bn, target, do, set(given) | set(free))
        tables["truncate"] = t.slice(given)
    if args.method in ("root-switch", "both"):
        tables["root-switch"] = _switch_table(bn, target, do, given, free)
    shown = tables.get("truncate", tables.get("root-switch"))
    data = {"method": args.method, "table": _cells(shown)}
    lines = [f"P({','.join(target)} | do({args.do}){', ' + args.given if args.given else ''}) [{args.method}]"]
    lines += _table_lines(shown)
    status = OK
    if args.method == "both":
        gap = tables["truncate"].max_abs_diff(tables["root-switch"])
        data["max_discrepancy"] = gap
        lines.append(f"max discrepancy: {gap:.3g}")
        if gap > args.tol:
            status = CHECK_FAILED
    _emit(args, data, lines)
    return status


def cmd_rule(args) -> int:
    bn = parse_net(_read(args.net)) if args.net else None
    if args.graph:
        g = parse_graph(_read(args.graph))
        if bn is not None and bn.dag != g:
            raise UsageError("--graph and --net describe different graphs")
    elif bn is not None:
        g = bn.dag
    else:
        raise UsageError("rule needs --graph or --net")
    q = RuleQuery(_names(args.b), _names(args.a), _names(args.h), _names(args.i))
    v = rule_applicable(g, args.rule, q, bn=bn, tol=args.tol)
    edges = _edges(v.graph)
    lines = [f"{'APPLICABLE' if v.applicable else 'NOT APPLICABLE'} (rule {v.rule})",
             f"edges: {', '.join(edges) if edges else '(none)'}"]
    data = {"rule": v.rule, "applicable": v.applicable, "edges": edges,
            "witness": v.witness.render() if v.witness else None}
    if v.witness:
        lines.append(f"witness: {v.witness.render()}")
    status = OK
    if v.numeric is not None:
        data["numeric"] = asdict(v.numeric)
        n = v.numeric
        lines.append(f"max deviation: {n.max_deviation:.3g} "
                     f"({n.checked_cells} cells checked, {n.skipped_cells} skipped)")
        if v.applicable and not n.holds:
            status = CHECK_FAILED
    _emit(args, data, lines)
    return status


def cmd_fuzz(args) -> int:
    try:
        cfg = GenConfig(nodes=args.nodes, edge_prob=args.edge_prob, max_card=args.max_card,
                        seed=args.seed, trials=args.trials)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    graph = parse_graph(_read(args.graph)) if args.graph else None
    report = fuzz(cfg, graph, threshold=args.threshold)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return OK if report.passed else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="docalc", description="d-separation, interventions and the do-calculus rules")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="emit one JSON object")

    sp = sub.add_parser("dsep", help="test d-separation of two node sets")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--given", default="")
    common(sp)
    sp.set_defaults(func=cmd_dsep)

    sp = sub.add_parser("mutilate", help="cut arrows and add switch roots, print the graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--cut-in", default="", help="erase arrows entering these nodes")
    sp.add_argument("--cut-out", default="", help="erase arrows leaving these nodes")
    sp.add_argument("--add-roots", default="", help="give these nodes an rt__ parent")
    common(sp)
    sp.set_defaults(func=cmd_mutilate)

    sp = sub.add_parser("intervene", help="interventional distribution of a target set")
    sp.add_argument("--net", required=True)
    sp.add_argument("--do", required=True, help="X=1[,Z=0]")
    sp.add_argument("--target", required=True)
    sp.add_argument("--given", default="", help="E=1 to fix, E to tabulate")
    sp.add_argument("--method", choices=("truncate", "root-switch", "both"), default="truncate")
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_intervene)

    sp = sub.add_parser("rule", help="graphical applicability of a do-calculus rule")
    sp.add_argument("--graph")
    sp.add_argument("--net")
    sp.add_argument("--rule", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--h", default="")
    sp.add_argument("--i", default="")
    sp.add_argument("--tol", type=float, default=1e-9)
    common(sp)
    sp.set_defaults(func=cmd_rule)

    sp = sub.add_parser("fuzz", help="random nets against the graphical verdicts (JSON report)")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--nodes", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--edge-prob", type=float, default=0.5)
    sp.add_argument("--max-card", type=int, default=3)
    sp.add_argument("--threshold", type=float, default=0.05, help="faithfulness probe limit")
    sp.add_argument("--graph", help="fix the structure, vary CPTs and queries")
    sp.add_argument("--out", help="also write the report here")
    common(sp)
    sp.set_defaults(func=cmd_fuzz)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return USER_ERROR
    except (OSError, FormatError, GraphError, StateSpaceError, UnsupportedQuery, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USER_ERROR
