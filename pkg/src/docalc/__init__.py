"""Do-calculus on small discrete Bayesian networks, checked by exact enumeration."""

from .bayesnet import BayesNet, Cpt, ProbTable, ci_holds, conditional, dep_ratio, joint, marginal
from .dsep import UndirectedPath, d_separated, d_separated_fast, enumerate_paths
from .formats import parse_graph, parse_net, read_graph, read_net
from .graph import Dag, add_roots, ancestors, cut_incoming, cut_outgoing, descendants, restrict
from .interventions import Query, do_query, mow, op_mow_limit, op_uproot, root_switch_net, uproot
from .rules import RuleQuery, rule_applicable, rule_equality_holds, s_prime_check

__all__ = [
    "BayesNet", "Cpt", "Dag", "ProbTable", "Query", "RuleQuery", "UndirectedPath",
    "add_roots", "ancestors", "ci_holds", "conditional", "cut_incoming", "cut_outgoing",
    "d_separated", "d_separated_fast", "dep_ratio", "descendants", "do_query", "enumerate_paths",
    "joint", "marginal", "mow", "op_mow_limit", "op_uproot", "parse_graph", "parse_net",
    "read_graph", "read_net", "restrict", "root_switch_net", "rule_applicable",
    "rule_equality_holds", "s_prime_check", "uproot",
]
