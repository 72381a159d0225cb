"""On-line chain partitioning of posets presented in layers."""
from .bipartite import INF, BipartitePoset, Characteristics, Node, components, find_dilworth_clique, surplus
from .coloring import PropertyStarChecker, check_property_star, lam, lambda_budget
from .partitioners import DownGrowing, FirstFit, UpGrowing
from .poset import Poset, width
from .presentation import Presentation, init_event, read_events, validate_event, write_events
from .regular import RegularPartitioner, finalize, init, insert

__all__ = [
    "INF", "BipartitePoset", "Characteristics", "Node", "components", "find_dilworth_clique",
    "surplus", "PropertyStarChecker", "check_property_star", "lam", "lambda_budget",
    "DownGrowing", "FirstFit", "UpGrowing", "Poset", "width", "Presentation", "init_event",
    "read_events", "validate_event", "write_events", "RegularPartitioner", "finalize", "init",
    "insert",
]
