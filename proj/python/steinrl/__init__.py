"""Steiner tree solvers: exact, classic 2-approximation and a learned greedy policy."""

import json

from ._core import (
    Instance,
    ParseError,
    QNet,
    ReductionError,
    SolverError,
    Tree,
    TreeError,
    active_search,
    agent,
    exact,
    generate,
    initialize_qnet,
    kmb,
    load_checkpoint,
    metric_b,
    metric_gain,
    metric_r,
    parse_steinlib,
    read_steinlib,
    recover,
    reduce_mvc,
    reduce_sat,
    reduce_x3c,
    verify_tree,
    write_steinlib,
)
from ._core import bench_json as _bench_json


def bench(source, methods, **kwargs):
    """Run the benchmark and return the decoded JSON report (rows and aggregates)."""
    if isinstance(methods, str):
        methods = methods.split(",")
    return json.loads(_bench_json(str(source), list(methods), **kwargs))


__all__ = [name for name in dir() if not name.startswith("_")]
