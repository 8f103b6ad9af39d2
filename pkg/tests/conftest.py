"""Shared fixture grid: exactly-evaluable code assemblies reused across the
unit and acceptance suites.

Every entry is exhaustively enumerable (|Y|^n <= 2^20) and spans identity and
BSC channels, disjoint and overlapping families, and all five generator
families.
"""

from __future__ import annotations

from dataclasses import dataclass

import pytest

import bfclab as B
from bfclab import boolfn as BF


def _subset_of_message(m: int, i: int):
    return [t for t in range(1, m + 1) if (i >> (m - t)) & 1]


def _make_functions(kind: str, m: int):
    if kind == "id":
        return [BF.make_id(m, _subset_of_message(m, i)) for i in range(1 << m)]
    if kind == "rank":
        return [BF.make_rank(m, r) for r in range(1 << m)]
    if kind == "bit":
        return [BF.make_bit(m, t) for t in range(1, m + 1)]
    if kind == "and":
        subsets = {2: [(), (1,), (2,), (1, 2)], 3: [(), (1,), (2,), (1, 2), (1, 2, 3)]}
        return [BF.make_and(m, s) for s in subsets[m]]
    if kind == "thr":
        return [BF.make_threshold_exact(m, b) for b in range(m + 1)]
    if kind == "thr_atmost":
        return [BF.make_threshold_atmost(m, b) for b in range(m + 1)]
    raise ValueError(kind)


@dataclass(frozen=True)
class GridFixture:
    name: str
    channel: object
    inner: object
    family: object
    functions: tuple
    code: object


_GRID_SPEC = [
    # name, channel, (inner kind, n, M, seed), (ground, eps, lam, target, seed), fn kind, m
    ("ident-id-m3", "identity:2", ("identity", 3, None, None), (8, 0.125, 0.45, 8, 5), "id", 3),
    ("ident-rank-m3", "identity:2", ("identity", 3, None, None), (8, 0.125, 0.45, 8, 5), "rank", 3),
    ("ident-bit-m2", "identity:2", ("identity", 3, None, None), (8, 0.125, 0.45, 4, 2), "bit", 2),
    ("ident-and-m2", "identity:2", ("identity", 3, None, None), (8, 0.125, 0.45, 4, 2), "and", 2),
    ("ident-thr-m2", "identity:2", ("identity", 3, None, None), (8, 0.125, 0.45, 4, 2), "thr", 2),
    ("bsc02-id-m2", "bsc:0.02", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "id", 2),
    ("bsc05-id-m2", "bsc:0.05", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "id", 2),
    ("bsc10-id-m2", "bsc:0.1", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "id", 2),
    ("bsc02-rank-m2", "bsc:0.02", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "rank", 2),
    ("bsc05-rank-m2", "bsc:0.05", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "rank", 2),
    ("bsc10-rank-m2", "bsc:0.1", ("random", 5, 8, 11), (8, 0.125, 0.45, 4, 1), "rank", 2),
    ("bsc02-bit-m3", "bsc:0.02", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "bit", 3),
    ("bsc05-bit-m3", "bsc:0.05", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "bit", 3),
    ("bsc10-bit-m3", "bsc:0.1", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "bit", 3),
    ("bsc02-thr-m3", "bsc:0.02", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "thr_atmost", 3),
    ("bsc05-thr-m3", "bsc:0.05", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "thr_atmost", 3),
    ("bsc10-thr-m3", "bsc:0.1", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "thr_atmost", 3),
    ("bsc05-and-m3", "bsc:0.05", ("random", 6, 16, 13), (16, 0.125, 0.45, 8, 2), "and", 3),
    ("bsc10-cap1-id-m3", "bsc:0.1", ("random", 5, 20, 19), (20, 0.15, 0.45, 8, 6), "id", 3),
    ("bsc02-cap1-rank-m3", "bsc:0.02", ("random", 5, 20, 23), (20, 0.15, 0.45, 8, 6), "rank", 3),
    ("bsc02-big-rank-m2", "bsc:0.02", ("random", 14, 16, 17), (16, 0.125, 0.45, 4, 2), "rank", 2),
]


def _build_grid():
    channels: dict = {}
    inners: dict = {}
    families: dict = {}
    grid = []
    for name, chspec, innerspec, famspec, fnkind, m in _GRID_SPEC:
        channel = channels.setdefault(chspec, B.load_channel(chspec))
        ikey = (chspec, innerspec)
        if ikey not in inners:
            kind, n, M, seed = innerspec
            if kind == "identity":
                inners[ikey] = B.build_identity_code(channel, n)
            else:
                inners[ikey] = B.build_random_code(channel, n, M, seed)
        inner = inners[ikey]
        if famspec not in families:
            ground, eps, lam, target, seed = famspec
            families[famspec] = B.build_family_greedy(ground, eps, lam, target, seed)
        family = families[famspec]
        functions = tuple(_make_functions(fnkind, m))
        code = B.assemble_bfc(inner, family, functions)
        grid.append(GridFixture(name, channel, inner, family, functions, code))
    return grid


@pytest.fixture(scope="session")
def fixture_grid():
    return _build_grid()


@pytest.fixture(scope="session")
def exact_reports(fixture_grid):
    """name -> (GridFixture, exact ErrorReport)."""
    return {
        fx.name: (fx, B.eval_errors(fx.code, fx.channel, "exact"))
        for fx in fixture_grid
    }
