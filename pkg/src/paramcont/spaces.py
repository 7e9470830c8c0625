"""Constructors for the parameter spaces used by the examples and applications."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from paramcont.model import Node, SampledSpace


@dataclass(frozen=True)
class GridSpec:
    """Lattice over a box.

    ``radii`` are the neighbourhood ball radii in units of the lattice step,
    outermost first.  The default (1, 1/2, 1/4) leaves a singleton innermost
    neighbourhood; ``radii=(1.0,)`` gives a sampled interval whose smallest
    neighbourhood is the one-step ball.
    """

    bounds: tuple[tuple[float, float], ...]
    resolution: int
    radii: tuple[float, ...] = (1.0, 0.5, 0.25)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if self.resolution < 2:
            raise ValueError("grid resolution must be at least 2")
        if not self.bounds:
            raise ValueError("grid needs at least one dimension")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])) or min(self.radii) <= 0:
            raise ValueError("radii must be positive and strictly decreasing")


@dataclass(frozen=True)
class SplitSpec:
    resolution: int
    layers: Literal["two", "three"] = "two"
    depth: int = 3

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("split resolution m must be at least 2")
        if self.layers not in ("two", "three"):
            raise ValueError("layers must be 'two' or 'three'")
        if self.depth < 2:
            raise ValueError("split spaces need depth >= 2")

    @property
    def levels(self) -> tuple[float, ...]:
        return (0.0, 1.0) if self.layers == "two" else (0.0, 0.5, 1.0)


def grid_box(spec: GridSpec) -> SampledSpace:
    axes = [np.linspace(lo, hi, spec.resolution) for lo, hi in spec.bounds]
    pts = np.array(list(itertools.product(*axes)), dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    metric = np.sqrt((diff**2).sum(axis=-1))
    # one lattice step: the smallest per-axis spacing
    step = min((hi - lo) / (spec.resolution - 1) for lo, hi in spec.bounds)
    slack = 1e-9 * step
    nodes = []
    for i, p in enumerate(pts):
        nbhds = tuple(
            frozenset(np.flatnonzero(metric[i] <= r * step + slack).tolist()) for r in spec.radii
        )
        nodes.append(Node(i, tuple(float(c) for c in p), nbhds))
    return SampledSpace(
        tuple(nodes),
        metric=metric,
        metrizable=True,
        perfectly_normal=True,
        name=f"grid{len(spec.bounds)}d-m{spec.resolution}",
    )


def _lex_space(spec: SplitSpec) -> SampledSpace:
    m = spec.resolution
    levels = spec.levels
    L = len(levels)
    ts = [i / (m - 1) for i in range(m)]

    def nid(i: int, layer: int) -> int:
        return i * L + layer

    top = L - 1
    nodes = []
    for i, t in enumerate(ts):
        for layer, s in enumerate(levels):
            me = nid(i, layer)
            nbhds: list[frozenset[int]] = []
            if layer in (0, top):
                # outer sets reach k = depth-1, ..., 1 sample positions to one side;
                # the innermost set is the node alone
                for k in range(spec.depth - 1, 0, -1):
                    if layer == top:
                        span = range(i + 1, min(i + k, m - 1) + 1)
                    else:
                        span = range(max(i - k, 0), i)
                    members = {me} | {nid(j, q) for j in span for q in range(L)}
                    nbhds.append(frozenset(members))
            else:
                nbhds = [frozenset({me})] * (spec.depth - 1)
            nbhds.append(frozenset({me}))
            nodes.append(Node(me, (t, s), tuple(nbhds)))
    return SampledSpace(
        tuple(nodes),
        metric=None,
        metrizable=False,
        perfectly_normal=spec.layers == "two",
        name=f"{'split' if spec.layers == 'two' else 'triple-split'}-m{m}",
    )


def split_interval(spec: SplitSpec) -> SampledSpace:
    """Sampled [0,1] x_lex {0,1}.

    A top-layer node (t,1) has neighbourhoods {y} together with every sample
    in (t, t + k*step] (both layers), for k = depth-1 down to 1, then {y}
    alone; bottom-layer nodes use the mirrored predecessor side.
    """
    if spec.layers != "two":
        raise ValueError("split_interval needs layers='two'")
    return _lex_space(spec)


def triple_split(spec: SplitSpec) -> SampledSpace:
    """Sampled [0,1] x_lex {0,1/2,1}: middle nodes are isolated but sit inside every
    outer neighbourhood of nearby top- and bottom-layer nodes."""
    if spec.layers != "three":
        raise ValueError("triple_split needs layers='three'")
    return _lex_space(spec)


def sequence_space(points: Sequence[Sequence[float]], limit: Sequence[float], depth: int = 3) -> SampledSpace:
    """A convergent sequence together with its limit.

    Sequence points are isolated; the limit's neighbourhoods are tails of
    the sequence (the last 1/2, 1/4, ... of the points) plus the limit.
    """
    pts = np.array([*points, limit], dtype=float)
    n = len(pts)
    L = n - 1
    if L < 2:
        raise ValueError("sequence needs at least two points")
    diff = pts[:, None, :] - pts[None, :, :]
    metric = np.sqrt((diff**2).sum(axis=-1))
    nodes = [Node(i, tuple(pts[i]), (frozenset({i}),) * depth) for i in range(L)]
    tails = []
    for k in range(depth):
        start = L - max(1, L >> (k + 1))
        tails.append(frozenset(range(start, L)) | {L})
    nodes.append(Node(L, tuple(pts[L]), tuple(tails)))
    return SampledSpace(tuple(nodes), metric=metric, metrizable=True, perfectly_normal=True, name="sequence")


def product_space(s1: SampledSpace, s2: SampledSpace) -> SampledSpace:
    """Cartesian product; node (i, j) gets id i * |s2| + j.

    Neighbourhoods are products aligned by list position, the shorter list
    repeating its innermost set.  The perfectly-normal flag is only claimed
    when one factor is metrizable (hence second countable at this scale) and
    the other is perfectly normal.
    """
    n2 = s2.size
    D = max(s1.depth, s2.depth)
    nodes = []
    for i, a in enumerate(s1.nodes):
        for j, b in enumerate(s2.nodes):
            nbhds = tuple(
                frozenset(p * n2 + q for p in s1.neighborhood(i, k) for q in s2.neighborhood(j, k))
                for k in range(D)
            )
            nodes.append(Node(i * n2 + j, a.coords + b.coords, nbhds))
    metric = None
    if s1.metric is not None and s2.metric is not None:
        metric = (s1.metric[:, None, :, None] + s2.metric[None, :, None, :]).reshape(
            s1.size * n2, s1.size * n2
        )
    pn = (
        (s1.metrizable and s2.perfectly_normal)
        or (s2.metrizable and s1.perfectly_normal)
        or (s1.metrizable and s2.metrizable)
    )
    return SampledSpace(
        tuple(nodes),
        metric=metric,
        metrizable=s1.metrizable and s2.metrizable,
        perfectly_normal=pn,
        name=f"({s1.name})x({s2.name})",
    )
