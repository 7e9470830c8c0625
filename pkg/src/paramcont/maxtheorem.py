"""Maximum theorem engine for discrete alternatives: constraint
correspondences, value functions, argmax correspondences and
hemicontinuity checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from paramcont.axioms import AxiomReport, Witness
from paramcont.model import AlternativeSet, Correspondence, SampledSpace, UtilityField
from paramcont.spaces import GridSpec, grid_box


class TruncationError(ValueError):
    """The stored alternatives do not contain the whole budget set of the full lattice."""


@dataclass(frozen=True, eq=False)
class PriceWealthGrid:
    prices: NDArray[np.float64]
    wealth: NDArray[np.float64]

    def __post_init__(self) -> None:
        p = np.atleast_2d(np.asarray(self.prices, dtype=float))
        w = np.asarray(self.wealth, dtype=float).reshape(-1)
        if p.shape[0] != w.shape[0]:
            raise ValueError("prices and wealth must have one entry per node")
        if (p <= 0).any() or (w <= 0).any():
            raise ValueError("prices and wealth must be strictly positive")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "wealth", w)

    def __len__(self) -> int:
        return len(self.wealth)


def price_wealth_space(
    price_bounds: Sequence[tuple[float, float]],
    wealth_bounds: tuple[float, float],
    resolution: int,
) -> tuple[SampledSpace, PriceWealthGrid]:
    """Grid over prices x wealth; coordinates are (p_1, ..., p_d, w)."""
    space = grid_box(GridSpec(tuple(price_bounds) + (wealth_bounds,), resolution))
    c = space.coords_array()
    return space, PriceWealthGrid(c[:, :-1], c[:, -1])


def budget(p: Sequence[float], w: float, alts: AlternativeSet) -> frozenset[int]:
    """Indices of the stored bundles a with p . a <= w.

    Raises :class:`TruncationError` when some lattice bundle of the full
    Z^d_+ budget set is missing from the stored alternatives.
    """
    if alts.embedding is None:
        raise ValueError("budget sets need alternatives embedded as bundles")
    p = np.asarray(p, dtype=float)
    emb = alts.embedding
    if p.shape != (emb.shape[1],):
        raise ValueError(f"price vector has {p.size} entries, bundles have {emb.shape[1]}")
    caps = emb.max(axis=0)
    reach = np.floor(w / p)
    if (reach > caps).any():
        i = int(np.argmax(reach - caps))
        raise TruncationError(
            f"bound w/p_{i} = {w / p[i]:.6g} exceeds the stored cap {int(caps[i])} in coordinate {i}"
        )
    stored = {tuple(v) for v in emb.tolist()}
    for pt in itertools.product(*(range(int(r) + 1) for r in reach)):
        if float(np.dot(p, pt)) <= w and pt not in stored:
            raise TruncationError(f"affordable bundle {pt} is not among the stored alternatives")
    inside = emb @ p <= w
    chosen = frozenset(int(i) for i in np.flatnonzero(inside))
    if not chosen:
        raise TruncationError("budget set is empty (zero bundle not stored)")
    return chosen


def budget_correspondence(grid: PriceWealthGrid, alts: AlternativeSet) -> Correspondence:
    return Correspondence(tuple(budget(grid.prices[x], grid.wealth[x], alts) for x in range(len(grid))))


def check_uhc(corr: Correspondence, space: SampledSpace) -> AxiomReport:
    """Upper hemicontinuity with G = corr(x): some neighbourhood maps into subsets of corr(x)."""
    witnesses = []
    for x, node in enumerate(space.nodes):
        cx = corr[x]
        if any(all(corr[y] <= cx for y in nb) for nb in node.neighborhoods):
            continue
        y = min(y for y in space.innermost(x) if not corr[y] <= cx)
        extra = tuple(sorted(corr[y] - cx))
        witnesses.append(Witness(x, extra, depth=space.depth - 1, other=y))
    return AxiomReport("UHC", witnesses)


def check_lhc(corr: Correspondence, space: SampledSpace) -> AxiomReport:
    """Lower hemicontinuity: each a in corr(x) stays available on some neighbourhood."""
    witnesses = []
    for x, node in enumerate(space.nodes):
        for a in sorted(corr[x]):
            if any(all(a in corr[y] for y in nb) for nb in node.neighborhoods):
                continue
            y = min(y for y in space.innermost(x) if a not in corr[y])
            witnesses.append(Witness(x, (a,), depth=space.depth - 1, other=y))
    return AxiomReport("LHC", witnesses)


def value_and_argmax(
    U: UtilityField, corr: Correspondence, tol: float = 0.0
) -> tuple[NDArray[np.float64], Correspondence]:
    """Value function and argmax correspondence.

    Maximizers are exact ties by default; ``tol > 0`` admits every
    alternative within ``tol`` of the maximum.
    """
    if len(corr) != U.n_nodes:
        raise ValueError("correspondence and utility field disagree on the node count")
    V = np.empty(U.n_nodes)
    sets = []
    for x in range(U.n_nodes):
        avail = sorted(corr[x])
        if max(avail) >= U.n_alts:
            raise ValueError(f"alternative {max(avail)} at node {x} has no utility row")
        vals = U.values[avail, x]
        best = vals.max()
        V[x] = best
        sets.append(frozenset(a for a, v in zip(avail, vals) if best - v <= tol))
    return V, Correspondence(tuple(sets), corr.space_name)


def oscillations(values: NDArray[np.float64], space: SampledSpace) -> NDArray[np.float64]:
    """``osc[x, k]`` = max - min of ``values`` over the depth-k neighbourhood of x."""
    v = np.asarray(values, dtype=float)
    cols = []
    for idx in space.padded:
        sub = v[idx]
        cols.append(sub.max(axis=1) - sub.min(axis=1))
    return np.stack(cols, axis=1)


def check_value_continuity(
    V: NDArray[np.float64], space: SampledSpace, schedule: Sequence[float]
) -> AxiomReport:
    """Passes at x iff the oscillation of V over its depth-k neighbourhood is at most schedule[k], for every k."""
    if len(schedule) != space.depth:
        raise ValueError(f"schedule has {len(schedule)} entries, neighborhood depth is {space.depth}")
    osc = oscillations(V, space)
    bound = np.asarray(schedule, dtype=float)[None, :]
    witnesses = [
        Witness(int(x), (), depth=int(k), value=float(osc[x, k]))
        for x, k in np.argwhere(osc > bound)
    ]
    return AxiomReport("value-continuity", witnesses)


@dataclass
class Lemma2Result:
    m: int
    total: int
    passing_both: int
    counterexamples: list[tuple[frozenset[int], ...]]

    @property
    def holds(self) -> bool:
        return not self.counterexamples


def lemma2_exhaustive(m: int, radii: tuple[float, ...] = (1.0,)) -> Lemma2Result:
    """Enumerate every nonempty-valued correspondence from an m-point sampled
    [0,1] into {a, b}; those passing both hemicontinuity checks must be constant."""
    space = grid_box(GridSpec(((0.0, 1.0),), m, radii))
    values = (frozenset({0}), frozenset({1}), frozenset({0, 1}))
    total = passing = 0
    bad = []
    for combo in itertools.product(values, repeat=m):
        total += 1
        corr = Correspondence(combo)
        if check_uhc(corr, space).passed and check_lhc(corr, space).passed:
            passing += 1
            if len(set(combo)) != 1:
                bad.append(combo)
    return Lemma2Result(m, total, passing, bad)


def measured_modulus(U: UtilityField, space: SampledSpace) -> list[float]:
    """Per depth, the largest oscillation of any utility row over any neighbourhood."""
    out = np.zeros(space.depth)
    for row in U.values:
        out = np.maximum(out, oscillations(row, space).max(axis=0))
    return [float(v) for v in out]

