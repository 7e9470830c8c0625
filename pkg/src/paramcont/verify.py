"""Cross-cutting verification: representation checks, continuity moduli,
the continuity-implies-CD direction, and the split-interval obstruction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from paramcont.axioms import AxiomReport, Witness, check_cd
from paramcont.builder import BuildConfig, build_representation
from paramcont.maxtheorem import oscillations
from paramcont.model import PreferenceField, SampledSpace, UtilityField
from paramcont.spaces import SplitSpec, split_interval, triple_split


def check_representation(U: UtilityField, field: PreferenceField, tol: float | None = None) -> AxiomReport:
    """Witness every ordered pair whose value order disagrees with the stored relation."""
    if U.n_nodes != field.n_nodes or U.n_alts != field.n_alts:
        raise ValueError("utility field and preference field have different shapes")
    tol = U.tolerance if tol is None else tol
    v = U.values.T  # (n, J)
    diff = v[:, None, :] - v[:, :, None]  # [x, a, b] = U(b,x) - U(a,x)
    mismatch = (diff > tol) != field.strict
    return AxiomReport(
        "representation",
        [Witness(int(x), (int(a), int(b))) for x, a, b in np.argwhere(mismatch)],
    )


def check_utility_continuity(U: UtilityField, space: SampledSpace, schedule: Sequence[float]) -> AxiomReport:
    """Every row of U must respect the per-depth oscillation schedule at every node."""
    if len(schedule) != space.depth:
        raise ValueError(f"schedule has {len(schedule)} entries, neighborhood depth is {space.depth}")
    bound = np.asarray(schedule, dtype=float)[None, :]
    witnesses = []
    for a, row in enumerate(U.values):
        osc = oscillations(row, space)
        for x, k in np.argwhere(osc > bound):
            witnesses.append(Witness(int(x), (a,), depth=int(k), value=float(osc[x, k])))
    witnesses.sort(key=lambda w: (w.node, w.alternatives, w.depth))
    return AxiomReport("utility-continuity", witnesses)


def cd_necessity(
    U: UtilityField, field: PreferenceField, space: SampledSpace, schedule: Sequence[float]
) -> AxiomReport:
    """Finite form of "a continuous representation forces CD".

    U counts as continuous at x when some depth k has every row oscillating
    by at most schedule[k] over the depth-k neighbourhood and 2*schedule[k]
    is below the smallest strict utility gap at x.  Witnesses are nodes
    where that holds but CD fails; for a genuine representation there are
    none.
    """
    if len(schedule) != space.depth:
        raise ValueError(f"schedule has {len(schedule)} entries, neighborhood depth is {space.depth}")
    sched = np.asarray(schedule, dtype=float)
    osc = np.stack([oscillations(row, space) for row in U.values]).max(axis=0)  # (n, D)
    v = U.values.T
    diff = v[:, None, :] - v[:, :, None]
    gaps = np.where(field.strict, diff, np.inf).min(axis=(1, 2))
    resolved = (osc <= sched[None, :]) & (2.0 * sched[None, :] < gaps[:, None])
    continuous = resolved.any(axis=1)
    cd_fail = {w.node for w in check_cd(field, space).witnesses}
    witnesses = [Witness(int(x)) for x in np.flatnonzero(continuous) if int(x) in cd_fail]
    report = AxiomReport("CD-necessity", witnesses)
    report.note = f"{int(continuous.sum())} of {space.size} nodes certified continuous at this schedule"
    return report


@dataclass
class ModulusReport:
    innermost: list[float]  # per alternative, max over nodes of the smallest non-singleton oscillation
    per_depth: list[list[float]]  # per alternative, per depth: max over nodes
    node_table: NDArray[np.float64]  # (J, n, D)
    innermost_table: NDArray[np.float64]  # (J, n)
    worst_node: int

    def to_json(self) -> dict[str, Any]:
        return {
            "innermost": self.innermost,
            "per_depth": self.per_depth,
            "worst_node": self.worst_node,
        }


def modulus_report(U: UtilityField, space: SampledSpace) -> ModulusReport:
    if U.n_nodes != space.size:
        raise ValueError("utility field and space disagree on the node count")
    table = np.stack([oscillations(row, space) for row in U.values])
    idx = space.padded_nontrivial
    inner = np.stack([row[idx].max(axis=1) - row[idx].min(axis=1) for row in U.values])
    worst = int(np.unravel_index(np.argmax(inner), inner.shape)[1]) if inner.size else 0
    return ModulusReport(
        innermost=[float(r.max()) for r in inner],
        per_depth=[[float(c) for c in t.max(axis=0)] for t in table],
        node_table=table,
        innermost_table=inner,
        worst_node=worst,
    )


# --- exact interval propagation for oscillation constraints -------------------------------


class Infeasible(ValueError):
    pass


Bound = Fraction | None  # None is unbounded


def as_fraction(x: float | int | str | Fraction) -> Fraction:
    """Floats are read as the nearest rational with denominator at most 10**12."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x)).limit_denominator(10**12)
    return Fraction(x)


def neighborhood_width(space: SampledSpace, members: Iterable[int]) -> Fraction:
    """Diameter under the metric, or the spread of the first coordinate when there is none."""
    ms = sorted(members)
    if space.metric is not None:
        return as_fraction(float(space.metric[np.ix_(ms, ms)].max()))
    ts = [as_fraction(float(space.nodes[i].coords[0])) for i in ms]
    return max(ts) - min(ts)


def oscillation_constraints(
    space: SampledSpace, modulus: Sequence[float] | float, nodes: Iterable[int] | None = None
) -> list[tuple[tuple[int, ...], Fraction]]:
    """One constraint per non-singleton declared neighbourhood: oscillation <= modulus[k] * width."""
    coef = [modulus] * space.depth if isinstance(modulus, (int, float, Fraction)) else list(modulus)
    if len(coef) != space.depth:
        raise ValueError(f"schedule has {len(coef)} entries, neighborhood depth is {space.depth}")
    coef = [as_fraction(c) for c in coef]
    seen = set()
    out = []
    for x in range(space.size) if nodes is None else nodes:
        for k in range(space.depth):
            nb = space.neighborhood(x, k)
            if len(nb) < 2:
                continue
            key = (tuple(sorted(nb)), k)
            if key in seen:
                continue
            seen.add(key)
            out.append((key[0], coef[k] * neighborhood_width(space, nb)))
    return out


def propagate(
    n: int,
    constraints: Sequence[tuple[tuple[int, ...], Fraction]],
    lo: list[Bound],
    hi: list[Bound],
) -> tuple[list[Bound], list[Bound]]:
    """Tighten per-node intervals to a fixpoint under "oscillation over S <= b".

    Each constraint is the family of differences f(u) - f(v) <= b over S, so
    the fixpoint bounds are tight and any node's bound is attained by some
    feasible assignment (setting every node to its lower bound is feasible).
    """
    lo, hi = list(lo), list(hi)
    for _ in range(n + 2):
        changed = False
        for members, b in constraints:
            los = [lo[u] for u in members if lo[u] is not None]
            his = [hi[u] for u in members if hi[u] is not None]
            floor = max(los) - b if los else None
            ceil = min(his) + b if his else None
            for u in members:
                if floor is not None and (lo[u] is None or floor > lo[u]):
                    lo[u] = floor
                    changed = True
                if ceil is not None and (hi[u] is None or ceil < hi[u]):
                    hi[u] = ceil
                    changed = True
        for u in range(n):
            if lo[u] is not None and hi[u] is not None and lo[u] > hi[u]:
                raise Infeasible(f"empty interval at node {u}")
        if not changed:
            return lo, hi
    raise Infeasible("propagation did not settle")


def max_min_gap(
    n: int,
    constraints: Sequence[tuple[tuple[int, ...], Fraction]],
    zeros: Iterable[int],
    targets: Sequence[int],
) -> Bound:
    """Largest c such that some f with f = 0 on ``zeros`` meets every constraint and |f| >= c on ``targets``.

    Replacing f by |f| keeps every difference bound and the zeros, so the
    targets may all be taken positive.  The propagated upper bound hi(u) is
    the constraint-graph distance from the zero set, and f = min(c, hi) is
    feasible, hence the optimum is the smallest finite hi over the targets.
    Returns None when no target is constrained.
    """
    lo: list[Bound] = [None] * n
    hi: list[Bound] = [None] * n
    for z in zeros:
        lo[z] = hi[z] = Fraction(0)
    _, hi = propagate(n, constraints, lo, hi)
    caps = [hi[t] for t in targets if hi[t] is not None]
    return min(caps) if caps else None


@dataclass
class ObstructionReport:
    kind: str
    schedule: list[float]
    gap: float
    gap_exact: str
    forced_nodes: list[int]
    obstructed: bool
    m: int | None = None
    interval: tuple[float, float] | None = None
    series: list[dict[str, Any]] = field(default_factory=list)
    attempt_max_excess: float | None = None
    attempt_min_strict_gap: float | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.kind,
            "schedule": self.schedule,
            "gap": self.gap,
            "gap_exact": self.gap_exact,
            "forced_nodes": self.forced_nodes,
            "obstructed": self.obstructed,
            "series": self.series,
        }
        if self.m is not None:
            out["m"] = self.m
        if self.interval is not None:
            out["interval"] = list(self.interval)
        if self.attempt_max_excess is not None:
            out["attempt_max_excess"] = self.attempt_max_excess
            out["attempt_min_strict_gap"] = self.attempt_min_strict_gap
        return out


def _schedule_list(schedule: Sequence[float] | float, depth: int) -> list[float]:
    if isinstance(schedule, (int, float)):
        return [float(schedule)] * depth
    return [float(s) for s in schedule]


def interval_nodes(space: SampledSpace, interval: tuple[float, float], layers: Sequence[float]) -> list[int]:
    lo, hi = as_fraction(interval[0]), as_fraction(interval[1])
    out = []
    for node in space.nodes:
        t, s = node.coords
        if s in layers and lo <= as_fraction(t) <= hi:
            out.append(node.id)
    return out


def _triple_gap(m: int, interval: tuple[float, float], schedule: Sequence[float] | float) -> tuple[Bound, list[int]]:
    space = triple_split(SplitSpec(m, "three"))
    zeros = interval_nodes(space, interval, (0.0, 1.0))
    targets = interval_nodes(space, interval, (0.5,))
    if len(targets) < 2:
        raise ValueError(f"interval {interval} holds fewer than two sample points at resolution {m}")
    cons = oscillation_constraints(space, schedule)
    return max_min_gap(space.size, cons, zeros, targets), targets


def triple_split_obstruction(
    m: int,
    interval: tuple[float, float],
    schedule: Sequence[float] | float,
    multipliers: Sequence[int] = (1, 2, 4),
) -> ObstructionReport:
    """Best achievable min |f| over middle-layer nodes above ``interval``.

    f must vanish exactly on interval x {0,1} and, on every declared
    neighbourhood, oscillate by at most the schedule coefficient times the
    width of the neighbourhood's base interval.
    """
    if not 0.0 <= interval[0] < interval[1] <= 1.0:
        raise ValueError(f"degenerate interval {interval}")
    series = []
    for mult in multipliers:
        gap, _ = _triple_gap(m * mult, interval, schedule)
        series.append({"m": m * mult, "gap": float(gap) if gap is not None else float("inf"), "gap_exact": str(gap)})
    gap, targets = _triple_gap(m, interval, schedule)
    depth = SplitSpec(m, "three").depth
    return ObstructionReport(
        kind="triple-split",
        schedule=_schedule_list(schedule, depth),
        gap=float(gap) if gap is not None else float("inf"),
        gap_exact=str(gap),
        forced_nodes=targets,
        obstructed=gap is not None,
        m=m,
        interval=(float(interval[0]), float(interval[1])),
        series=series,
    )


def two_alternative_field(space: SampledSpace, indifferent: Iterable[int]) -> PreferenceField:
    """a ~ b on ``indifferent`` and a strictly below b elsewhere."""
    F = set(indifferent)
    pairs = {x: ([] if x in F else [(0, 1)]) for x in range(space.size)}
    return PreferenceField.from_pairs(space.size, 2, pairs, space.name)


def example2_demo(
    space: SampledSpace,
    F: Iterable[int],
    schedule: Sequence[float] | float,
    cfg: BuildConfig = BuildConfig(),
) -> ObstructionReport:
    """Two alternatives, indifferent exactly on the closed node set F.

    Nodes outside F that lie in some declared neighbourhood of an F node are
    pulled towards zero by the oscillation constraints; the report gives the
    best separation a schedule-respecting f can keep on them, and how far a
    sign-exact inductive representation overshoots the schedule.
    """
    if space.perfectly_normal:
        raise ValueError("example2_demo needs a space flagged not perfectly normal")
    F = sorted(set(F))
    if not F or len(F) == space.size:
        raise ValueError("F must be a nonempty proper subset of the nodes")
    Fs = set(F)
    forced = sorted({y for x in F for nb in space.nodes[x].neighborhoods for y in nb} - Fs)
    cons = oscillation_constraints(space, schedule)
    gap = max_min_gap(space.size, cons, F, forced) if forced else None
    field = two_alternative_field(space, F)
    U = build_representation(field, space, cfg, require_perfectly_normal=False)
    diff = U.values[1] - U.values[0]
    excess = max((float(diff[list(S)].max() - diff[list(S)].min()) - float(b) for S, b in cons), default=0.0)
    strict_nodes = [x for x in range(space.size) if x not in Fs]
    return ObstructionReport(
        kind="closed-set",
        schedule=_schedule_list(schedule, space.depth),
        gap=float(gap) if gap is not None else float("inf"),
        gap_exact=str(gap),
        forced_nodes=forced,
        obstructed=bool(forced),
        attempt_max_excess=excess,
        attempt_min_strict_gap=float(np.abs(diff[strict_nodes]).min()),
    )


def split_interval_control(m: int, interval: tuple[float, float], cfg: BuildConfig = BuildConfig()) -> float:
    """Smallest |U(b) - U(a)| over the strict region of the built representation on the split interval."""
    space = split_interval(SplitSpec(m, "two"))
    F = interval_nodes(space, interval, (0.0, 1.0))
    field = two_alternative_field(space, F)
    U = build_representation(field, space, cfg)
    diff = U.values[1] - U.values[0]
    strict = [x for x in range(space.size) if x not in set(F)]
    return float(np.abs(diff[strict]).min())
