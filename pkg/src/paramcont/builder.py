"""Construction of parametrically continuous utility representations.

Two routes are provided.  ``build_urysohn_pair`` handles two alternatives on
a metric space with a truncated series of distance quotients.
``build_representation`` handles any number of alternatives on any sampled
space by induction over an enumeration: each new alternative is placed
between the lower and upper envelopes of the utilities already built, with
the fictional alternatives at -inf and +inf closing the envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from paramcont.axioms import (
    AxiomReport,
    check_asymmetry,
    check_cd,
    check_negative_transitivity,
)
from paramcont.model import EnvelopePair, PreferenceField, SampledSpace, UtilityField


class PreconditionError(ValueError):
    def __init__(self, report: AxiomReport | None, message: str = "") -> None:
        self.report = report
        if report is not None and not message:
            w = report.witnesses[0]
            message = f"axiom {report.axiom} fails at node {w.node}, alternatives {w.alternatives}"
        super().__init__(message)


class EnvelopeError(ValueError):
    """Lower envelope exceeds the upper one: NT fails or the partial field is corrupt."""


@dataclass(frozen=True)
class BuildConfig:
    enumeration_order: tuple[int, ...] | None = None
    smoothing_rounds: int = 10
    strict_gap_fraction: float = 0.25
    urysohn_terms: int = 32
    max_alternatives: int = 64

    def __post_init__(self) -> None:
        if self.smoothing_rounds < 0:
            raise ValueError("smoothing_rounds must be >= 0")
        if not 0.0 < self.strict_gap_fraction < 0.5:
            raise ValueError("strict_gap_fraction must lie in (0, 0.5)")
        if self.urysohn_terms < 1:
            raise ValueError("urysohn_terms must be >= 1")
        if self.max_alternatives < 1:
            raise ValueError("max_alternatives must be >= 1")
        if self.enumeration_order is not None:
            object.__setattr__(self, "enumeration_order", tuple(int(i) for i in self.enumeration_order))

    def order(self, J: int) -> tuple[int, ...]:
        if J > self.max_alternatives:
            raise ValueError(f"{J} alternatives exceed the configured cap of {self.max_alternatives}")
        if self.enumeration_order is None:
            return tuple(range(J))
        if sorted(self.enumeration_order) != list(range(J)):
            raise ValueError(f"enumeration order {self.enumeration_order} is not a permutation of 0..{J - 1}")
        return self.enumeration_order


def _require(*reports: AxiomReport) -> None:
    for r in reports:
        if not r.passed:
            raise PreconditionError(r)


def urysohn_series(metric: NDArray[np.float64], zero_set: NDArray[np.bool_], terms: int) -> NDArray[np.float64]:
    """sum_{n=1..terms} 2^-n f_n with f_n = d(x,F) / (d(x,F) + d(x, X - G_n)),
    G_n = {x : d(x,F) < 1/n}.  f_n is 1 off F when X - G_n is empty.
    The result vanishes exactly on F and is positive elsewhere.
    """
    n = metric.shape[0]
    if not zero_set.any():
        d_f = np.full(n, np.inf)
    else:
        d_f = metric[:, zero_set].min(axis=1)
    total = np.zeros(n)
    for k in range(1, terms + 1):
        outside = ~(d_f < 1.0 / k)
        if not outside.any():
            fn = np.where(zero_set, 0.0, 1.0)
        else:
            d_out = metric[:, outside].min(axis=1)
            with np.errstate(invalid="ignore"):
                fn = np.where(np.isinf(d_f), 1.0, d_f / (d_f + d_out))
            fn[zero_set] = 0.0
        total += 2.0**-k * fn
    return total


def build_urysohn_pair(
    field: PreferenceField, space: SampledSpace, cfg: BuildConfig = BuildConfig()
) -> UtilityField:
    if field.n_alts != 2:
        raise ValueError(f"Urysohn construction needs exactly two alternatives, got {field.n_alts}")
    if space.metric is None or not space.metrizable:
        raise ValueError("Urysohn construction needs a metric space")
    _require(check_asymmetry(field), check_cd(field, space))
    a_below_b = field.strict[:, 0, 1]
    b_below_a = field.strict[:, 1, 0]
    f = urysohn_series(space.metric, ~a_below_b, cfg.urysohn_terms)
    g = urysohn_series(space.metric, ~b_below_a, cfg.urysohn_terms)
    ub = np.where(a_below_b, f, np.where(b_below_a, -g, 0.0))
    return UtilityField(np.vstack([np.zeros(field.n_nodes), ub]), "urysohn")


def compute_envelopes(
    j: int,
    prior: Sequence[int],
    values: NDArray[np.float64],
    field: PreferenceField,
) -> EnvelopePair:
    """Envelopes for alternative ``j`` from the rows ``values[k]`` of the prior alternatives.

    g(x) is the largest prior utility among alternatives weakly below j at x
    (or -inf), h(x) the smallest among those weakly above (or +inf).
    """
    n = field.n_nodes
    prior = list(prior)
    if not prior:
        return EnvelopePair(np.full(n, -np.inf), np.full(n, np.inf))
    P = np.asarray(values, dtype=float)[prior]  # (k, n)
    weak = field.weak()
    below = weak[:, prior, j].T  # k weakly below j
    above = weak[:, j, prior].T  # j weakly below k
    g = np.where(below, P, -np.inf).max(axis=0)
    h = np.where(above, P, np.inf).min(axis=0)
    env = EnvelopePair(g, h)
    bad = env.violations()
    if bad.size:
        raise EnvelopeError(
            f"lower envelope exceeds upper envelope for alternative {j} at nodes {bad[:10].tolist()}"
        )
    return env


def insert_between(env: EnvelopePair, space: SampledSpace, cfg: BuildConfig = BuildConfig()) -> NDArray[np.float64]:
    """Clamped midpoint followed by projected neighbourhood averaging.

    Strict nodes stay inside [g + d, h - d] with d = gamma * (h - g) after
    clamping the envelopes to [-M, M]; non-strict nodes are pinned to g = h.
    Averaging runs over each node's smallest non-singleton neighbourhood.
    """
    g, h = env.g, env.h
    if env.violations().size:
        raise EnvelopeError("envelope pair violates g <= h")
    finite = np.concatenate([g[np.isfinite(g)], h[np.isfinite(h)]])
    M = 1.0 + (np.abs(finite).max() if finite.size else 0.0)
    gt = np.maximum(g, -M)
    ht = np.minimum(h, M)
    strict = env.strict_mask
    delta = cfg.strict_gap_fraction * (ht - gt)
    lo = np.where(strict, gt + delta, gt)
    hi = np.where(strict, ht - delta, gt)
    f = np.clip((gt + ht) / 2.0, lo, hi)
    idx = space.padded_nontrivial
    counts = space.padded_nontrivial_counts
    real = np.arange(idx.shape[1])[None, :] < counts[:, None]
    for _ in range(cfg.smoothing_rounds):
        avg = np.where(real, f[idx], 0.0).sum(axis=1) / counts
        f = np.clip(avg, lo, hi)
    return f


@dataclass
class BuildTrace:
    """Envelopes and inserted rows recorded at each inductive step."""

    steps: list[tuple[int, tuple[int, ...], EnvelopePair, NDArray[np.float64]]] = field(default_factory=list)


def build_representation(
    field: PreferenceField,
    space: SampledSpace,
    cfg: BuildConfig = BuildConfig(),
    *,
    trace: BuildTrace | None = None,
    require_perfectly_normal: bool = True,
) -> UtilityField:
    if field.n_nodes != space.size:
        raise ValueError("preference field and space disagree on the node count")
    _require(check_asymmetry(field), check_negative_transitivity(field), check_cd(field, space))
    if require_perfectly_normal and not space.perfectly_normal:
        raise PreconditionError(None, f"space {space.name!r} is not flagged perfectly normal")
    order = cfg.order(field.n_alts)
    values = np.zeros((field.n_alts, field.n_nodes))
    done: list[int] = []
    for j in order:
        env = compute_envelopes(j, done, values, field)
        row = insert_between(env, space, cfg)
        values[j] = row
        if trace is not None:
            trace.steps.append((j, tuple(done), env, row.copy()))
        done.append(j)
    return UtilityField(values, "inductive")
