"""Finite-resolution checks of asymmetry, negative transitivity, continuous
parameter dependence and joint closedness.

Every "there exists an open neighbourhood" quantifier ranges over the
declared nested neighbourhood list of the node, so a check passes at a node
as soon as one declared neighbourhood works.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from paramcont.model import PreferenceField, SampledSpace


@dataclass(frozen=True)
class Witness:
    node: int
    alternatives: tuple[int, ...] = ()
    depth: int | None = None
    other: int | None = None
    value: float | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"node": self.node, "alternatives": list(self.alternatives)}
        if self.depth is not None:
            out["depth"] = self.depth
        if self.other is not None:
            out["other"] = self.other
        if self.value is not None:
            out["value"] = self.value
        return out


@dataclass
class AxiomReport:
    axiom: str
    witnesses: list[Witness] = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_json(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "passed": self.passed,
            "note": self.note,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def _resolution_note(space: SampledSpace) -> str:
    return f"checked at resolution: {space.size} nodes, neighborhood depth {space.depth}"


def check_asymmetry(field: PreferenceField) -> AxiomReport:
    s = field.strict
    both = s & s.transpose(0, 2, 1)
    hits = np.argwhere(both)
    return AxiomReport(
        "Asy", [Witness(int(x), (int(a), int(b))) for x, a, b in hits if a < b]
    )


def check_negative_transitivity(field: PreferenceField) -> AxiomReport:
    """Witness (x, a, b, c): a below b at x, yet neither c below b nor a below c."""
    s = field.strict
    not_cb = ~s.transpose(0, 2, 1)[:, None, :, :]  # [x, ., b, c] = not s[x, c, b]
    not_ac = ~s[:, :, None, :]  # [x, a, ., c] = not s[x, a, c]
    bad = s[:, :, :, None] & not_cb & not_ac
    return AxiomReport(
        "NT", [Witness(int(x), (int(a), int(b), int(c))) for x, a, b, c in np.argwhere(bad)]
    )


def _held_on_some_neighborhood(rel: np.ndarray, space: SampledSpace) -> np.ndarray:
    """``ok[x, a, b]`` true iff rel[y, a, b] holds for every y of some declared neighbourhood of x."""
    ok = np.zeros_like(rel)
    for idx in space.padded:
        ok |= rel[idx].all(axis=1)
    return ok


def _persistence_witnesses(rel: np.ndarray, space: SampledSpace) -> list[Witness]:
    ok = _held_on_some_neighborhood(rel, space)
    witnesses = []
    inner_depth = space.depth - 1
    for x, a, b in np.argwhere(rel & ~ok):
        inner = sorted(space.innermost(int(x)))
        failing = next(y for y in inner if not rel[y, a, b])
        witnesses.append(Witness(int(x), (int(a), int(b)), depth=inner_depth, other=int(failing)))
    return witnesses


def _check_shapes(field: PreferenceField, space: SampledSpace) -> None:
    if field.n_nodes != space.size:
        raise ValueError(
            f"preference field has {field.n_nodes} nodes but space has {space.size}"
        )


def check_cd(field: PreferenceField, space: SampledSpace) -> AxiomReport:
    """Every strict comparison at x must persist on some declared neighbourhood of x.

    Witnesses carry the pair, the innermost depth and the first node of the
    innermost neighbourhood where the comparison is lost.
    """
    _check_shapes(field, space)
    return AxiomReport("CD", _persistence_witnesses(field.strict, space), _resolution_note(space))


def check_jc(field: PreferenceField, space: SampledSpace) -> AxiomReport:
    # a strictly below b is the complement of "b weakly below a"; closedness of the
    # weak graph then asks that strictness persist near x, which is the CD test
    _check_shapes(field, space)
    weak = field.weak()
    complement = ~weak.transpose(0, 2, 1)
    report = AxiomReport("JC", _persistence_witnesses(complement, space))
    report.note = (
        "finite alternative set: joint closedness coincides with CD; "
        + _resolution_note(space)
    )
    return report


def preference_correspondence_lhc(field: PreferenceField, space: SampledSpace) -> AxiomReport:
    """Lower hemicontinuity of x -> (strict relation at x), pair by pair.

    For each pair the set P = {x : a below b at x} is tested for openness:
    x in P is interior iff some declared neighbourhood of x lies inside P.
    The result must agree with :func:`check_cd` exactly.
    """
    _check_shapes(field, space)
    witnesses = []
    J = field.n_alts
    inner_depth = space.depth - 1
    for a in range(J):
        for b in range(J):
            P = {int(x) for x in np.flatnonzero(field.strict[:, a, b])}
            for x in sorted(P):
                nbhds = space.nodes[x].neighborhoods
                if any(nb <= P for nb in nbhds):
                    continue
                failing = min(y for y in space.innermost(x) if y not in P)
                witnesses.append(Witness(x, (a, b), depth=inner_depth, other=failing))
    witnesses.sort(key=lambda w: (w.node, w.alternatives))
    cd = check_cd(field, space)
    if sorted(cd.witnesses, key=lambda w: (w.node, w.alternatives)) != witnesses:
        raise AssertionError("lower hemicontinuity and CD reports disagree")
    return AxiomReport("LHC-pref", witnesses, "identical to CD for discrete alternatives")


def check_all(field: PreferenceField, space: SampledSpace, which: str = "all") -> list[AxiomReport]:
    checks = {
        "asy": lambda: check_asymmetry(field),
        "nt": lambda: check_negative_transitivity(field),
        "cd": lambda: check_cd(field, space),
        "jc": lambda: check_jc(field, space),
    }
    if which == "all":
        return [fn() for fn in checks.values()]
    return [checks[which]()]
