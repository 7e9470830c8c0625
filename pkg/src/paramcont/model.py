"""Domain types shared by every module.

A parameter space is sampled: a finite list of nodes, each with a nested
list of basic neighbourhoods (outermost first).  Preferences, utilities and
correspondences are all indexed by node position, and node ids are required
to coincide with positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

Provenance = Literal["urysohn", "inductive", "external"]

EXTERNAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AlternativeSet:
    """A finite truncation of a countable set of alternatives.

    ``embedding`` optionally places each alternative in Z^d_+ (commodity
    bundles); it is required by the budget machinery.
    """

    labels: tuple[str, ...]
    embedding: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if not self.labels:
            raise ValueError("alternative set must be nonempty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("alternative labels must be pairwise distinct")
        if self.embedding is not None:
            emb = np.asarray(self.embedding, dtype=np.int64)
            if emb.ndim != 2 or emb.shape[0] != len(self.labels):
                raise ValueError("embedding must have one vector per alternative")
            if (emb < 0).any():
                raise ValueError("embedding vectors must be componentwise >= 0")
            if len({tuple(v) for v in emb.tolist()}) != len(emb):
                raise ValueError("embedding vectors must be pairwise distinct")
            emb.setflags(write=False)
            object.__setattr__(self, "embedding", emb)

    @property
    def count(self) -> int:
        return len(self.labels)

    @classmethod
    def numbered(cls, count: int) -> AlternativeSet:
        return cls(tuple(f"a{i}" for i in range(count)))

    @classmethod
    def lattice(cls, dim: int, cap: int) -> AlternativeSet:
        """All bundles of Z^dim_+ with every coordinate at most ``cap``."""
        pts = np.array(np.meshgrid(*[np.arange(cap + 1)] * dim, indexing="ij"))
        emb = pts.reshape(dim, -1).T
        # order by total size, then lexicographically, so the zero bundle is first
        order = sorted(range(len(emb)), key=lambda i: (int(emb[i].sum()), tuple(emb[i])))
        emb = emb[order]
        labels = tuple("(" + ",".join(str(int(c)) for c in v) + ")" for v in emb)
        return cls(labels, emb)


@dataclass(frozen=True)
class Node:
    id: int
    coords: tuple[float, ...]
    neighborhoods: tuple[frozenset[int], ...]


@dataclass(frozen=True, eq=False)
class SampledSpace:
    nodes: tuple[Node, ...]
    metric: NDArray[np.float64] | None = None
    metrizable: bool = False
    perfectly_normal: bool = False
    name: str = ""

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @cached_property
    def depth(self) -> int:
        return max(len(n.neighborhoods) for n in self.nodes)

    def neighborhood(self, node: int, depth: int) -> frozenset[int]:
        """Neighbourhood at list position ``depth``; short lists repeat their innermost set."""
        nbhds = self.nodes[node].neighborhoods
        return nbhds[min(depth, len(nbhds) - 1)]

    def innermost(self, node: int) -> frozenset[int]:
        return self.nodes[node].neighborhoods[-1]

    def innermost_nontrivial(self, node: int) -> frozenset[int]:
        """Smallest declared neighbourhood that contains a node other than ``node``.

        Falls back to the (singleton) innermost set for isolated nodes.
        """
        for nb in reversed(self.nodes[node].neighborhoods):
            if len(nb) > 1:
                return nb
        return self.innermost(node)

    @cached_property
    def padded(self) -> tuple[NDArray[np.intp], ...]:
        """Per depth, an (n, w) index array of neighbourhood members padded with the node itself."""
        out = []
        for k in range(self.depth):
            out.append(_pad([sorted(self.neighborhood(i, k)) for i in range(self.size)]))
        return tuple(out)

    @cached_property
    def padded_nontrivial(self) -> NDArray[np.intp]:
        return _pad([sorted(self.innermost_nontrivial(i)) for i in range(self.size)])

    @cached_property
    def padded_nontrivial_counts(self) -> NDArray[np.float64]:
        return np.array([len(self.innermost_nontrivial(i)) for i in range(self.size)], dtype=float)

    def coords_array(self) -> NDArray[np.float64]:
        return np.array([n.coords for n in self.nodes], dtype=float)


def _pad(rows: list[list[int]]) -> NDArray[np.intp]:
    width = max(len(r) for r in rows)
    arr = np.empty((len(rows), width), dtype=np.intp)
    for i, r in enumerate(rows):
        arr[i, : len(r)] = r
        # pad with the row's first member; every neighbourhood contains its own node
        arr[i, len(r):] = r[0] if r else i
    return arr


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_space(space: SampledSpace, tol: float = 1e-12) -> ValidationReport:
    """List every violated space invariant; an empty report means the space is valid."""
    report = ValidationReport()
    v = report.violations
    n = space.size
    if n == 0:
        v.append("space has no nodes")
        return report
    for pos, node in enumerate(space.nodes):
        if node.id != pos:
            v.append(f"node at position {pos} has id {node.id} (ids must be zero-based positions)")
    for node in space.nodes:
        if not node.neighborhoods:
            v.append(f"node {node.id} has no neighborhoods")
            continue
        for k, nb in enumerate(node.neighborhoods):
            if node.id not in nb:
                v.append(f"node {node.id} missing from own neighborhood (depth {k})")
            bad = sorted(i for i in nb if not 0 <= i < n)
            if bad:
                v.append(f"node {node.id} neighborhood {k} references unknown nodes {bad}")
        for k in range(1, len(node.neighborhoods)):
            if not node.neighborhoods[k] <= node.neighborhoods[k - 1]:
                v.append(f"node {node.id} neighborhoods {k - 1},{k} not nested")
    if space.metrizable and space.metric is None:
        v.append("metrizable flag set but metric absent")
    if space.metric is not None:
        d = np.asarray(space.metric, dtype=float)
        if d.shape != (n, n):
            v.append(f"metric has shape {d.shape}, expected {(n, n)}")
            return report
        for i in np.flatnonzero(np.abs(np.diag(d)) > tol):
            v.append(f"metric d({i},{i}) != 0")
        asym = np.argwhere(np.abs(d - d.T) > tol)
        for i, j in asym[asym[:, 0] < asym[:, 1]]:
            v.append(f"metric not symmetric at ({i},{j})")
        off = ~np.eye(n, dtype=bool)
        for i, j in np.argwhere((d <= 0) & off):
            if i < j:
                v.append(f"metric d({i},{j}) not positive")
        # d[i,k] <= d[i,j] + d[j,k] on every sampled triple
        seen = set()
        for j in range(n):
            via = d[:, j, None] + d[None, j, :]  # (i, k)
            for i, k in np.argwhere(d > via + tol * (1.0 + via)):
                seen.add((min(i, k), j, max(i, k)))
        for key in sorted(seen):
            v.append(f"triangle inequality ({key[0]},{key[1]},{key[2]})")
    return report


@dataclass(frozen=True, eq=False)
class PreferenceField:
    """Per-node strict relations: ``strict[x, a, b]`` means a is strictly worse than b at x."""

    strict: NDArray[np.bool_]
    alternatives: AlternativeSet
    space_name: str = ""

    def __post_init__(self) -> None:
        s = np.asarray(self.strict, dtype=bool)
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise ValueError("strict relation must have shape (nodes, J, J)")
        if s.shape[1] != self.alternatives.count:
            raise ValueError("strict relation does not match the alternative count")
        if np.diagonal(s, axis1=1, axis2=2).any():
            raise ValueError("strict relation contains a reflexive pair (a,a)")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "strict", s)

    @property
    def n_nodes(self) -> int:
        return self.strict.shape[0]

    @property
    def n_alts(self) -> int:
        return self.strict.shape[1]

    @classmethod
    def from_pairs(
        cls,
        n_nodes: int,
        alternatives: AlternativeSet | int,
        pairs: Mapping[int, Iterable[tuple[int, int]]],
        space_name: str = "",
    ) -> PreferenceField:
        if isinstance(alternatives, int):
            alternatives = AlternativeSet.numbered(alternatives)
        s = np.zeros((n_nodes, alternatives.count, alternatives.count), dtype=bool)
        for x, ps in pairs.items():
            for a, b in ps:
                s[int(x), int(a), int(b)] = True
        return cls(s, alternatives, space_name)

    @classmethod
    def from_utility(
        cls,
        values: NDArray[np.float64],
        alternatives: AlternativeSet | None = None,
        tol: float = 0.0,
        space_name: str = "",
    ) -> PreferenceField:
        """Relation induced by a (J, n) table: a below b iff U(b,x) - U(a,x) > tol."""
        u = np.asarray(values, dtype=float)
        if alternatives is None:
            alternatives = AlternativeSet.numbered(u.shape[0])
        diff = u.T[:, None, :] - u.T[:, :, None]  # [x, a, b] = U(b,x) - U(a,x)
        return cls(diff > tol, alternatives, space_name)

    def pairs(self, node: int) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in np.argwhere(self.strict[node])]

    def indifferent(self) -> NDArray[np.bool_]:
        return ~self.strict & ~self.strict.transpose(0, 2, 1)

    def weak(self) -> NDArray[np.bool_]:
        """``weak[x, a, b]``: a is weakly worse than b at x."""
        return self.strict | self.indifferent()


def derived_relations(
    field: PreferenceField, node: int
) -> tuple[set[tuple[int, int]], set[frozenset[int]], set[tuple[int, int]]]:
    """Strict, indifference and weak relations at one node.

    Indifference is returned as unordered pairs and includes the reflexive
    singletons ``{a}``; weak preference is returned as ordered pairs.
    """
    if not 0 <= node < field.n_nodes:
        raise KeyError(f"unknown node id {node}")
    strict = set(field.pairs(node))
    J = field.n_alts
    indiff: set[frozenset[int]] = set()
    for a in range(J):
        for b in range(a, J):
            if (a, b) not in strict and (b, a) not in strict:
                indiff.add(frozenset((a, b)))
    weak = set(strict)
    for p in indiff:
        a, b = min(p), max(p)
        weak.add((a, b))
        weak.add((b, a))
    return strict, indiff, weak


@dataclass(frozen=True, eq=False)
class UtilityField:
    """Table ``values[a, x]``; ``tolerance`` is the tie tolerance used when comparing values."""

    values: NDArray[np.float64]
    provenance: Provenance = "external"
    tolerance: float = 0.0

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("utility table must be two-dimensional (alternatives, nodes)")
        if not np.isfinite(v).all():
            raise ValueError("utility values must be finite")
        if self.provenance not in ("urysohn", "inductive", "external"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_alts(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, order=False)
class ExtReal:
    """Extended real; the envelope code stores these as floats with +-inf."""

    tag: Literal["neg_inf", "finite", "pos_inf"]
    value: float | None = None

    def __post_init__(self) -> None:
        if (self.tag == "finite") != (self.value is not None):
            raise ValueError("value is present iff tag is finite")
        if self.value is not None and not math.isfinite(self.value):
            raise ValueError("finite ExtReal needs a finite value")

    @classmethod
    def of(cls, x: float) -> ExtReal:
        if x == math.inf:
            return cls("pos_inf")
        if x == -math.inf:
            return cls("neg_inf")
        return cls("finite", float(x))

    def __float__(self) -> float:
        if self.tag == "pos_inf":
            return math.inf
        if self.tag == "neg_inf":
            return -math.inf
        return float(self.value)  # type: ignore[arg-type]

    def __lt__(self, other: ExtReal) -> bool:
        return float(self) < float(other)

    def __le__(self, other: ExtReal) -> bool:
        return float(self) <= float(other)

    def to_json(self) -> float | str:
        if self.tag == "finite":
            return self.value  # type: ignore[return-value]
        return "+inf" if self.tag == "pos_inf" else "-inf"


@dataclass(frozen=True, eq=False)
class EnvelopePair:
    """Lower/upper envelopes per node, stored as floats where +-inf are the fictional alternatives."""

    g: NDArray[np.float64]
    h: NDArray[np.float64]

    def __post_init__(self) -> None:
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if g.shape != h.shape:
            raise ValueError("envelopes must have matching shapes")
        if np.isnan(g).any() or np.isnan(h).any():
            raise ValueError("envelopes must not contain NaN")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def strict_mask(self) -> NDArray[np.bool_]:
        return self.g < self.h

    def violations(self) -> NDArray[np.intp]:
        """Nodes where g > h."""
        return np.flatnonzero(self.g > self.h)

    def g_ext(self, node: int) -> ExtReal:
        return ExtReal.of(self.g[node])

    def h_ext(self, node: int) -> ExtReal:
        return ExtReal.of(self.h[node])


@dataclass(frozen=True)
class Correspondence:
    sets: tuple[frozenset[int], ...]
    space_name: str = ""

    def __post_init__(self) -> None:
        sets = tuple(frozenset(int(a) for a in s) for s in self.sets)
        for x, s in enumerate(sets):
            if not s:
                raise ValueError(f"correspondence is empty at node {x}")
        object.__setattr__(self, "sets", sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, node: int) -> frozenset[int]:
        return self.sets[node]

    @classmethod
    def constant(cls, n_nodes: int, values: Sequence[int]) -> Correspondence:
        return cls(tuple(frozenset(values) for _ in range(n_nodes)))
