"""Flat CSV exports for external plotting."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from paramcont.model import SampledSpace, UtilityField
from paramcont.verify import ModulusReport, ObstructionReport


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(c)) if isinstance(c, (float, np.floating)) else c for c in row])
    return path


def _coord_header(space: SampledSpace) -> list[str]:
    dim = len(space.nodes[0].coords) if space.nodes else 0
    return [f"c{i}" for i in range(dim)]


def modulus_csv(report: ModulusReport, out_dir: str | Path) -> Path:
    """Columns node_id, alt, depth, oscillation."""
    J, n, D = report.node_table.shape

    def rows():
        for x in range(n):
            for a in range(J):
                for k in range(D):
                    yield x, a, k, float(report.node_table[a, x, k])

    return _write(Path(out_dir) / "modulus.csv", ["node_id", "alt", "depth", "oscillation"], rows())


def obstruction_csv(report: ObstructionReport, out_dir: str | Path) -> Path:
    rows = [(s["m"], float(s["gap"])) for s in report.series] or [(report.m, report.gap)]
    return _write(Path(out_dir) / "obstruction.csv", ["m", "gap"], rows)


def value_csv(V: NDArray[np.float64], space: SampledSpace, out_dir: str | Path) -> Path:
    rows = ((n.id, *n.coords, float(V[n.id])) for n in space.nodes)
    return _write(Path(out_dir) / "value.csv", ["node_id", *_coord_header(space), "V"], rows)


def utility_csv(U: UtilityField, space: SampledSpace, out_dir: str | Path) -> Path:
    """One row per (node, alternative): node_id, coords..., alt, U."""
    rows = (
        (n.id, *n.coords, a, float(U.values[a, n.id])) for n in space.nodes for a in range(U.n_alts)
    )
    return _write(Path(out_dir) / "utility.csv", ["node_id", *_coord_header(space), "alt", "U"], rows)
