"""Perturbation analysis of binary grids against BDM.

A perturbation's ``delta`` is ``BDM(G) - BDM(G')``. It is neutral when
``|delta| <= log2(|G|)`` (``|G|`` = number of cells), positive when the
perturbed grid is more complex by more than that, and negative when it is
simpler by more than that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexity import CtmEstimator, bdm_grid
from .core import BitGrid, BitString

NEUTRAL, POSITIVE, NEGATIVE = "neutral", "positive", "negative"


class OutOfBounds(IndexError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Perturbation:
    kind: str  # "bit_flip" or "row_replace"
    positions: tuple = ()
    replacement: BitString | None = None

    @classmethod
    def flip(cls, *cells: tuple[int, int]) -> Perturbation:
        return cls("bit_flip", tuple((int(r), int(c)) for r, c in cells))

    @classmethod
    def replace_row(cls, row: int, replacement: BitString) -> Perturbation:
        return cls("row_replace", (int(row),), replacement)

    def inverse(self, g: BitGrid) -> Perturbation:
        """The perturbation that undoes this one when applied to ``apply_perturbation(g, self)``."""
        if self.kind == "bit_flip":
            return self
        return Perturbation.replace_row(self.positions[0], g.row(self.positions[0]))


def apply_perturbation(g: BitGrid, p: Perturbation) -> BitGrid:
    """Return a perturbed copy of ``g``."""
    cells = g.cells.copy()
    if p.kind == "bit_flip":
        for r, c in p.positions:
            if not (0 <= r < g.rows and 0 <= c < g.cols):
                raise OutOfBounds(f"cell ({r}, {c}) outside {g.rows}x{g.cols} grid")
            cells[r, c] ^= 1
    elif p.kind == "row_replace":
        (r,) = p.positions
        if not 0 <= r < g.rows:
            raise OutOfBounds(f"row {r} outside grid with {g.rows} rows")
        if p.replacement is None or len(p.replacement) != g.cols:
            raise LengthMismatch(f"replacement row must have {g.cols} cells")
        cells[r] = p.replacement.to_array()
    else:
        raise ValueError(f"unknown perturbation kind {p.kind!r}")
    return BitGrid(cells)


def classify(delta: float, threshold: float) -> str:
    if abs(delta) <= threshold:
        return NEUTRAL
    return POSITIVE if delta < 0 else NEGATIVE


@dataclass(frozen=True)
class PerturbationReport:
    delta: float
    threshold: float
    classification: str
    estimator_metadata: dict
    label: str = ""

    def to_record(self) -> dict:
        rec = {
            "label": self.label,
            "delta": self.delta,
            "threshold": self.threshold,
            "classification": self.classification,
        }
        rec.update(self.estimator_metadata)
        return rec


def information_delta(est: CtmEstimator, g: BitGrid, p: Perturbation, d: int = 4, label: str = "") -> PerturbationReport:
    before = bdm_grid(est, g, d).value
    after = bdm_grid(est, apply_perturbation(g, p), d).value
    delta = before - after
    threshold = math.log2(g.size)
    meta = {"block_size": d, **est.metadata()}
    return PerturbationReport(delta, threshold, classify(delta, threshold), meta, label)


def _row_perturbations(g: BitGrid, mode: str, seed: int | None):
    if mode == "flip_all":
        for r in range(g.rows):
            yield Perturbation.replace_row(r, BitString.from_array(1 - g.cells[r]))
    elif mode == "replace_random":
        if seed is None:
            raise ValueError("replace_random needs a seed")
        rng = np.random.default_rng(seed)
        for r in range(g.rows):
            yield Perturbation.replace_row(r, BitString.from_array(rng.integers(0, 2, size=g.cols)))
    else:
        raise ValueError(f"unknown mode {mode!r}")


def row_impact_profile(
    est: CtmEstimator, g: BitGrid, d: int = 4, mode: str = "flip_all", seed: int | None = None
) -> list[float]:
    """``|BDM(g) - BDM(g with row r perturbed)|`` for every row, in row order.

    ``flip_all`` complements the row; ``replace_random`` draws one uniform
    random row per index from a generator seeded with ``seed``.
    """
    if g.rows < 2:
        raise ValueError("row impact needs at least 2 rows")
    base = bdm_grid(est, g, d).value
    return [abs(base - bdm_grid(est, apply_perturbation(g, p), d).value) for p in _row_perturbations(g, mode, seed)]


def order_by_impact(impacts: Sequence[float]) -> list[int]:
    """Row indices by impact, largest first; ties keep the lower index first."""
    return sorted(range(len(impacts)), key=lambda r: (-impacts[r], r))


def reconstruct_time_order(
    est: CtmEstimator, g: BitGrid, d: int = 4, mode: str = "flip_all", seed: int | None = None
) -> list[int]:
    """Hypothesised time order of the rows: the most disruptive row is taken as earliest."""
    return order_by_impact(row_impact_profile(est, g, d, mode, seed))
