"""Complexity measures: CTM lookup, block decomposition (BDM), block entropy,
LZW code length and max-normalisation."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .core import BitGrid, BitString, format_bits
from .turing import CtmTable, object_sort_key

FALLBACK_POLICIES = ("error", "max_plus_one")


class MissingString(KeyError):
    pass


class EmptyString(ValueError):
    pass


class AllDropped(ValueError):
    pass


class GridTooSmall(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class NonPositiveMax(ValueError):
    pass


def grid_key(block: np.ndarray) -> str:
    r, c = block.shape
    return f"{r}x{c}:" + "".join("1" if v else "0" for v in block.ravel().tolist())


@dataclass
class CtmEstimator:
    """Coding-theorem lookup of ``-log2(count / total_halting)`` over a sealed table.

    The additive constant of the coding theorem is taken as 0. With a 1D table,
    grid blocks are scored in ``row-flatten`` mode: the sum of the CTM values of
    the block's rows. This is a degraded stand-in for a real 2D table and is
    reported as such.
    """

    table: CtmTable
    fallback_policy: str = "max_plus_one"
    _values: dict[str, float] = field(init=False, repr=False)
    _block_cache: dict[str, tuple[float, bool]] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.fallback_policy not in FALLBACK_POLICIES:
            raise ValueError(f"fallback_policy must be one of {FALLBACK_POLICIES}")
        if self.table.total_halting == 0:
            raise ValueError("table has no halting outputs")
        total = self.table.total_halting
        self._values = {k: -math.log2(c / total) for k, c in self.table.counts.items()}
        self.max_value = max(self._values.values())

    @property
    def grid_mode(self) -> str:
        return "direct" if self.table.dimensionality == 2 else "row-flatten"

    def lookup(self, key: str) -> tuple[float, bool]:
        """Value for a table key and whether the fallback was used."""
        try:
            return self._values[key], False
        except KeyError:
            if self.fallback_policy == "error":
                raise MissingString(key) from None
            return self.max_value + 1.0, True

    def block_value(self, block: np.ndarray) -> tuple[float, bool]:
        key = grid_key(block)
        hit = self._block_cache.get(key)
        if hit is not None:
            return hit
        if self.grid_mode == "direct":
            hit = self.lookup(key)
        else:
            parts = [self.lookup("".join("1" if v else "0" for v in row)) for row in block.tolist()]
            hit = (sum(p[0] for p in parts), any(p[1] for p in parts))
        self._block_cache[key] = hit
        return hit

    def metadata(self) -> dict:
        t = self.table
        return {
            "states": t.space.states,
            "cutoff": t.space.cutoff,
            "dimensionality": t.dimensionality,
            "protocol": t.protocol,
            "total_halting": t.total_halting,
            "fallback_policy": self.fallback_policy,
            "grid_mode": self.grid_mode,
        }


def ctm_value(est: CtmEstimator, s: BitString | str) -> float:
    """Estimated complexity in bits; raises MissingString under the ``error`` policy."""
    key = s if isinstance(s, str) else format_bits(s)
    if not key:
        raise EmptyString("CTM is undefined for the empty string")
    return est.lookup(key)[0]


@dataclass(frozen=True)
class BdmReport:
    value: float
    block_size: int
    block_census: tuple[tuple[str, int], ...]
    dropped_cells: int
    fallback_blocks: int
    mode: str
    fallback_policy: str

    @property
    def blocks(self) -> int:
        return sum(n for _, n in self.block_census)


def _combine(est: CtmEstimator, census: Mapping[str, int], values: Mapping[str, tuple[float, bool]]):
    # BDM = sum over distinct blocks of K(block) + log2(multiplicity)
    ordered = sorted(census.items(), key=lambda kv: object_sort_key(kv[0]))
    total = math.fsum(values[k][0] + math.log2(n) for k, n in ordered)
    fallbacks = sum(1 for k, _ in ordered if values[k][1])
    return total, tuple(ordered), fallbacks


def bdm_string(est: CtmEstimator, s: BitString | str, block_len: int) -> BdmReport:
    text = s if isinstance(s, str) else format_bits(s)
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    if not text:
        raise EmptyString("BDM of the empty string")
    n_blocks = len(text) // block_len
    if n_blocks == 0:
        raise AllDropped(f"length {len(text)} < block length {block_len}")
    census = Counter(text[i * block_len : (i + 1) * block_len] for i in range(n_blocks))
    values = {k: est.lookup(k) for k in census}
    value, ordered, fallbacks = _combine(est, census, values)
    return BdmReport(
        value=value,
        block_size=block_len,
        block_census=ordered,
        dropped_cells=len(text) - n_blocks * block_len,
        fallback_blocks=fallbacks,
        mode="1d",
        fallback_policy=est.fallback_policy,
    )


def grid_blocks(g: BitGrid, d: int) -> np.ndarray:
    """Non-overlapping d x d blocks anchored at (0, 0), shape (count, d, d), row-major order."""
    rb, cb = g.rows // d, g.cols // d
    cells = g.cells[: rb * d, : cb * d]
    return cells.reshape(rb, d, cb, d).swapaxes(1, 2).reshape(rb * cb, d, d)


def bdm_grid(est: CtmEstimator, g: BitGrid, d: int = 4) -> BdmReport:
    if d < 1:
        raise ValueError("d must be >= 1")
    if g.rows < d or g.cols < d:
        raise GridTooSmall(f"{g.rows}x{g.cols} grid cannot hold a {d}x{d} block")
    blocks = grid_blocks(g, d)
    uniq, inverse, mult = np.unique(blocks.reshape(len(blocks), -1), axis=0, return_inverse=True, return_counts=True)
    census: dict[str, int] = {}
    values: dict[str, tuple[float, bool]] = {}
    for row, n in zip(uniq, mult):
        block = row.reshape(d, d)
        key = grid_key(block)
        census[key] = int(n)
        values[key] = est.block_value(block)
    value, ordered, fallbacks = _combine(est, census, values)
    covered = (g.rows // d) * (g.cols // d) * d * d
    return BdmReport(
        value=value,
        block_size=d,
        block_census=ordered,
        dropped_cells=g.size - covered,
        fallback_blocks=fallbacks,
        mode=est.grid_mode,
        fallback_policy=est.fallback_policy,
    )


def shannon_block_entropy(s: BitString | str, block_len: int = 1) -> float:
    """Empirical entropy (bits per block) of the non-overlapping blocks of ``s``."""
    text = s if isinstance(s, str) else format_bits(s)
    if block_len < 1:
        raise ValueError("block_len must be >= 1")
    n = len(text) // block_len
    if n == 0:
        raise AllDropped(f"length {len(text)} < block length {block_len}")
    counts = Counter(text[i * block_len : (i + 1) * block_len] for i in range(n))
    h = -math.fsum((c / n) * math.log2(c / n) for c in counts.values())
    return h if h > 0 else 0.0


class LzwResult(NamedTuple):
    codes: list[int]
    bit_length: int


def lzw_compress(s: BitString | str) -> LzwResult:
    """Binary-alphabet LZW with a growing code width.

    Each code costs ``max(1, ceil(log2(size)))`` bits, where ``size`` is the
    dictionary size when the code is emitted (before the entry it triggers).
    """
    text = s if isinstance(s, str) else format_bits(s)
    dictionary = {"0": 0, "1": 1}
    codes: list[int] = []
    bits = 0
    w = ""

    def emit(phrase: str) -> None:
        nonlocal bits
        codes.append(dictionary[phrase])
        bits += max(1, math.ceil(math.log2(len(dictionary))))

    for k in text:
        if k not in "01":
            raise ValueError(f"non-binary symbol {k!r}")
        wk = w + k
        if wk in dictionary:
            w = wk
        else:
            emit(w)
            dictionary[wk] = len(dictionary)
            w = k
    if w:
        emit(w)
    return LzwResult(codes, bits)


def normalize_scores(scores: Mapping) -> dict:
    """Divide every score by the maximum."""
    if not scores:
        raise EmptyInput("no scores to normalise")
    top = max(scores.values())
    if not top > 0:
        raise NonPositiveMax(f"maximum score {top} is not positive")
    return {k: v / top for k, v in scores.items()}
