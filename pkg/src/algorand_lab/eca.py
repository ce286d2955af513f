"""Elementary cellular automata: rules, evolution, Langton's lambda and
wildcard rule simplification.

Neighborhoods are indexed by their value ``4*left + 2*centre + right``; rule
``n`` maps neighborhood ``v`` to bit ``v`` of ``n`` (Wolfram numbering).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .core import BitGrid, BitString

WILD = 2
ICON_BITS = 3 * math.log2(3) + 1
NEIGHBORHOODS = tuple((v >> 2 & 1, v >> 1 & 1, v & 1) for v in range(8))

# Region-split interaction is our own choice; exported so callers can record it.
INTERACTION_MODEL = "region-split: cells < split use rule A, others rule B; cyclic"


class OutOfRange(ValueError):
    pass


class EmptyInitial(ValueError):
    pass


class SplitOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class EcaRule:
    number: int

    def __post_init__(self):
        if not isinstance(self.number, (int, np.integer)) or not 0 <= self.number <= 255:
            raise OutOfRange(f"ECA rule must be in [0, 255], got {self.number!r}")
        object.__setattr__(self, "number", int(self.number))

    @property
    def table(self) -> dict[tuple[int, int, int], int]:
        return {nb: self.output(*nb) for nb in NEIGHBORHOODS}

    def output(self, a: int, b: int, c: int) -> int:
        return (self.number >> (4 * a + 2 * b + c)) & 1

    def lookup(self) -> np.ndarray:
        """Outputs indexed by neighborhood value, as a uint8 array of length 8."""
        return np.array([(self.number >> v) & 1 for v in range(8)], dtype=np.uint8)

    def reflected(self) -> EcaRule:
        return EcaRule(sum(self.output(c, b, a) << (4 * a + 2 * b + c) for a, b, c in NEIGHBORHOODS))

    def complemented(self) -> EcaRule:
        return EcaRule(
            sum((1 - self.output(1 - a, 1 - b, 1 - c)) << (4 * a + 2 * b + c) for a, b, c in NEIGHBORHOODS)
        )


def rule_from_number(n: int) -> EcaRule:
    return EcaRule(n)


def _step(row: np.ndarray, tables: np.ndarray) -> np.ndarray:
    idx = (np.roll(row, 1) << 2) | (row << 1) | np.roll(row, -1)
    if tables.ndim == 1:
        return tables[idx]
    return tables[np.arange(row.size), idx]


def _run(tables: np.ndarray, initial: BitString, steps: int) -> BitGrid:
    if len(initial) == 0:
        raise EmptyInitial("initial condition must be non-empty")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    out = np.empty((steps + 1, len(initial)), dtype=np.uint8)
    out[0] = initial.to_array()
    for t in range(steps):
        out[t + 1] = _step(out[t], tables)
    return BitGrid(out)


def evolve(rule: EcaRule, initial: BitString, steps: int, boundary: str = "cyclic") -> BitGrid:
    """Space-time diagram with ``steps + 1`` rows; row 0 is ``initial``."""
    if boundary != "cyclic":
        raise ValueError(f"unsupported boundary {boundary!r}")
    return _run(rule.lookup(), initial, steps)


def interact(rule_a: EcaRule, rule_b: EcaRule, initial: BitString, steps: int, split: int) -> BitGrid:
    """Two rules sharing one lattice: cells ``< split`` follow ``rule_a``, the rest ``rule_b``.

    Neighborhoods read raw cell values across the region boundary; edges are cyclic.
    """
    width = len(initial)
    if not 0 <= split <= width:
        raise SplitOutOfRange(f"split {split} outside [0, {width}]")
    tables = np.where(np.arange(width)[:, None] < split, rule_a.lookup(), rule_b.lookup())
    return _run(tables.astype(np.uint8), initial, steps)


def single_one(width: int) -> BitString:
    bits = [0] * width
    bits[width // 2] = 1
    return BitString(tuple(bits))


def random_initial(width: int, seed: int) -> BitString:
    rng = np.random.default_rng(seed)
    return BitString.from_array(rng.integers(0, 2, size=width))


def langton_lambda(rule: EcaRule) -> float:
    """Fraction of neighborhoods mapped to 1."""
    return bin(rule.number).count("1") / 8


@dataclass(frozen=True, order=True)
class Icon:
    pattern: tuple[int, int, int]
    output: int

    def matches(self, nb) -> bool:
        return all(p == WILD or p == x for p, x in zip(self.pattern, nb))

    def matched(self) -> frozenset[int]:
        return frozenset(4 * a + 2 * b + c for a, b, c in NEIGHBORHOODS if self.matches((a, b, c)))

    @property
    def specified(self) -> int:
        return sum(p != WILD for p in self.pattern)

    def __str__(self) -> str:
        return "".join("*" if p == WILD else str(p) for p in self.pattern) + f"->{self.output}"


@dataclass(frozen=True)
class SimplifiedRule:
    rule: int
    icons: tuple[Icon, ...]

    @property
    def icon_count(self) -> int:
        return len(self.icons)

    @property
    def specified_cells(self) -> int:
        return sum(i.specified for i in self.icons)

    @property
    def bits_upper_bound(self) -> float:
        return simplified_bits(self)

    def side(self, output: int) -> tuple[Icon, ...]:
        return tuple(i for i in self.icons if i.output == output)

    def evaluate(self, a: int, b: int, c: int) -> int:
        hits = {i.output for i in self.icons if i.matches((a, b, c))}
        if len(hits) != 1:
            raise ValueError(f"icon set is ambiguous or incomplete at {a}{b}{c}")
        return hits.pop()


def _merge(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...] | None:
    diff = [i for i in range(3) if p[i] != q[i]]
    if len(diff) != 1 or WILD in (p[diff[0]], q[diff[0]]):
        return None
    out = list(p)
    out[diff[0]] = WILD
    return tuple(out)


def _prime_implicants(minterms: frozenset[int]) -> list[tuple[int, ...]]:
    # Quine-McCluskey over three variables
    layer = {NEIGHBORHOODS[v] for v in minterms}
    primes: set[tuple[int, ...]] = set()
    while layer:
        used: set[tuple[int, ...]] = set()
        nxt: set[tuple[int, ...]] = set()
        for p, q in combinations(sorted(layer), 2):
            m = _merge(p, q)
            if m is not None:
                nxt.add(m)
                used.update((p, q))
        primes |= layer - used
        layer = nxt
    return sorted(primes)


def _cover_key(patterns: tuple[tuple[int, ...], ...]):
    return (len(patterns), sum(x != WILD for p in patterns for x in p), patterns)


def _min_cover(minterms: frozenset[int]) -> tuple[tuple[int, ...], ...]:
    if not minterms:
        return ()
    primes = _prime_implicants(minterms)
    cover_of = {p: Icon(p, 0).matched() for p in primes}
    for k in range(1, len(primes) + 1):
        best = None
        for combo in combinations(primes, k):
            if frozenset().union(*(cover_of[p] for p in combo)) == minterms:
                key = _cover_key(combo)
                if best is None or key < best:
                    best = key
        if best is not None:
            return best[2]
    raise AssertionError("prime implicants always cover their minterms")


@lru_cache(maxsize=256)
def _simplify(number: int) -> SimplifiedRule:
    rule = EcaRule(number)
    icons: list[Icon] = []
    for out in (1, 0):
        minterms = frozenset(v for v in range(8) if rule.output(*NEIGHBORHOODS[v]) == out)
        icons.extend(Icon(p, out) for p in _min_cover(minterms))
    return SimplifiedRule(number, tuple(icons))


def simplify(rule: EcaRule) -> SimplifiedRule:
    """Minimum two-sided wildcard cover of the rule table.

    Each output colour is covered separately by icons over {0, 1, *} that never
    match a neighborhood of the opposite colour. Covers minimise icon count, then
    the number of non-wildcard cells, then the lexicographic order of the sorted
    patterns (0 < 1 < *). Output-1 icons are listed first.
    """
    return _simplify(rule.number)


def simplified_bits(s: SimplifiedRule) -> float:
    """Description length of the icon set: three trits and one output bit per icon."""
    return s.icon_count * ICON_BITS


def all_icons(output: int) -> list[Icon]:
    return [Icon(p, output) for p in product((0, 1, WILD), repeat=3)]
