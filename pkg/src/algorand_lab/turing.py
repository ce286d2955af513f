"""Enumeration of (n-state, 2-symbol) Turing machines and CTM frequency tables.

Machines follow the Busy Beaver convention with halting folded into the
transition entries: each of the ``2n`` (state, read) entries is one of ``4n``
moving transitions or one of 2 halting writes, giving ``(4n + 2) ** (2n)``
machines. Every machine starts in state 1 on a blank (all-0) tape; its output
is the window of tape cells the head visited, leftmost to rightmost.

Machine ``index`` is a mixed-radix number with base ``4n + 2`` whose most
significant digit is the entry for (state 1, read 0), then (state 1, read 1),
(state 2, read 0) and so on. Digit ``t < 4n`` is the moving transition
``write = t // 2n, move = L if (t // n) % 2 == 0 else R, next = t % n + 1``;
digit ``4n`` writes 0 and halts, ``4n + 1`` writes 1 and halts.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence

import numba
import numpy as np

from .core import BitString

SCHEMA_VERSION = 1
INT64_MAX = 2**63 - 1
# Longest output the int64 key encoding can hold (sentinel bit + 62 cells).
MAX_KERNEL_CUTOFF = 60
DEFAULT_CUTOFFS = {1: 2, 2: 7, 3: 22}
# Busy Beaver step bounds S(n) for the 2-symbol spaces where they are known
# to certify halting; cutoff S(n) catches every halter.
BUSY_BEAVER_STEPS = {1: 1, 2: 6, 3: 21, 4: 107}
PROTOCOL = "rado-bb; halt-in-transition; blank=0; blank-tape; output=visited-window"
CHUNK = 1 << 20


class Overflow(OverflowError):
    pass


class IndexOutOfRange(IndexError):
    pass


class SpaceMismatch(ValueError):
    pass


class OverlappingRanges(ValueError):
    pass


@dataclass(frozen=True)
class TmSpace:
    states: int
    cutoff: int
    symbols: int = 2

    def __post_init__(self):
        if self.states < 1:
            raise ValueError("states must be >= 1")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if self.symbols != 2:
            raise ValueError("only 2-symbol machines are supported")

    @classmethod
    def default(cls, states: int, cutoff: int | None = None) -> TmSpace:
        if cutoff is None:
            if states not in DEFAULT_CUTOFFS:
                raise ValueError(f"({states},2) needs an explicit cutoff")
            cutoff = DEFAULT_CUTOFFS[states]
        return cls(states, cutoff)

    @property
    def radix(self) -> int:
        return 4 * self.states + 2

    @property
    def censored(self) -> bool:
        """True when the cutoff cannot certify that every halter was caught."""
        bound = BUSY_BEAVER_STEPS.get(self.states)
        return self.states >= 4 or bound is None or self.cutoff < bound


def machine_count(space: TmSpace) -> int:
    """``(4n + 2) ** (2n)``; raises Overflow past the int64 index range."""
    count = space.radix ** (2 * space.states)
    if count - 1 > INT64_MAX:
        raise Overflow(f"({space.states},2) has {count} machines, beyond int64 indexing")
    return count


class Transition(NamedTuple):
    write: int
    move: str  # "L", "R" or "H"
    next_state: int  # 0 when halting

    @property
    def halts(self) -> bool:
        return self.move == "H"

    def __str__(self) -> str:
        return f"{self.write}H" if self.halts else f"{self.write}{self.move}{self.next_state}"


def _digit_to_transition(d: int, n: int) -> Transition:
    if d >= 4 * n:
        return Transition(d - 4 * n, "H", 0)
    return Transition(d // (2 * n), "LR"[(d // n) % 2], d % n + 1)


def _transition_to_digit(t: Transition, n: int) -> int:
    if t.halts:
        return 4 * n + t.write
    return t.write * 2 * n + "LR".index(t.move) * n + (t.next_state - 1)


@dataclass(frozen=True)
class TmSpec:
    space: TmSpace
    entries: tuple[Transition, ...]

    def __post_init__(self):
        n = self.space.states
        if len(self.entries) != 2 * n:
            raise ValueError(f"expected {2 * n} entries, got {len(self.entries)}")
        for t in self.entries:
            if t.write not in (0, 1) or t.move not in ("L", "R", "H"):
                raise ValueError(f"bad transition {t!r}")
            if not t.halts and not 1 <= t.next_state <= n:
                raise ValueError(f"next state {t.next_state} outside [1, {n}]")

    def entry(self, state: int, read: int) -> Transition:
        return self.entries[2 * (state - 1) + read]

    @property
    def index(self) -> int:
        return encode_machine(self)

    def __str__(self) -> str:
        return " ".join(str(t) for t in self.entries)


def decode_machine(space: TmSpace, index: int) -> TmSpec:
    total = machine_count(space)
    if not 0 <= index < total:
        raise IndexOutOfRange(f"index {index} outside [0, {total})")
    n, base = space.states, space.radix
    digits = []
    for _ in range(2 * n):
        index, d = divmod(index, base)
        digits.append(d)
    digits.reverse()
    return TmSpec(space, tuple(_digit_to_transition(d, n) for d in digits))


def encode_machine(spec: TmSpec) -> int:
    n, base = spec.space.states, spec.space.radix
    index = 0
    for t in spec.entries:
        index = index * base + _transition_to_digit(t, n)
    return index


@dataclass(frozen=True)
class RunResult:
    halted: bool
    steps: int
    output: BitString | None
    visited_span: int

    @property
    def ones(self) -> int:
        return sum(self.output) if self.output is not None else 0


def run_machine(spec: TmSpec, cutoff: int, blank: int = 0) -> RunResult:
    """Simulate from a blank tape for at most ``cutoff`` steps.

    Executing a halting entry is the final step. Without a halt inside the
    cutoff the result has ``halted=False`` and no output.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    tape: dict[int, int] = {}
    head, state, lo, hi = 0, 1, 0, 0
    for step in range(1, cutoff + 1):
        t = spec.entries[2 * (state - 1) + tape.get(head, blank)]
        tape[head] = t.write
        if t.halts:
            out = BitString(tuple(tape.get(i, blank) for i in range(lo, hi + 1)))
            return RunResult(True, step, out, hi - lo + 1)
        head += 1 if t.move == "R" else -1
        lo, hi = min(lo, head), max(hi, head)
        state = t.next_state
    return RunResult(False, cutoff, None, hi - lo + 1)


@numba.njit(nogil=True, cache=True)
def _run_indices(n, indices, cutoff, out_keys):  # pragma: no cover - compiled
    base = 4 * n + 2
    n_entries = 2 * n
    tape = np.zeros(2 * cutoff + 3, dtype=np.uint8)
    digits = np.empty(n_entries, dtype=np.int64)
    found = 0
    for j in range(indices.shape[0]):
        x = indices[j]
        for e in range(n_entries - 1, -1, -1):
            digits[e] = x % base
            x //= base
        head = cutoff + 1
        left = head
        right = head
        state = 0
        halted = False
        for _ in range(cutoff):
            d = digits[2 * state + tape[head]]
            if d >= 4 * n:
                tape[head] = d - 4 * n
                halted = True
                break
            tape[head] = d // (2 * n)
            if (d // n) % 2 == 1:
                head += 1
                if head > right:
                    right = head
            else:
                head -= 1
                if head < left:
                    left = head
            state = d % n
        if halted:
            key = np.int64(1)
            for c in range(left, right + 1):
                key = (key << 1) | tape[c]
            out_keys[found] = key
            found += 1
        for c in range(left, right + 1):
            tape[c] = 0
    return found


def key_to_bits(key: int) -> str:
    """Decode a sentinel-prefixed integer key into its bit string."""
    return bin(key)[3:]


def _count_indices(space: TmSpace, indices: np.ndarray) -> dict[str, int]:
    out = np.empty(indices.shape[0], dtype=np.int64)
    found = _run_indices(space.states, indices, space.cutoff, out)
    keys, counts = np.unique(out[:found], return_counts=True)
    return {key_to_bits(int(k)): int(c) for k, c in zip(keys, counts)}


def _count_range_python(space: TmSpace, lo: int, hi: int) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in range(lo, hi):
        r = run_machine(decode_machine(space, i), space.cutoff)
        if r.halted:
            s = str(r.output)
            counts[s] = counts.get(s, 0) + 1
    return counts


def _normalize_ranges(ranges: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for lo, hi in sorted((int(a), int(b)) for a, b in ranges if b > a):
        if out and lo <= out[-1][1]:
            if lo < out[-1][1]:
                raise OverlappingRanges(f"range [{lo}, {hi}) overlaps [{out[-1][0]}, {out[-1][1]})")
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class CtmTable:
    """Halting-output frequencies of a machine space.

    Keys are bit strings for 1D tables and ``"RxC:bits"`` (row-major) for 2D
    tables. ``ranges`` lists the machine-index intervals that were run, which
    is what lets disjoint shards be merged safely.
    """

    space: TmSpace
    counts: Mapping[str, int]
    total_machines: int
    total_halting: int
    schema_version: int = SCHEMA_VERSION
    dimensionality: int = 1
    protocol: str = PROTOCOL
    exhaustive: bool = True
    seed: int | None = None
    ranges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        counts = dict(sorted(self.counts.items(), key=lambda kv: object_sort_key(kv[0])))
        if any(c < 1 for c in counts.values()):
            raise ValueError("counts must be positive")
        if "" in counts:
            raise ValueError("empty output key")
        if sum(counts.values()) != self.total_halting:
            raise ValueError("counts do not sum to total_halting")
        if self.total_halting > self.total_machines:
            raise ValueError("total_halting exceeds total_machines")
        object.__setattr__(self, "counts", MappingProxyType(counts))
        object.__setattr__(self, "ranges", _normalize_ranges(self.ranges))

    @property
    def halting_fraction(self) -> float:
        return self.total_halting / self.total_machines if self.total_machines else 0.0

    def __len__(self) -> int:
        return len(self.counts)


def object_sort_key(key: str):
    """Canonical order: 1D by (length, value); 2D by (rows, cols, row-major value)."""
    if ":" in key:
        dims, bits = key.split(":", 1)
        r, c = dims.split("x")
        return (int(r), int(c), bits)
    return (len(key), key)


def _chunks(lo: int, hi: int, size: int):
    for a in range(lo, hi, size):
        yield a, min(a + size, hi)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ALGORAND_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _sum_counts(parts) -> dict[str, int]:
    total: dict[str, int] = {}
    for part in parts:
        for k, v in part.items():
            total[k] = total.get(k, 0) + v
    return total


def build_ctm_table(
    space: TmSpace,
    index_range: tuple[int, int] | None = None,
    workers: int | None = None,
    engine: str = "auto",
    chunk: int = CHUNK,
) -> CtmTable:
    """Run every machine in ``index_range`` (default: whole space) and count outputs.

    ``workers`` threads each process disjoint chunks; counts are summed, so the
    sealed table does not depend on the worker count or chunking.
    """
    total = machine_count(space)
    lo, hi = (0, total) if index_range is None else (int(index_range[0]), int(index_range[1]))
    if not 0 <= lo <= hi <= total:
        raise IndexOutOfRange(f"range [{lo}, {hi}) not inside [0, {total})")
    if engine == "auto":
        engine = "numba" if space.cutoff <= MAX_KERNEL_CUTOFF else "python"
    if engine == "numba":
        if space.cutoff > MAX_KERNEL_CUTOFF:
            raise ValueError(f"numba engine supports cutoff <= {MAX_KERNEL_CUTOFF}")

        def job(bounds):
            return _count_indices(space, np.arange(bounds[0], bounds[1], dtype=np.int64))
    elif engine == "python":

        def job(bounds):
            return _count_range_python(space, *bounds)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    workers = workers or default_workers()
    pieces = list(_chunks(lo, hi, max(1, min(chunk, -(-(hi - lo) // workers) or 1))))
    if workers == 1:
        parts = [job(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, pieces))
    counts = _sum_counts(parts)
    return CtmTable(
        space=space,
        counts=counts,
        total_machines=hi - lo,
        total_halting=sum(counts.values()),
        protocol=_protocol(space),
        ranges=((lo, hi),),
    )


def _protocol(space: TmSpace, sampled: bool = False) -> str:
    tags = [PROTOCOL]
    if space.censored:
        tags.append("censored")
    if sampled:
        tags.append("sampled")
    return "; ".join(tags)


def sample_ctm_table(space: TmSpace, samples: int, seed: int) -> CtmTable:
    """Estimate frequencies from ``samples`` uniformly drawn machine indices."""
    total = machine_count(space)
    if space.cutoff > MAX_KERNEL_CUTOFF:
        raise ValueError(f"sampling supports cutoff <= {MAX_KERNEL_CUTOFF}")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, total, size=samples, dtype=np.int64)
    counts = _count_indices(space, indices)
    return CtmTable(
        space=space,
        counts=counts,
        total_machines=samples,
        total_halting=sum(counts.values()),
        protocol=_protocol(space, sampled=True),
        exhaustive=False,
        seed=seed,
    )


def merge_ctm_tables(a: CtmTable, b: CtmTable) -> CtmTable:
    """Pointwise sum of two shards of the same space over disjoint index ranges."""
    for attr in ("space", "schema_version", "dimensionality", "protocol", "exhaustive"):
        if getattr(a, attr) != getattr(b, attr):
            raise SpaceMismatch(f"tables differ in {attr}: {getattr(a, attr)!r} != {getattr(b, attr)!r}")
    if not (a.exhaustive and b.exhaustive):
        raise SpaceMismatch("sampled tables carry no index ranges and cannot be merged")
    ranges = _normalize_ranges(a.ranges + b.ranges)
    return replace(
        a,
        counts=_sum_counts([a.counts, b.counts]),
        total_machines=a.total_machines + b.total_machines,
        total_halting=a.total_halting + b.total_halting,
        ranges=ranges,
    )


def empty_table(space: TmSpace) -> CtmTable:
    return CtmTable(space=space, counts={}, total_machines=0, total_halting=0, protocol=_protocol(space))


def complement_key(key: str) -> str:
    head, sep, bits = key.rpartition(":")
    return head + sep + bits.translate(str.maketrans("01", "10"))


def complement_completed(table: CtmTable) -> CtmTable:
    """Add the outputs of every machine run on a blank-1 tape.

    Swapping the symbols a machine reads and writes is a bijection on the
    space, so the blank-1 run of one machine is the complement of the blank-0
    run of its partner: the completed counts are ``count(s) + count(~s)``.
    """
    if "blank=0+1" in table.protocol:
        raise ValueError("table is already complement-completed")
    counts = {k: v + table.counts.get(complement_key(k), 0) for k, v in table.counts.items()}
    for k, v in table.counts.items():
        counts.setdefault(complement_key(k), v)
    return replace(
        table,
        counts=counts,
        total_machines=2 * table.total_machines,
        total_halting=2 * table.total_halting,
        protocol=table.protocol.replace("blank=0", "blank=0+1"),
    )
