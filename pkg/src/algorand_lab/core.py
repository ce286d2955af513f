"""Binary objects (strings and grids) and their text/image serialization."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class InvalidCharacter(ValueError):
    """A bit-string text contained something other than '0' or '1'."""

    def __init__(self, position: int, char: str = ""):
        super().__init__(f"invalid character {char!r} at position {position}")
        self.position = position


class PbmError(ValueError):
    pass


@dataclass(frozen=True)
class BitString:
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("BitString elements must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_array(cls, arr: Iterable[int]) -> BitString:
        return cls(tuple(int(b) for b in arr))

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BitString(self.bits[i])
        return self.bits[i]

    def __str__(self) -> str:
        return format_bits(self)

    def __add__(self, other: BitString) -> BitString:
        return BitString(self.bits + other.bits)

    @property
    def length(self) -> int:
        return len(self.bits)

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)


class BitGrid:
    """Dense row-major binary matrix. Immutable: the backing array is read-only."""

    __slots__ = ("_cells",)

    def __init__(self, cells):
        arr = np.array(cells, dtype=np.uint8, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"BitGrid needs a non-empty 2D array, got shape {arr.shape}")
        if np.any(arr > 1):
            raise ValueError("BitGrid cells must be 0 or 1")
        arr.setflags(write=False)
        self._cells = arr

    @classmethod
    def from_rows(cls, rows: Iterable[BitString | str]) -> BitGrid:
        return cls([list(parse_bits(r) if isinstance(r, str) else r) for r in rows])

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def rows(self) -> int:
        return self._cells.shape[0]

    @property
    def cols(self) -> int:
        return self._cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._cells.shape

    @property
    def size(self) -> int:
        return self._cells.size

    def row(self, r: int) -> BitString:
        return BitString.from_array(self._cells[r])

    def flatten(self) -> BitString:
        return BitString.from_array(self._cells.ravel())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._cells, other._cells))

    def __hash__(self) -> int:
        return hash((self.shape, self._cells.tobytes()))

    def __repr__(self) -> str:
        body = "/".join("".join(map(str, r)) for r in self._cells.tolist())
        return f"BitGrid({self.rows}x{self.cols}: {body})"


def parse_bits(text: str) -> BitString:
    """Parse a '0'/'1' string. Raises InvalidCharacter at the first offending index."""
    for i, ch in enumerate(text):
        if ch not in "01":
            raise InvalidCharacter(i, ch)
    return BitString(tuple(1 if ch == "1" else 0 for ch in text))


def format_bits(s: BitString) -> str:
    return "".join("1" if b else "0" for b in s.bits)


def render_pbm(grid: BitGrid) -> bytes:
    """Serialize as plain PBM (P1); 1 is a black pixel."""
    lines = [f"P1\n{grid.cols} {grid.rows}\n"]
    for row in grid.cells.tolist():
        lines.append(" ".join(str(v) for v in row) + "\n")
    return "".join(lines).encode("ascii")


def parse_pbm(data: bytes | str) -> BitGrid:
    """Read a plain PBM (P1) image. Comments and free whitespace are accepted."""
    if isinstance(data, bytes):
        data = data.decode("ascii")
    text = re.sub(r"#[^\n]*", " ", data)
    tokens = text.split()
    if not tokens or tokens[0] != "P1":
        raise PbmError("not a P1 PBM image")
    try:
        cols, rows = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise PbmError("bad PBM header") from None
    # P1 allows pixels without separating whitespace
    pixels = "".join(tokens[3:])
    if len(pixels) != rows * cols or set(pixels) - {"0", "1"}:
        raise PbmError(f"expected {rows * cols} pixels, got {len(pixels)}")
    arr = np.frombuffer(pixels.encode("ascii"), dtype=np.uint8) - ord("0")
    return BitGrid(arr.reshape(rows, cols))


def parse_grid_text(text: str) -> BitGrid:
    """Grid from either a PBM image or one '0'/'1' row per line."""
    if text.lstrip().startswith("P1"):
        return parse_pbm(text)
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty grid")
    return BitGrid.from_rows(rows)
