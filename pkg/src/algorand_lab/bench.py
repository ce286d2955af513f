"""All-rules ECA comparison of complexity measures against Wolfram classes."""
from __future__ import annotations

import csv
import io as _io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from itertools import combinations
from typing import Mapping, Sequence

from .complexity import CtmEstimator, bdm_grid, lzw_compress, normalize_scores, shannon_block_entropy
from .core import BitString
from .eca import EcaRule, evolve, langton_lambda, random_initial, simplify, single_one

MEASURES = ("lambda", "simplified_bits", "lzw_bits", "entropy", "bdm")
COLUMNS = ("rule", "class", "lambda", "simplified_icons", "simplified_bits", "lzw_bits", "entropy", "bdm")
DEFAULT_CLASS_SOURCE = (
    "Wolfram classes of the 88 minimal ECA representatives (standard published "
    "classification), expanded to all 256 rules by reflection and colour complement"
)


class MissingRule(ValueError):
    def __init__(self, rule: int):
        super().__init__(f"class table has no entry for rule {rule}")
        self.rule = rule


class DuplicateRule(ValueError):
    def __init__(self, rule: int):
        super().__init__(f"rule {rule} listed twice")
        self.rule = rule


class BadClass(ValueError):
    pass


class UnknownMeasure(KeyError):
    pass


@dataclass(frozen=True)
class WolframClassTable:
    classes: Mapping[int, int]
    source: str

    def __getitem__(self, rule: int) -> int:
        return self.classes[rule]

    def __len__(self) -> int:
        return len(self.classes)

    def rules_in(self, cls: int) -> list[int]:
        return [r for r, c in sorted(self.classes.items()) if c == cls]


def load_class_table(source, provenance: str = "") -> WolframClassTable:
    """Read ``rule,class`` lines (an optional header is skipped)."""
    data = source if isinstance(source, (bytes, str)) else source.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    classes: dict[int, int] = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise BadClass(f"line {no}: expected 'rule,class', got {line!r}")
        if no == 1 and not parts[0].isdigit():
            continue
        try:
            rule, cls = int(parts[0]), int(parts[1])
        except ValueError:
            raise BadClass(f"line {no}: non-integer field in {line!r}") from None
        if not 0 <= rule <= 255:
            raise BadClass(f"line {no}: rule {rule} outside [0, 255]")
        if cls not in (1, 2, 3, 4):
            raise BadClass(f"line {no}: class {cls} not in 1..4")
        if rule in classes:
            raise DuplicateRule(rule)
        classes[rule] = cls
    for rule in range(256):
        if rule not in classes:
            raise MissingRule(rule)
    return WolframClassTable(classes, provenance or "unspecified")


def default_class_table() -> WolframClassTable:
    data = resources.files("algorand_lab").joinpath("data/wolfram_classes.csv").read_bytes()
    return load_class_table(data, DEFAULT_CLASS_SOURCE)


@dataclass(frozen=True)
class BenchConfig:
    width: int = 100
    steps: int = 100
    seed: int = 0
    initial: str = "seeded_random"  # or "single_one"
    d: int = 4
    entropy_block: int = 1
    workers: int = 1

    def initial_row(self) -> BitString:
        if self.initial == "seeded_random":
            return random_initial(self.width, self.seed)
        if self.initial == "single_one":
            return single_one(self.width)
        raise ValueError(f"unknown initial condition {self.initial!r}")


@dataclass(frozen=True)
class BenchmarkRow:
    rule: int
    wolfram_class: int
    lambda_: float
    simplified_icons: int
    simplified_bits: float
    lzw_bits: int
    entropy: float
    bdm: float

    def measure(self, name: str) -> float:
        if name not in MEASURES and name != "simplified_icons":
            raise UnknownMeasure(name)
        return self.lambda_ if name == "lambda" else getattr(self, name)

    def to_record(self) -> dict:
        return {
            "rule": self.rule,
            "class": self.wolfram_class,
            "lambda": self.lambda_,
            "simplified_icons": self.simplified_icons,
            "simplified_bits": self.simplified_bits,
            "lzw_bits": self.lzw_bits,
            "entropy": self.entropy,
            "bdm": self.bdm,
        }


def _evaluate(rule: int, cfg: BenchConfig, est: CtmEstimator, classes: WolframClassTable, initial: BitString):
    r = EcaRule(rule)
    grid = evolve(r, initial, cfg.steps)
    flat = grid.flatten()
    s = simplify(r)
    return BenchmarkRow(
        rule=rule,
        wolfram_class=classes[rule],
        lambda_=langton_lambda(r),
        simplified_icons=s.icon_count,
        simplified_bits=s.bits_upper_bound,
        lzw_bits=lzw_compress(flat).bit_length,
        entropy=shannon_block_entropy(flat, cfg.entropy_block),
        bdm=bdm_grid(est, grid, cfg.d).value,
    )


def run_benchmark(cfg: BenchConfig, est: CtmEstimator, classes: WolframClassTable) -> list[BenchmarkRow]:
    """One row per rule, all evolved from the same initial row; ordered by rule."""
    initial = cfg.initial_row()
    if cfg.workers <= 1:
        return [_evaluate(r, cfg, est, classes, initial) for r in range(256)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda r: _evaluate(r, cfg, est, classes, initial), range(256)))


def benchmark_records(rows: Sequence[BenchmarkRow]) -> list[dict]:
    """Export records: raw columns followed by ``<measure>_norm`` columns."""
    records = [row.to_record() for row in rows]
    for m in MEASURES:
        norm = normalize_scores({i: row.measure(m) for i, row in enumerate(rows)})
        for i, rec in enumerate(records):
            rec[f"{m}_norm"] = norm[i]
    return records


def read_benchmark_csv(data: bytes | str) -> list[BenchmarkRow]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = []
    for rec in csv.DictReader(_io.StringIO(text)):
        rows.append(
            BenchmarkRow(
                rule=int(rec["rule"]),
                wolfram_class=int(rec["class"]),
                lambda_=float(rec["lambda"]),
                simplified_icons=int(rec["simplified_icons"]),
                simplified_bits=float(rec["simplified_bits"]),
                lzw_bits=int(rec["lzw_bits"]),
                entropy=float(rec["entropy"]),
                bdm=float(rec["bdm"]),
            )
        )
    return rows


@dataclass(frozen=True)
class ClassSummary:
    mean: float
    min: float
    max: float
    count: int


@dataclass(frozen=True)
class ClassStats:
    measure: str
    summary: dict[int, ClassSummary]
    overlaps: dict[tuple[int, int], bool]

    def to_records(self) -> list[dict]:
        out = [{"measure": self.measure, "class": c, **asdict(s)} for c, s in sorted(self.summary.items())]
        return out


def class_stats(rows: Sequence[BenchmarkRow], measure: str) -> ClassStats:
    """Per-class mean/min/max of the max-normalised measure and pairwise range overlap."""
    if measure not in MEASURES:
        raise UnknownMeasure(measure)
    norm = normalize_scores({row.rule: row.measure(measure) for row in rows})
    by_class: dict[int, list[float]] = {}
    for row in rows:
        by_class.setdefault(row.wolfram_class, []).append(norm[row.rule])
    summary = {
        c: ClassSummary(sum(v) / len(v), min(v), max(v), len(v)) for c, v in sorted(by_class.items())
    }
    overlaps = {
        (a, b): summary[a].min <= summary[b].max and summary[b].min <= summary[a].max
        for a, b in combinations(sorted(summary), 2)
    }
    return ClassStats(measure, summary, overlaps)
