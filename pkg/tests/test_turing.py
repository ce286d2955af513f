import random
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algorand_lab.core import BitString
from algorand_lab.turing import (
    CtmTable,
    IndexOutOfRange,
    Overflow,
    OverlappingRanges,
    SpaceMismatch,
    TmSpace,
    TmSpec,
    Transition,
    build_ctm_table,
    complement_completed,
    complement_key,
    decode_machine,
    empty_table,
    encode_machine,
    machine_count,
    merge_ctm_tables,
    run_machine,
    sample_ctm_table,
)

from .oracles import enumerate_outputs

# Frozen after the (2,2) table matched the brute-force oracle below.
TOTAL_HALTING_22 = 3044
DISTINCT_OUTPUTS_22 = 17


def test_machine_count():
    assert machine_count(TmSpace(1, 2)) == 36
    assert machine_count(TmSpace(2, 7)) == 10_000
    assert machine_count(TmSpace(3, 22)) == 7_529_536


def test_machine_count_overflow():
    assert machine_count(TmSpace(6, 100)) == 26**12
    with pytest.raises(Overflow):
        machine_count(TmSpace(7, 100))


def test_decode_extremes():
    space = TmSpace(3, 22)
    first = decode_machine(space, 0)
    assert all(t == Transition(0, "L", 1) for t in first.entries)
    last = decode_machine(space, machine_count(space) - 1)
    assert all(t == Transition(1, "H", 0) for t in last.entries)


def test_decode_out_of_range():
    with pytest.raises(IndexOutOfRange):
        decode_machine(TmSpace(2, 7), 10_000)
    with pytest.raises(IndexOutOfRange):
        decode_machine(TmSpace(2, 7), -1)


def test_encode_decode_roundtrip_random():
    space = TmSpace(3, 22)
    rng = random.Random(0)
    for _ in range(1000):
        i = rng.randrange(machine_count(space))
        assert encode_machine(decode_machine(space, i)) == i


def test_decode_is_bijective_on_2_2():
    space = TmSpace(2, 7)
    specs = {decode_machine(space, i).entries for i in range(machine_count(space))}
    assert len(specs) == 10_000


def test_transition_order_within_entry():
    space = TmSpace(2, 7)
    # radix 10; entry (1,0) is the most significant digit
    digits = [decode_machine(space, d * 1000).entries[0] for d in range(10)]
    assert [str(t) for t in digits] == ["0L1", "0L2", "0R1", "0R2", "1L1", "1L2", "1R1", "1R2", "0H", "1H"]


def _spec(space, **entries):
    """Build a machine whose unspecified entries halt writing 0."""
    n = space.states
    table = [Transition(0, "H", 0)] * (2 * n)
    for key, t in entries.items():
        s, r = int(key[1]), int(key[2])
        table[2 * (s - 1) + r] = t
    return TmSpec(space, tuple(table))


def test_run_single_step_halt():
    space = TmSpace(1, 2)
    r = run_machine(_spec(space, e10=Transition(1, "H", 0)), 5)
    assert r.halted and r.steps == 1 and r.output == BitString((1,))


@pytest.mark.parametrize("cutoff", [1, 5, 50, 500])
def test_right_runner_never_halts(cutoff):
    space = TmSpace(1, cutoff)
    r = run_machine(_spec(space, e10=Transition(0, "R", 1)), cutoff)
    assert not r.halted and r.output is None


def test_step_champion_2_2():
    space = TmSpace(2, 50)
    results = [run_machine(decode_machine(space, i), 50) for i in range(machine_count(space))]
    halters = [r for r in results if r.halted]
    # several machines tie at 6 steps; the classic champion also leaves 4 ones
    best = max(halters, key=lambda r: (r.steps, r.ones))
    assert (best.steps, best.ones) == (6, 4)
    assert max(r.ones for r in halters) == 4
    champion = decode_machine(space, 7549)
    assert str(champion) == "1R2 1L2 1L1 1H"
    r = run_machine(champion, 7)
    assert r.halted and r.steps == 6 and str(r.output) == "1111"


def test_table_1_2_against_oracle():
    counts, machines = enumerate_outputs(1, 2)
    table = build_ctm_table(TmSpace(1, 2))
    assert machines == table.total_machines == 36
    assert table.total_halting == 12
    assert dict(table.counts) == dict(counts)


def test_table_2_2_against_oracle(table22):
    counts, machines = enumerate_outputs(2, 7)
    assert machines == 10_000
    assert dict(table22.counts) == dict(counts)
    assert table22.total_halting == sum(counts.values()) == TOTAL_HALTING_22
    assert len(table22) == DISTINCT_OUTPUTS_22


def test_python_and_compiled_engines_agree(table22):
    assert build_ctm_table(TmSpace(2, 7), engine="python") == table22
    space = TmSpace(3, 22)
    for lo in (0, 1_234_567, 7_000_000):
        rng = (lo, lo + 3000)
        assert build_ctm_table(space, rng, engine="python") == build_ctm_table(space, rng)


def test_run_machine_agrees_with_oracle_simulator():
    from .oracles import simulate

    space = TmSpace(3, 22)
    rng = random.Random(1)
    for _ in range(500):
        spec = decode_machine(space, rng.randrange(machine_count(space)))
        table = {}
        for (s, r), t in zip([(s, r) for s in (1, 2, 3) for r in (0, 1)], spec.entries):
            table[(s, r)] = (t.write, None, None) if t.halts else (t.write, -1 if t.move == "L" else 1, t.next_state)
        halted, steps, out = simulate(table, 22)
        got = run_machine(spec, 22)
        assert got.halted == halted
        if halted:
            assert got.steps == steps and str(got.output) == out and got.visited_span == len(out)


def test_cutoff_closure_2_2(table22):
    assert build_ctm_table(TmSpace(2, 17)).counts == table22.counts


def test_halting_fraction_strictly_between_0_and_1(table22):
    for t in (build_ctm_table(TmSpace(1, 2)), table22):
        assert 0 < t.total_halting / t.total_machines < 1


def test_empty_range():
    t = build_ctm_table(TmSpace(2, 7), (5, 5))
    assert t.total_machines == 0 and t.total_halting == 0 and len(t) == 0


def test_every_entry_is_reproducible(table22):
    space = TmSpace(2, 7)
    witnesses = {}
    for i in range(machine_count(space)):
        r = run_machine(decode_machine(space, i), 7)
        if r.halted:
            witnesses.setdefault(str(r.output), i)
    assert set(witnesses) == set(table22.counts)


def test_every_entry_is_reproducible_3_2(table32):
    # locate a chunk containing each output with the compiled engine, then find
    # and re-run a witness machine individually
    space = TmSpace(3, 22)
    step = 20_000
    first_chunk = {}
    for lo in range(0, machine_count(space), step):
        for key in build_ctm_table(space, (lo, lo + step) if lo + step <= machine_count(space) else (lo, machine_count(space))).counts:
            first_chunk.setdefault(key, lo)
    assert set(first_chunk) == set(table32.counts)
    for key, lo in first_chunk.items():
        for i in range(lo, min(lo + step, machine_count(space))):
            r = run_machine(decode_machine(space, i), 22)
            if r.halted and str(r.output) == key:
                break
        else:
            pytest.fail(f"no witness for {key}")


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_worker_count_does_not_change_table(table22, workers):
    assert build_ctm_table(TmSpace(2, 7), workers=workers, chunk=777) == table22


def test_merge_shards_equals_full(table22):
    space = TmSpace(2, 7)
    cuts = [0, 1, 999, 1000, 4321, 5000, 7777, 9998, 10_000]
    shards = [build_ctm_table(space, (a, b)) for a, b in zip(cuts, cuts[1:])]
    assert len(shards) == 8
    merged = shards[0]
    for s in shards[1:]:
        merged = merge_ctm_tables(merged, s)
    assert merged == table22
    assert merged.ranges == ((0, 10_000),)


def test_merge_identity_and_commutativity():
    space = TmSpace(2, 7)
    a = build_ctm_table(space, (0, 3000))
    b = build_ctm_table(space, (3000, 4500))
    assert merge_ctm_tables(a, empty_table(space)) == a
    assert merge_ctm_tables(a, b) == merge_ctm_tables(b, a)


@given(st.lists(st.integers(0, 10_000), min_size=2, max_size=6, unique=True))
@settings(max_examples=20, deadline=None)
def test_merge_associative_over_random_cuts(cuts):
    space = TmSpace(2, 7)
    cuts = sorted(cuts)
    parts = [build_ctm_table(space, (a, b)) for a, b in zip(cuts, cuts[1:])]
    left = parts[0]
    for p in parts[1:]:
        left = merge_ctm_tables(left, p)
    right = parts[-1]
    for p in reversed(parts[:-1]):
        right = merge_ctm_tables(p, right)
    assert left == right == build_ctm_table(space, (cuts[0], cuts[-1]))


def test_merge_errors():
    a = build_ctm_table(TmSpace(2, 7), (0, 100))
    with pytest.raises(SpaceMismatch):
        merge_ctm_tables(a, build_ctm_table(TmSpace(2, 8), (100, 200)))
    with pytest.raises(OverlappingRanges):
        merge_ctm_tables(a, build_ctm_table(TmSpace(2, 7), (50, 150)))


def test_table_invariants_enforced():
    space = TmSpace(1, 2)
    with pytest.raises(ValueError):
        CtmTable(space, {"1": 2}, total_machines=5, total_halting=3)
    with pytest.raises(ValueError):
        CtmTable(space, {"": 1}, total_machines=5, total_halting=1)
    t = build_ctm_table(space)
    with pytest.raises(TypeError):
        t.counts["1"] = 99


def test_sampled_table():
    space = TmSpace(4, 30)
    a = sample_ctm_table(space, 20_000, seed=5)
    assert a == sample_ctm_table(space, 20_000, seed=5)
    assert not a.exhaustive and a.seed == 5
    assert "censored" in a.protocol and "sampled" in a.protocol
    assert 0 < a.total_halting < a.total_machines == 20_000
    with pytest.raises(SpaceMismatch):
        merge_ctm_tables(a, sample_ctm_table(space, 10, seed=6))


def test_blank_one_runs_are_complements(table22):
    # the symmetry complement_completed relies on, checked by direct simulation
    space = TmSpace(2, 7)
    blank1 = {}
    for i in range(machine_count(space)):
        r = run_machine(decode_machine(space, i), 7, blank=1)
        if r.halted:
            blank1[str(r.output)] = blank1.get(str(r.output), 0) + 1
    assert blank1 == {complement_key(k): v for k, v in table22.counts.items()}
    done = complement_completed(table22)
    for k, v in done.counts.items():
        assert v == table22.counts.get(k, 0) + blank1.get(k, 0)
    assert done.total_machines == 20_000
    assert "blank=0+1" in done.protocol


def test_default_cutoffs():
    assert TmSpace.default(2).cutoff == 7
    assert TmSpace.default(3).cutoff == 22
    with pytest.raises(ValueError):
        TmSpace.default(4)
    assert not TmSpace(3, 22).censored
    assert TmSpace(3, 10).censored
    assert TmSpace(4, 500).censored
