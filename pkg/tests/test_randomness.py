import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crycheck.randomness import (
    BitSequence,
    block_frequency,
    cumulative_sums,
    longest_run_of_ones,
    monobit,
    regularized_gamma_q,
    run_battery,
    runs,
)

from sp80022_reference import reference_pvalues

FIXTURE = json.loads(
    (Path(__file__).parent / "fixtures" / "nist_pvalues.json").read_text()
)

TESTS = {
    "monobit": monobit,
    "block_frequency": block_frequency,
    "runs": runs,
    "longest_run": longest_run_of_ones,
    "cumulative_sums": cumulative_sums,
}


def test_fixture_is_large_enough():
    assert len(FIXTURE) >= 20


@pytest.mark.parametrize("name", sorted(FIXTURE))
def test_pvalues_match_reference_fixture(name):
    entry = FIXTURE[name]
    bits = BitSequence.from_bytes(bytes.fromhex(entry["hex"]))
    for test_name, fn in TESTS.items():
        expected = entry["p"][test_name]
        outcome = fn(bits)
        if expected is None:
            assert outcome.skipped, (name, test_name)
        else:
            assert outcome.p == pytest.approx(expected, abs=1e-6), (name, test_name)


@given(st.binary(min_size=13, max_size=64))
@settings(max_examples=200, deadline=None)
def test_pvalues_match_live_reference(data):
    ref = reference_pvalues(data)
    bits = BitSequence.from_bytes(data)
    for test_name, fn in TESTS.items():
        outcome = fn(bits)
        if ref[test_name] is None:
            assert outcome.skipped
        else:
            assert outcome.p == pytest.approx(ref[test_name], abs=1e-6)


def test_monobit_all_zero_fails():
    out = monobit(BitSequence.from_bytes(bytes(16)))
    assert out.failed and out.p < 1e-12


def test_monobit_alternating_passes_with_p_one():
    out = monobit(BitSequence.from_bytes(bytes([0b01010101] * 16)))
    assert out.status == "pass" and out.p == 1.0


def test_monobit_skips_below_100_bits():
    assert monobit(BitSequence.from_bytes(bytes(12))).skipped


def test_block_frequency_all_zero_fails():
    assert block_frequency(BitSequence.from_bytes(bytes(16))).failed


def test_block_frequency_alternating_passes():
    out = block_frequency(BitSequence.from_bytes(bytes([0b01010101] * 16)))
    assert out.status == "pass"


def test_runs_alternating_fails():
    out = runs(BitSequence.from_bytes(bytes([0b01010101] * 16)))
    assert out.failed and out.p < 0.01


def test_runs_all_zero_skipped_by_precondition():
    assert runs(BitSequence.from_bytes(bytes(16))).skipped


def test_longest_run_all_ones_fails():
    assert longest_run_of_ones(BitSequence.from_bytes(b"\xff" * 16)).failed


def test_longest_run_skips_below_128_bits():
    assert longest_run_of_ones(BitSequence.from_bytes(bytes(12))).skipped


def test_cusum_all_zero_fails():
    assert cumulative_sums(BitSequence.from_bytes(bytes(16))).failed


def test_cusum_alternating_passes():
    assert cumulative_sums(BitSequence.from_bytes(bytes([0b01010101] * 16))).status == "pass"


def test_battery_all_ff_any_fail():
    assert run_battery(b"\xff" * 16).any_fail


def test_battery_identical_128_bits_always_fails():
    for byte in range(256):
        assert run_battery(bytes([byte] * 16)).any_fail


def test_battery_short_value_all_skipped():
    result = run_battery(bytes(4))
    assert all(o.skipped for o in result.outcomes.values())
    assert not result.any_fail


def test_battery_random_fixture_passes():
    data = bytes.fromhex(FIXTURE["prand_2"]["hex"])
    assert not run_battery(data).any_fail


@given(st.binary(min_size=0, max_size=64))
@settings(max_examples=100, deadline=None)
def test_pvalues_in_unit_interval_and_fail_iff_below_alpha(data):
    result = run_battery(data, alpha=0.05)
    for outcome in result.outcomes.values():
        if outcome.skipped:
            assert outcome.p is None
        else:
            assert 0.0 <= outcome.p <= 1.0
            assert outcome.failed == (outcome.p < 0.05)


@given(st.binary(min_size=0, max_size=64))
@settings(max_examples=50, deadline=None)
def test_battery_deterministic(data):
    assert run_battery(data) == run_battery(data)


def test_skipped_monotone_in_length():
    for nbytes in range(0, 17):
        data = bytes.fromhex(FIXTURE["e_32B"]["hex"])[:nbytes]
        bits = BitSequence.from_bytes(data)
        for name, fn in TESTS.items():
            if fn(bits).skipped and name != "runs":
                shorter = BitSequence.from_bytes(data[: max(nbytes - 1, 0)])
                assert fn(shorter).skipped


def test_gamma_q_against_scipy():
    from scipy.special import gammaincc

    for a in (0.5, 1.0, 1.5, 4.0, 8.0, 32.0):
        for x in (0.0, 0.1, 0.9, 1.0, 3.7, 10.0, 50.0):
            assert regularized_gamma_q(a, x) == pytest.approx(
                float(gammaincc(a, x)), abs=1e-10
            )


def test_gamma_q_rejects_bad_domain():
    with pytest.raises(ValueError):
        regularized_gamma_q(0.0, 1.0)
    with pytest.raises(ValueError):
        regularized_gamma_q(1.0, -1.0)
