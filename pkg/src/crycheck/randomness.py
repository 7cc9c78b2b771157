"""A short-input subset of the NIST SP 800-22 randomness battery.

Logged crypto values (keys, IVs) are 128-512 bits, so only the tests
that stay meaningful at those lengths are included: frequency (monobit),
block frequency, runs, longest run of ones, and cumulative sums. Each
test returns a tri-state outcome: Pass(p), Fail(p), or Skipped(reason)
when the input is too short for the test to apply.

The special functions needed for the p-values (erfc, the regularized
upper incomplete gamma function, the normal CDF) come from the stdlib
plus a local series/continued-fraction implementation of Q(a, x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_ALPHA = 0.01

#: Per-test minimum input lengths, in bits.
MIN_BITS = {
    "monobit": 100,
    "block_frequency": 100,
    "runs": 100,
    "longest_run": 128,
    "cumulative_sums": 100,
}


@dataclass(frozen=True)
class BitSequence:
    """An ordered bit sequence, built from bytes MSB-first."""

    bits: tuple[int, ...]

    @staticmethod
    def from_bytes(data: bytes) -> "BitSequence":
        bits = []
        for byte in data:
            for shift in range(7, -1, -1):
                bits.append((byte >> shift) & 1)
        return BitSequence(tuple(bits))

    @property
    def n(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class RandTestOutcome:
    """Pass(p) / Fail(p) / Skipped(reason)."""

    status: str  # "pass" | "fail" | "skipped"
    p: float | None = None
    reason: str | None = None

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    @property
    def skipped(self) -> bool:
        return self.status == "skipped"


def _outcome(p: float, alpha: float) -> RandTestOutcome:
    p = min(max(p, 0.0), 1.0)
    return RandTestOutcome("fail" if p < alpha else "pass", p=p)


def _skipped(reason: str) -> RandTestOutcome:
    return RandTestOutcome("skipped", reason=reason)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).

    Series expansion for x < a + 1, Lentz continued fraction otherwise;
    both iterated to ~1e-15 relative accuracy on the chi-square domain
    used here (a = k/2, x >= 0).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    lg = math.lgamma(a)
    if x < a + 1.0:
        # P(a, x) via series, Q = 1 - P.
        term = 1.0 / a
        total = term
        denom = a
        for _ in range(10_000):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        p = total * math.exp(-x + a * math.log(x) - lg)
        return 1.0 - p
    # Q(a, x) via modified Lentz continued fraction.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - lg)


def _phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def monobit(bits: BitSequence, alpha: float = DEFAULT_ALPHA) -> RandTestOutcome:
    n = bits.n
    if n < MIN_BITS["monobit"]:
        return _skipped(f"need >= {MIN_BITS['monobit']} bits, have {n}")
    s = sum(2 * b - 1 for b in bits.bits)
    stat = abs(s) / math.sqrt(n)
    return _outcome(math.erfc(stat / math.sqrt(2.0)), alpha)


def block_frequency(
    bits: BitSequence, m: int = 16, alpha: float = DEFAULT_ALPHA
) -> RandTestOutcome:
    if m < 1:
        raise ValueError("block length must be >= 1")
    n = bits.n
    if n < MIN_BITS["block_frequency"]:
        return _skipped(f"need >= {MIN_BITS['block_frequency']} bits, have {n}")
    num_blocks = n // m
    chi2 = 0.0
    for i in range(num_blocks):
        block = bits.bits[i * m:(i + 1) * m]
        pi = sum(block) / m
        chi2 += (pi - 0.5) ** 2
    chi2 *= 4.0 * m
    return _outcome(regularized_gamma_q(num_blocks / 2.0, chi2 / 2.0), alpha)


def runs(bits: BitSequence, alpha: float = DEFAULT_ALPHA) -> RandTestOutcome:
    n = bits.n
    if n < MIN_BITS["runs"]:
        return _skipped(f"need >= {MIN_BITS['runs']} bits, have {n}")
    pi = sum(bits.bits) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return _skipped("monobit precondition failed, runs test not applicable")
    v = 1 + sum(
        1 for i in range(n - 1) if bits.bits[i] != bits.bits[i + 1]
    )
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return _outcome(math.erfc(num / den), alpha)


# Longest-run category probabilities for M=8 blocks (valid for
# 128 <= n < 6272): categories longest <= 1, == 2, == 3, >= 4.
_LONGEST_RUN_M = 8
_LONGEST_RUN_K = 3
_LONGEST_RUN_PI = (0.2148, 0.3672, 0.2305, 0.1875)


def longest_run_of_ones(
    bits: BitSequence, alpha: float = DEFAULT_ALPHA
) -> RandTestOutcome:
    n = bits.n
    if n < MIN_BITS["longest_run"]:
        return _skipped(f"need >= {MIN_BITS['longest_run']} bits, have {n}")
    m = _LONGEST_RUN_M
    num_blocks = n // m
    counts = [0] * (_LONGEST_RUN_K + 1)
    for i in range(num_blocks):
        block = bits.bits[i * m:(i + 1) * m]
        longest = run = 0
        for b in block:
            run = run + 1 if b else 0
            longest = max(longest, run)
        category = min(max(longest - 1, 0), _LONGEST_RUN_K)
        counts[category] += 1
    chi2 = sum(
        (counts[i] - num_blocks * _LONGEST_RUN_PI[i]) ** 2
        / (num_blocks * _LONGEST_RUN_PI[i])
        for i in range(_LONGEST_RUN_K + 1)
    )
    return _outcome(regularized_gamma_q(_LONGEST_RUN_K / 2.0, chi2 / 2.0), alpha)


def cumulative_sums(
    bits: BitSequence, alpha: float = DEFAULT_ALPHA
) -> RandTestOutcome:
    """Forward-mode cumulative sums test."""
    n = bits.n
    if n < MIN_BITS["cumulative_sums"]:
        return _skipped(f"need >= {MIN_BITS['cumulative_sums']} bits, have {n}")
    s = 0
    z = 0
    for b in bits.bits:
        s += 2 * b - 1
        z = max(z, abs(s))
    if z == 0:
        return _outcome(1.0, alpha)
    sqrt_n = math.sqrt(n)
    term1 = sum(
        _phi((4 * k + 1) * z / sqrt_n) - _phi((4 * k - 1) * z / sqrt_n)
        for k in range(math.floor((-n / z + 1) / 4), math.floor((n / z - 1) / 4) + 1)
    )
    term2 = sum(
        _phi((4 * k + 3) * z / sqrt_n) - _phi((4 * k + 1) * z / sqrt_n)
        for k in range(math.floor((-n / z - 3) / 4), math.floor((n / z - 1) / 4) + 1)
    )
    return _outcome(1.0 - term1 + term2, alpha)


@dataclass(frozen=True)
class BatteryResult:
    outcomes: dict[str, RandTestOutcome]

    @property
    def any_fail(self) -> bool:
        return any(o.failed for o in self.outcomes.values())


def run_battery(value: bytes, alpha: float = DEFAULT_ALPHA) -> BatteryResult:
    """Run all five tests on the MSB-first bit expansion of value.

    Skipped outcomes never count as failures.
    """
    bits = BitSequence.from_bytes(value)
    return BatteryResult({
        "monobit": monobit(bits, alpha),
        "block_frequency": block_frequency(bits, alpha=alpha),
        "runs": runs(bits, alpha),
        "longest_run": longest_run_of_ones(bits, alpha),
        "cumulative_sums": cumulative_sums(bits, alpha),
    })
