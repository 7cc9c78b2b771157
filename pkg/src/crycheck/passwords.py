"""Password blacklist lookup and a zxcvbn-style 0-4 strength score.

The score is a bucket over an estimated guess count, obtained by
decomposing the password into pattern matches (dictionary words with
l33t and reversed variants, repeats, sequences, keyboard runs, dates,
brute-force filler) and taking the cheapest decomposition. It is a
simplified estimator, validated against a reference zxcvbn on a frozen
corpus, not a reimplementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

#: estimated_guesses -> score buckets.
SCORE_BUCKETS = (1e3, 1e6, 1e8, 1e10)

# Common l33t substitutions, decoded before dictionary lookup. Ambiguous
# characters list every candidate letter.
_L33T = {
    "@": "a", "4": "a", "8": "b", "(": "c", "3": "e", "6": "g", "9": "g",
    "!": "i", "0": "o", "$": "s", "5": "s", "+": "t", "7": "t",
    "%": "x", "2": "z",
}
_L33T_AMBIGUOUS = {"1": ("l", "i")}
_MAX_L33T_VARIANTS = 16

_QWERTY_ROWS = ("`1234567890-=", "qwertyuiop[]\\", "asdfghjkl;'", "zxcvbnm,./")


def _build_adjacency() -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {}
    for r, row in enumerate(_QWERTY_ROWS):
        for c, ch in enumerate(row):
            neighbors = adj.setdefault(ch, set())
            if c + 1 < len(row):
                neighbors.add(row[c + 1])
                adj.setdefault(row[c + 1], set()).add(ch)
            # keys on the next row sit roughly at c and c-1
            if r + 1 < len(_QWERTY_ROWS):
                below = _QWERTY_ROWS[r + 1]
                for cc in (c - 1, c):
                    if 0 <= cc < len(below):
                        neighbors.add(below[cc])
                        adj.setdefault(below[cc], set()).add(ch)
    return adj


_ADJACENT = _build_adjacency()


class FileUnreadable(Exception):
    pass


@dataclass(frozen=True)
class Blacklist:
    """Case-insensitive password blacklist."""

    entries: frozenset[str]
    source: str

    @property
    def size(self) -> int:
        return len(self.entries)

    def __contains__(self, password: str) -> bool:
        return password.lower() in self.entries


def load_blacklist(path: str) -> Blacklist:
    """Load one password per line; '#' comments ignored, case folded."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FileUnreadable(str(exc))
    entries = frozenset(
        line.strip().lower()
        for line in lines
        if line.strip() and not line.lstrip().startswith("#")
    )
    return Blacklist(entries=entries, source=path)


def _load_wordlist(name: str) -> dict[str, int]:
    """Bundled word list as word -> 1-based frequency rank."""
    text = resources.files("crycheck.data").joinpath(name).read_text("utf-8")
    ranks: dict[str, int] = {}
    for i, word in enumerate(text.splitlines(), start=1):
        word = word.strip().lower()
        if word and word not in ranks:
            ranks[word] = i
    return ranks


@lru_cache(maxsize=1)
def _dictionaries() -> dict[str, dict[str, int]]:
    return {
        "passwords": _load_wordlist("passwords.txt"),
        "english": _load_wordlist("english.txt"),
        "names": _load_wordlist("names.txt"),
    }


@lru_cache(maxsize=1)
def default_blacklist() -> Blacklist:
    return Blacklist(
        entries=frozenset(_dictionaries()["passwords"]),
        source="bundled:passwords.txt",
    )


def is_blacklisted(password: str, blacklist: Blacklist | None = None) -> bool:
    bl = blacklist if blacklist is not None else default_blacklist()
    return password in bl


@dataclass(frozen=True)
class PasswordScore:
    score: int
    estimated_guesses: float
    matched_patterns: tuple[tuple[str, str], ...]


def _uppercase_multiplier(token: str) -> float:
    uppers = sum(1 for c in token if c.isupper())
    if uppers == 0:
        return 1.0
    if token[:1].isupper() and uppers == 1:
        return 2.0
    if uppers == len([c for c in token if c.isalpha()]):
        return 2.0
    return float(2 ** min(uppers + 1, 10))


def _l33t_decodings(lowered: str) -> list[str]:
    variants = [""]
    for c in lowered:
        options = _L33T_AMBIGUOUS.get(c) or (_L33T.get(c, c),)
        variants = [v + o for v in variants for o in options]
        if len(variants) > _MAX_L33T_VARIANTS:
            variants = variants[:_MAX_L33T_VARIANTS]
    return [v for v in variants if v != lowered]


def _dictionary_guesses(token: str) -> tuple[float, str] | None:
    """Cheapest dictionary interpretation of token, if any."""
    lowered = token.lower()
    best: tuple[float, str] | None = None
    for dict_name, ranks in _dictionaries().items():
        candidates = [
            (lowered, 1.0, f"dictionary:{dict_name}"),
            (lowered[::-1], 2.0, f"reversed:{dict_name}"),
        ]
        candidates += [
            (decoded, 4.0, f"l33t:{dict_name}")
            for decoded in _l33t_decodings(lowered)
        ]
        for cand, penalty, kind in candidates:
            rank = ranks.get(cand)
            if rank is not None:
                guesses = rank * penalty * _uppercase_multiplier(token)
                if best is None or guesses < best[0]:
                    best = (guesses, kind)
    return best


def _repeat_guesses(token: str) -> tuple[float, str] | None:
    if len(token) < 2:
        return None
    for base_len in range(1, len(token) // 2 + 1):
        if len(token) % base_len:
            continue
        base = token[:base_len]
        if base * (len(token) // base_len) == token:
            reps = len(token) // base_len
            base_guesses = _match_guesses_single(base)
            return (max(base_guesses, 2.0) * reps, "repeat")
    return None


def _sequence_guesses(token: str) -> tuple[float, str] | None:
    if len(token) < 3:
        return None
    deltas = {ord(b) - ord(a) for a, b in zip(token, token[1:])}
    if len(deltas) != 1:
        return None
    delta = next(iter(deltas))
    if delta not in (1, -1):
        return None
    first = token[0]
    if first in "aA1":
        start = 4.0
    elif first.isdigit():
        start = 10.0
    else:
        start = 26.0
    guesses = start * len(token)
    if delta == -1:
        guesses *= 2
    return (guesses, "sequence")


def _keyboard_guesses(token: str) -> tuple[float, str] | None:
    if len(token) < 3:
        return None
    lowered = token.lower()
    for a, b in zip(lowered, lowered[1:]):
        if b not in _ADJACENT.get(a, ()):
            return None
    # ~34 starting keys, ~4 average continuations per key
    return (34.0 * (4.0 ** (len(token) - 1)), "keyboard")


_REFERENCE_YEAR = 2017
_MIN_YEAR_SPACE = 20


def _date_guesses(token: str) -> tuple[float, str] | None:
    if not token.isdigit() or not 4 <= len(token) <= 8:
        return None
    if len(token) == 4:
        year = int(token)
        if not 1900 <= year <= 2099:
            return None
        return (float(max(abs(year - _REFERENCE_YEAR), _MIN_YEAR_SPACE)), "date")
    # day * month * a year window around the reference year
    return (365.0 * _MIN_YEAR_SPACE, "date")


def _bruteforce_guesses(token: str) -> float:
    # 10 guesses per character, the coarse cardinality reference
    # estimators use for unmatched filler
    guesses = 10.0 ** len(token)
    return max(guesses, 50.0) if len(token) > 1 else max(guesses, 10.0)


def _match_guesses_single(token: str) -> float:
    best = _bruteforce_guesses(token)
    for match in (_dictionary_guesses(token), _sequence_guesses(token),
                  _keyboard_guesses(token), _date_guesses(token)):
        if match is not None:
            best = min(best, match[0])
    return best


def _candidate_matches(token: str) -> list[tuple[float, str]]:
    out = [(_bruteforce_guesses(token), "bruteforce")]
    for match in (_dictionary_guesses(token), _repeat_guesses(token),
                  _sequence_guesses(token), _keyboard_guesses(token),
                  _date_guesses(token)):
        if match is not None:
            out.append(match)
    return out


def score(password: str) -> PasswordScore:
    """Estimate guesses via minimum-cost decomposition, bucket to 0-4."""
    n = len(password)
    if n == 0:
        return PasswordScore(0, 1.0, ())
    # dp[i]: cheapest (log-guesses, segments) decomposition of password[:i]
    inf = math.inf
    dp: list[float] = [inf] * (n + 1)
    dp_segments: list[int] = [0] * (n + 1)
    back: list[tuple[int, str] | None] = [None] * (n + 1)
    dp[0] = 0.0
    for i in range(1, n + 1):
        for j in range(max(0, i - 32), i):
            if dp[j] is inf:
                continue
            token = password[j:i]
            for guesses, kind in _candidate_matches(token):
                cost = dp[j] + math.log10(max(guesses, 1.0))
                if cost < dp[i]:
                    dp[i] = cost
                    dp_segments[i] = dp_segments[j] + 1
                    back[i] = (j, kind)
    total = dp[n] + math.log10(math.factorial(dp_segments[n]))
    estimated = 10.0 ** min(total, 300.0)
    patterns: list[tuple[str, str]] = []
    i = n
    while i > 0 and back[i] is not None:
        j, kind = back[i]
        patterns.append((kind, password[j:i]))
        i = j
    patterns.reverse()
    bucket = sum(1 for limit in SCORE_BUCKETS if estimated >= limit)
    return PasswordScore(bucket, max(estimated, 1.0), tuple(patterns))
