"""
Systematic binary linear codes and exact coset-leader decoding.

A code is given by its ``(n-m) x m`` matrix ``A``; the generator is
``G = [I_{n-m} | A]`` and the parity check ``P = [A^t | I_m]``. The
standard array is never stored: coset leaders live in a ``2^m`` table
and the position of a word inside its coset is its first ``n-m`` bits.

Words handed to the vectorised helpers are packed integers (bit index 0
is the most significant bit, see :mod:`skcodes.gf2`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CapacityError, DimensionError, DomainError, ParameterError
from .gf2 import BitWord, Gf2Matrix, mat_vec_mul, xor_add

DEFAULT_MAX_M = 24
EXACT_MAX_N = 16


def as_fraction(p) -> Fraction:
    """Exact rational value of a probability.

    Floats are read through their shortest decimal repr, so ``0.05``
    becomes ``1/20`` rather than the nearest binary double.
    """
    if isinstance(p, Fraction):
        return p
    if isinstance(p, (int, np.integer)):
        return Fraction(int(p))
    if isinstance(p, (float, np.floating)):
        return Fraction(repr(float(p)))
    return Fraction(str(p))


@dataclass(frozen=True)
class LinearCode:
    """Systematic ``(n, n-m)`` binary linear code."""

    A: Gf2Matrix
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.A.rows + self.A.cols

    @property
    def m(self) -> int:
        return self.A.cols

    @property
    def k(self) -> int:
        return self.A.rows

    @cached_property
    def G(self) -> Gf2Matrix:
        return Gf2Matrix.identity(self.k).hstack(self.A)

    @cached_property
    def P(self) -> Gf2Matrix:
        return self.A.T.hstack(Gf2Matrix.identity(self.m))

    @cached_property
    def column_ints(self) -> np.ndarray:
        """Columns of ``P`` packed as m-bit integers."""
        weights = 1 << np.arange(self.m - 1, -1, -1, dtype=np.int64)
        return (self.P.array.astype(np.int64) * weights[:, None]).sum(axis=0)

    @cached_property
    def coset_table(self) -> "CosetTable":
        return coset_leader_table(self)

    def syndrome(self, x: BitWord) -> BitWord:
        return mat_vec_mul(self.P, x)

    def syndromes_of(self, words) -> np.ndarray:
        """Vectorised syndromes of packed words."""
        words = np.asarray(words, dtype=np.int64)
        out = np.zeros_like(words)
        for i, col in enumerate(self.column_ints):
            bit = (words >> (self.n - 1 - i)) & 1
            out ^= bit * col
        return out

    @cached_property
    def syndrome_of_all(self) -> np.ndarray:
        """Syndrome of every word ``0 .. 2^n - 1``, built by doubling."""
        syn = np.zeros(1, dtype=np.int64)
        for i in range(self.n - 1, -1, -1):
            syn = np.concatenate([syn, syn ^ self.column_ints[i]])
        return syn

    def label(self) -> str:
        return self.name or f"linear({self.n},{self.k})"


@dataclass(frozen=True)
class CosetTable:
    """Coset leader per syndrome (packed integers, indexed by syndrome)."""

    n: int
    m: int
    leaders: np.ndarray = field(repr=False, compare=False)

    def leader(self, s: BitWord) -> BitWord:
        if s.length != self.m:
            raise DimensionError(f"syndrome length {s.length} != m = {self.m}")
        return BitWord.from_int(int(self.leaders[s.to_int()]), self.n)

    @cached_property
    def leader_weights(self) -> np.ndarray:
        return np.bitwise_count(self.leaders.astype(np.uint64)).astype(np.int64)

    def weight_enumerator(self) -> list[int]:
        """``counts[w]`` = number of coset leaders of Hamming weight ``w``."""
        return np.bincount(self.leader_weights, minlength=self.n + 1).tolist()


def make_systematic_code(A: Gf2Matrix, name: str = "") -> LinearCode:
    """Code with generator ``[I | A]`` and parity check ``[A^t | I]``."""
    return LinearCode(Gf2Matrix(A), name)


def coset_leader_table(code: LinearCode, max_m: int = DEFAULT_MAX_M) -> CosetTable:
    """Minimum-weight leader of every coset.

    Words are visited by increasing weight and, within a weight, in
    increasing integer (= lexicographic) order; the first word seen for
    each syndrome becomes its leader.
    """
    if code.m > max_m:
        raise CapacityError(f"coset table needs 2^{code.m} entries; budget is m <= {max_m}")
    n, size = code.n, 1 << code.m
    leaders = np.full(size, -1, dtype=np.int64)
    found = 0
    cols = code.column_ints
    for w in range(n + 1):
        if w == 0:
            values = np.zeros(1, dtype=np.int64)
            syns = np.zeros(1, dtype=np.int64)
        else:
            combos = np.array(list(itertools.combinations(range(n), w)), dtype=np.int64)
            values = (np.int64(1) << (n - 1 - combos)).sum(axis=1)
            syns = np.bitwise_xor.reduce(cols[combos], axis=1)
            order = np.argsort(values, kind="stable")
            values, syns = values[order], syns[order]
        fresh = leaders[syns] < 0
        if not fresh.any():
            continue
        uniq, first = np.unique(syns[fresh], return_index=True)
        leaders[uniq] = values[fresh][first]
        found += uniq.size
        if found == size:
            break
    return CosetTable(n, code.m, leaders)


def _check_decoder_p(p) -> None:
    if not 0 < as_fraction(p) < Fraction(1, 2):
        raise DomainError(f"crossover probability must lie in (0, 1/2), got {p}")


def ml_decode_noise(code: LinearCode, s: BitWord, p) -> BitWord:
    """Most likely BSC(p) noise word with syndrome ``s`` (its coset leader)."""
    _check_decoder_p(p)
    return code.coset_table.leader(s)


def sw_reconstruct(code: LinearCode, x2: BitWord, s1: BitWord, p) -> BitWord:
    """Estimate of the word with syndrome ``s1`` given side information ``x2``."""
    if x2.length != code.n:
        raise DimensionError(f"word length {x2.length} != n = {code.n}")
    if s1.length != code.m:
        raise DimensionError(f"syndrome length {s1.length} != m = {code.m}")
    return xor_add(x2, ml_decode_noise(code, xor_add(s1, code.syndrome(x2)), p))


def coset_index(code: LinearCode, x: BitWord) -> tuple[int, int]:
    """``(P x^t, first n-m bits of x)`` as packed integers."""
    if x.length != code.n:
        raise DimensionError(f"word length {x.length} != n = {code.n}")
    return code.syndrome(x).to_int(), x[: code.k].to_int()


def arith_mode(n: int) -> str:
    return "rational" if n <= EXACT_MAX_N else "float"


def exact_ml_error_prob(code: LinearCode, p, max_m: int = DEFAULT_MAX_M):
    """Block error probability of coset-leader decoding on a BSC(p).

    Sums ``p^w (1-p)^(n-w)`` over the non-leader words via the leader
    weight enumerator. Returns a :class:`~fractions.Fraction` when
    ``n <= 16`` and a float otherwise (see :func:`arith_mode`).
    """
    if not 0 <= as_fraction(p) <= Fraction(1, 2):
        raise DomainError(f"p must lie in [0, 1/2], got {p}")
    table = code.coset_table if max_m == DEFAULT_MAX_M else coset_leader_table(code, max_m)
    counts = table.weight_enumerator()
    n = code.n
    if arith_mode(n) == "rational":
        q = as_fraction(p)
        ok = sum(c * q**w * (1 - q) ** (n - w) for w, c in enumerate(counts) if c)
        return 1 - ok
    q = float(p)
    ok = math.fsum(c * q**w * (1 - q) ** (n - w) for w, c in enumerate(counts) if c)
    return 1.0 - ok


def sample_random_code(n: int, m: int, seed: int) -> LinearCode:
    """Code whose ``A`` is uniform over ``(n-m) x m`` binary matrices."""
    if not 1 <= m < n:
        raise ParameterError(f"need 1 <= m < n, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 2, size=(n - m, m), dtype=np.uint8)
    return LinearCode(Gf2Matrix(A), f"random:{n},{m},{seed}")


def hamming74() -> LinearCode:
    return make_systematic_code(Gf2Matrix(["110", "101", "011", "111"]), "hamming74")


def hamming84() -> LinearCode:
    """Extended Hamming code, minimum distance 4."""
    return make_systematic_code(Gf2Matrix(["0111", "1011", "1101", "1110"]), "hamming84")


def shortened_hamming63() -> LinearCode:
    return make_systematic_code(Gf2Matrix(["110", "101", "011"]), "hamming63")


def repetition(n: int) -> LinearCode:
    if n < 2:
        raise ParameterError("repetition code needs n >= 2")
    return make_systematic_code(Gf2Matrix(np.ones((1, n - 1), dtype=np.uint8)), f"rep-{n}")


def named_code(spec: str) -> LinearCode:
    """Resolve ``hamming74``, ``hamming84``, ``hamming63``, ``rep3``,
    ``rep-N`` or ``random:n,m,seed``."""
    spec = spec.strip()
    if spec == "hamming74":
        return hamming74()
    if spec == "hamming84":
        return hamming84()
    if spec == "hamming63":
        return shortened_hamming63()
    if spec == "rep3":
        code = repetition(3)
        return LinearCode(code.A, "rep3")
    if spec.startswith("rep-"):
        return repetition(int(spec[4:]))
    if spec.startswith("random:"):
        n, m, seed = (int(v) for v in spec[len("random:"):].split(","))
        return sample_random_code(n, m, seed)
    raise ParameterError(f"unknown code name {spec!r}")


def dump_code(code: LinearCode) -> str:
    lines = [f"{code.n} {code.m}"] + [str(code.A.row(i)) for i in range(code.k)]
    return "\n".join(lines) + "\n"


def parse_code(text: str, name: str = "") -> LinearCode:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty code description")
    try:
        n, m = (int(v) for v in lines[0].split())
    except ValueError as exc:
        raise ParameterError(f"bad header line {lines[0]!r}") from exc
    rows = lines[1:]
    if not 1 <= m < n or len(rows) != n - m or any(len(r) != m for r in rows):
        raise ParameterError(f"expected {n - m} rows of {m} bits after header '{n} {m}'")
    return make_systematic_code(Gf2Matrix(rows), name)


def write_code(code: LinearCode, path) -> None:
    Path(path).write_text(dump_code(code))


def read_code(path) -> LinearCode:
    path = Path(path)
    return parse_code(path.read_text(), name=path.stem)
