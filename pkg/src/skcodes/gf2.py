"""
Dense arithmetic over GF(2).

Bit order convention: index 0 is the leftmost (first transmitted) bit.
When a word is packed into an integer, index 0 is the most significant
bit, so lexicographic order of bit strings equals integer order.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, RankError


def _as_bit_array(bits) -> np.ndarray:
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"not a bit string: {bits!r}")
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise DimensionError("a bit word must be one-dimensional")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("bit words may only contain 0 and 1")
        arr = arr.astype(np.uint8)
    arr = np.array(arr, dtype=np.uint8)
    arr.flags.writeable = False
    return arr


class BitWord:
    """Immutable binary word of fixed length.

    Accepts a ``"0101"`` string, any sequence of 0/1 values or a 1-D
    numpy array.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = _as_bit_array(bits)
        if arr.size == 0:
            raise DimensionError("a bit word needs positive length")
        self._bits = arr

    @classmethod
    def zeros(cls, n: int) -> "BitWord":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def unit(cls, n: int, j: int) -> "BitWord":
        arr = np.zeros(n, dtype=np.uint8)
        arr[j] = 1
        return cls(arr)

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitWord":
        if value < 0 or value >> n:
            raise DimensionError(f"{value} does not fit in {n} bits")
        return cls(format(value, f"0{n}b"))

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 view of the symbols."""
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.size)

    @property
    def weight(self) -> int:
        return int(self._bits.sum())

    def to_int(self) -> int:
        return int(str(self), 2)

    def to_hex(self) -> str:
        """Hex rendering of :meth:`to_int`, zero-padded to ceil(n/4) digits."""
        return format(self.to_int(), f"0{(self.length + 3) // 4}x")

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return BitWord(self._bits[idx])
        return int(self._bits[idx])

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __xor__(self, other: "BitWord") -> "BitWord":
        return xor_add(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitWord):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.length, self._bits.tobytes()))

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        return f"BitWord('{self}')"


class Gf2Matrix:
    """Immutable dense binary matrix (row-major)."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        if isinstance(entries, Gf2Matrix):
            arr = entries._a
        elif isinstance(entries, np.ndarray):
            arr = entries
        else:
            rows = [str(r) if isinstance(r, BitWord) else r for r in entries]
            rows = [[int(ch) for ch in r] if isinstance(r, str) else list(r) for r in rows]
            if len({len(r) for r in rows}) > 1:
                raise DimensionError("rows of unequal length")
            arr = np.array(rows)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DimensionError(f"matrix must be 2-D with positive shape, got {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("GF(2) matrices may only contain 0 and 1")
        arr = np.array(arr, dtype=np.uint8)
        arr.flags.writeable = False
        self._a = arr

    @classmethod
    def identity(cls, k: int) -> "Gf2Matrix":
        return cls(np.eye(k, dtype=np.uint8))

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def T(self) -> "Gf2Matrix":
        return Gf2Matrix(self._a.T)

    def row(self, i: int) -> BitWord:
        return BitWord(self._a[i])

    def column(self, j: int) -> BitWord:
        return BitWord(self._a[:, j])

    def hstack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.rows != other.rows:
            raise DimensionError(f"row counts differ: {self.rows} != {other.rows}")
        return Gf2Matrix(np.hstack([self._a, other._a]))

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        prod = self._a.astype(np.int64) @ other._a.astype(np.int64)
        return Gf2Matrix((prod & 1).astype(np.uint8))

    def rank(self) -> int:
        return int(_row_reduce(self._a.copy())[1].size)

    def is_zero(self) -> bool:
        return not self._a.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gf2Matrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self._a.shape, self._a.tobytes()))

    def __str__(self) -> str:
        return "\n".join(str(BitWord(r)) for r in self._a)

    def __repr__(self) -> str:
        return f"Gf2Matrix({self.rows}x{self.cols})"


def xor_add(a: BitWord, b: BitWord) -> BitWord:
    """Componentwise addition modulo 2."""
    if a.length != b.length:
        raise DimensionError(f"length mismatch: {a.length} != {b.length}")
    return BitWord(a.bits ^ b.bits)


def mat_vec_mul(M: Gf2Matrix, x: BitWord) -> BitWord:
    """Return ``M x^t`` over GF(2) as a word of length ``M.rows``."""
    if M.cols != x.length:
        raise DimensionError(f"matrix has {M.cols} columns, word has length {x.length}")
    prod = M.array.astype(np.int64) @ x.bits.astype(np.int64)
    return BitWord((prod & 1).astype(np.uint8))


def _row_reduce(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """In-place reduced row echelon form; returns (matrix, pivot columns)."""
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        hits = np.flatnonzero(a[:, c])
        hits = hits[hits != r]
        a[hits] ^= a[r]
        pivots.append(c)
        r += 1
    return a, np.array(pivots, dtype=np.int64)


def independent_rows(M: Gf2Matrix) -> list[int]:
    """Indices of the first maximal linearly independent set of rows."""
    # pivot columns of rref(M^t) are exactly that set
    _, piv = _row_reduce(M.array.T.copy())
    return [int(i) for i in piv]


def to_systematic(M: Gf2Matrix) -> tuple[Gf2Matrix, tuple[int, ...]]:
    """Row-reduce ``M`` so that an identity block sits in its last columns.

    Returns ``(R, perm)`` where ``R`` spans the same row space as ``M``
    and ``R.array[:, perm]`` equals ``[A^t | I_m]``. ``perm[j]`` is the
    original column that lands at position ``j``. Column ``n-m+r`` is
    tried first as the pivot for row ``r``; only when it is unusable is
    another column swapped in, so a matrix already in the form
    ``[A^t | I_m]`` is a fixed point with the identity permutation.

    Raises
    ------
    RankError
        If ``M`` does not have full row rank.
    """
    m, n = M.rows, M.cols
    if m > n:
        raise RankError(f"{m}x{n} matrix cannot have full row rank")
    w = M.array.copy()
    perm = np.arange(n)
    k = n - m
    for r in range(m):
        c = k + r
        nz = np.flatnonzero(w[r:, c])
        if nz.size == 0:
            # candidate columns not yet used as pivots
            cand = np.concatenate([np.arange(0, k), np.arange(c + 1, n)])
            sub = w[r:, cand]
            has = np.flatnonzero(sub.any(axis=0))
            if has.size == 0:
                raise RankError(f"matrix rank {r} < {m} rows")
            j = int(cand[has[0]])
            w[:, [c, j]] = w[:, [j, c]]
            perm[[c, j]] = perm[[j, c]]
            nz = np.flatnonzero(w[r:, c])
        piv = r + int(nz[0])
        if piv != r:
            w[[r, piv]] = w[[piv, r]]
        hits = np.flatnonzero(w[:, c])
        hits = hits[hits != r]
        w[hits] ^= w[r]
    inv = np.argsort(perm)
    return Gf2Matrix(w[:, inv]), tuple(int(v) for v in perm)


def row_space_contains(M: Gf2Matrix, v: BitWord) -> bool:
    """True iff ``v`` is a GF(2) combination of the rows of ``M``."""
    stacked = np.vstack([M.array, v.bits[None, :]])
    return Gf2Matrix(stacked).rank() == M.rank()


def words_to_matrix(words: Sequence[BitWord] | Iterable[str]) -> Gf2Matrix:
    return Gf2Matrix([str(w) for w in words])
