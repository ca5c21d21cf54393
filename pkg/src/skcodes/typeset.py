"""
Types, typical sets and the regular-subset partition used to extract
uniform keys from non-uniform sources (Models 2 and 4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .gf2 import BitWord
from .lincode import LinearCode
from .sources import Model1, Model2, Model4, SourceModel, binary_entropy

# slack for the closed-interval comparison of log-probabilities
_LOG_TOL = 1e-12
_MAX_ENUM_N = 20


@dataclass(frozen=True)
class TypeClass:
    """Exact symbol (or symbol-pair) counts of a word (or word pair)."""

    n: int
    counts: tuple

    def as_dict(self) -> dict:
        return dict(self.counts)

    def __getitem__(self, sym) -> int:
        return self.as_dict()[sym]


def empirical_type(x: BitWord, y: Optional[BitWord] = None) -> TypeClass:
    n = x.length
    ones = x.weight
    if y is None:
        return TypeClass(n, ((0, n - ones), (1, ones)))
    if y.length != n:
        raise DimensionError(f"length mismatch: {n} != {y.length}")
    xb, yb = x.bits, y.bits
    counts = tuple(
        ((a, b), int(np.count_nonzero((xb == a) & (yb == b)))) for a in (0, 1) for b in (0, 1)
    )
    return TypeClass(n, counts)


def _entropy(pmf: Mapping) -> float:
    return -math.fsum(float(v) * math.log2(float(v)) for v in pmf.values())


def _check_positive(pmf: Mapping) -> None:
    if any(v <= 0 for v in pmf.values()):
        raise DomainError("typicality needs a strictly positive pmf")


def _within(t: TypeClass, pmf: Mapping, xi) -> bool:
    """``|log2 P^n(x) + n H| <= n xi`` evaluated from the type."""
    counts = t.as_dict()
    n = t.n
    # sum_a (c_a - n P(a)) log2 P(a); the coefficients are exact rationals
    dev = math.fsum(
        float(Fraction(counts.get(a, 0)) - n * Fraction(pmf[a])) * math.log2(float(pmf[a]))
        for a in pmf
    )
    bound = n * float(xi)
    return abs(dev) <= bound + _LOG_TOL * max(1.0, bound)


def _marginals(joint: Mapping) -> tuple[dict, dict]:
    px: dict = {}
    py: dict = {}
    for (a, b), v in joint.items():
        px[a] = px.get(a, 0) + v
        py[b] = py.get(b, 0) + v
    return px, py


def is_typical(x: BitWord, pmf: Mapping, xi, y: Optional[BitWord] = None) -> bool:
    """Membership in the typical set with constant ``xi``.

    Without ``y``, ``pmf`` maps symbols to probabilities. With ``y``,
    ``pmf`` is the joint pmf keyed by ``(x_symbol, y_symbol)`` and the
    test is ``x`` in the conditional typical set of ``y``: both marginals
    typical and the pair jointly typical (empty when ``y`` is atypical).
    """
    if xi < 0:
        raise DomainError("xi must be nonnegative")
    _check_positive(pmf)
    if y is None:
        return _within(empirical_type(x), pmf, xi)
    px, py = _marginals(pmf)
    if not _within(empirical_type(y), py, xi):
        return False
    return _within(empirical_type(x), px, xi) and _within(empirical_type(x, y), pmf, xi)


def prop1_bound(pmf: Mapping, xi, n: int) -> float:
    """Lower bound on the probability of the typical set.

    ``1 - (n+1)^|X| 2^(-n xi^2 / (2 ln2 (sum_a log2 1/P(a))^2))``; pass
    a joint pmf (tuple keys) for the pair version, where ``|X|`` becomes
    the size of the product alphabet. May be negative for small ``n``.
    """
    _check_positive(pmf)
    if xi <= 0:
        raise DomainError("xi must be positive")
    s = math.fsum(-math.log2(float(v)) for v in pmf.values())
    expo = n * float(xi) ** 2 / (2 * math.log(2) * s * s)
    return 1.0 - (n + 1) ** len(pmf) * 2.0 ** (-expo)


def typical_set_probability(pmf: Mapping[int, Fraction], xi, n: int) -> float:
    """Probability of the binary typical set, summed over type classes."""
    p1 = float(pmf[1])
    # class masses in log space (the binomial overflows a float past n ~ 1000),
    # normalised by the total so rounding cannot push the result above 1
    logs, typical = [], []
    for k in range(n + 1):
        log_c = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        logs.append(log_c + k * math.log(p1) + (n - k) * math.log1p(-p1))
        typical.append(_within(TypeClass(n, ((0, n - k), (1, k))), pmf, xi))
    top = max(logs)
    mass = [math.exp(v - top) for v in logs]
    return math.fsum(w for w, t in zip(mass, typical) if t) / math.fsum(mass)


@dataclass(frozen=True)
class RegularPartition:
    """Regular subsets of one code's cosets.

    ``subsets[s]`` lists the regular subsets (tuples of packed words, each
    of length ``L``) inside the coset with syndrome ``s``. ``key_of[x]`` is
    the position of word ``x`` inside its subset, or -1 when ``x`` is
    residual (nontypical, or a leftover of its (coset, type) class).
    """

    code: LinearCode
    L: int
    subsets: dict = field(repr=False)
    key_of: np.ndarray = field(repr=False, compare=False)
    x3: Optional[int] = None
    xi: float = 0.0
    eps_prime: float = 0.0
    regime_ok: bool = True

    @property
    def n(self) -> int:
        return self.code.n

    def locate(self, x: BitWord):
        """``(syndrome, subset number, key)`` of ``x``, or None if residual."""
        xi = x.to_int()
        k = int(self.key_of[xi])
        if k < 0:
            return None
        s = int(self.code.syndrome_of_all[xi])
        for j, block in enumerate(self.subsets.get(s, ())):
            if xi in block:
                return s, j, k
        raise AssertionError("key table and subset list disagree")

    def residual(self) -> list[int]:
        return np.flatnonzero(self.key_of < 0).tolist()

    def dump(self) -> str:
        """Debug listing: ``coset-id type-counts L member-list`` per subset."""
        n = self.n
        lines = []
        for s in sorted(self.subsets):
            for block in self.subsets[s]:
                head = BitWord.from_int(block[0], n)
                if self.x3 is None:
                    t = empirical_type(head)
                else:
                    t = empirical_type(head, BitWord.from_int(self.x3, n))
                tc = ",".join(str(c) for _, c in t.counts)
                members = " ".join(format(w, f"0{n}b") for w in block)
                lines.append(f"{s} {tc} {self.L} {members}")
        return "\n".join(lines) + ("\n" if lines else "")


def key_rate_info(model: SourceModel) -> tuple[float, dict, Optional[dict]]:
    """(mutual information rate, pmf of X1, joint pmf of (X1, X3) or None)."""
    if isinstance(model, Model1):
        model = Model2(model.p, Fraction(1, 2))
    if isinstance(model, Model2):
        r = model.p + model.q - 2 * model.p * model.q
        info = binary_entropy(r) - binary_entropy(model.p)
        return info, {0: 1 - r, 1: r}, None
    if isinstance(model, Model4):
        r = model.p + model.q - 2 * model.p * model.q
        info = binary_entropy(r) - binary_entropy(model.p)
        # X1 = W xor V is independent of the uniform X3
        joint = {(a, b): (r if a else 1 - r) / 2 for a in (0, 1) for b in (0, 1)}
        return info, {0: 1 - r, 1: r}, joint
    raise ParameterError("regular partitions are defined for Models 1, 2 and 4")


def build_regular_partition(
    code: LinearCode,
    model: SourceModel,
    xi,
    eps_prime,
    x3: Optional[BitWord] = None,
    key_range: Optional[int] = None,
) -> RegularPartition:
    """Chop every (coset, type) class of typical words into blocks of ``L``.

    ``L = floor(2^(n (I - eps_prime)))`` unless ``key_range`` overrides it.
    Within a class words are taken in lexicographic order, so the
    partition is deterministic. The measured code slack
    ``eps = m/n - h(p)`` must satisfy ``eps_prime > xi + eps`` (Model 2)
    or ``eps_prime > 2 xi + eps`` (Model 4).
    """
    n, m = code.n, code.m
    if n > _MAX_ENUM_N:
        raise ParameterError(f"n = {n} is too large to enumerate {{0,1}}^n")
    info, px, joint = key_rate_info(model)
    conditional = joint is not None
    if conditional and x3 is None:
        raise ParameterError("a Model 4 partition needs the revealed word x3")
    if x3 is not None and x3.length != n:
        raise DimensionError(f"x3 has length {x3.length}, code has n = {n}")
    eps = m / n - binary_entropy(model.p)
    need = (2 if conditional else 1) * float(xi) + eps
    if not float(eps_prime) > need:
        raise ParameterError(
            f"eps' = {float(eps_prime)} must exceed {'2 xi' if conditional else 'xi'} + eps = {need:.6f}"
        )
    if key_range is None:
        L = math.floor(2 ** (n * (info - float(eps_prime))))
    else:
        L = int(key_range)
    if L < 1:
        raise ParameterError(f"key range L = {L} < 1; lower eps' or raise n")

    words = np.arange(1 << n, dtype=np.int64)
    ones = np.bitwise_count(words.astype(np.uint64)).astype(np.int64)
    typical = np.zeros(1 << n, dtype=bool)
    if conditional:
        y = x3
        y_int = y.to_int()
        ones_on_y = np.bitwise_count((words & y_int).astype(np.uint64)).astype(np.int64)
        # joint type with y is fixed by (ones where y=1, ones where y=0)
        type_id = ones_on_y * (n + 1) + (ones - ones_on_y)
        for tid in np.unique(type_id):
            rep = BitWord.from_int(int(words[type_id == tid][0]), n)
            typical[type_id == tid] = is_typical(rep, joint, xi, y=y)
    else:
        type_id = ones
        for k in range(n + 1):
            t = TypeClass(n, ((0, n - k), (1, k)))
            typical[ones == k] = _within(t, px, xi)
    n_types = np.unique(type_id).size
    assert n_types <= (n + 1) ** 2

    syn = code.syndrome_of_all
    key_of = np.full(1 << n, -1, dtype=np.int64)
    subsets: dict[int, list[tuple[int, ...]]] = {}
    sel = np.flatnonzero(typical)
    # lexicographic within each (coset, type) class
    order = np.lexsort((sel, type_id[sel], syn[sel]))
    sel = sel[order]
    for (s, tid), grp in itertools.groupby(sel.tolist(), key=lambda w: (int(syn[w]), int(type_id[w]))):
        grp = list(grp)
        for b in range(len(grp) // L):
            block = tuple(grp[b * L:(b + 1) * L])
            subsets.setdefault(s, []).append(block)
            key_of[list(block)] = np.arange(L)
    key_of.flags.writeable = False
    return RegularPartition(
        code=code,
        L=L,
        subsets=subsets,
        key_of=key_of,
        x3=None if x3 is None else x3.to_int(),
        xi=float(xi),
        eps_prime=float(eps_prime),
        regime_ok=eps > 0,
    )
