"""
Sparse LDPC codes for Slepian-Wolf reconciliation at block length ~10^3.

Codes come from a seeded configuration model (random socket matching)
with double edges repaired and 4-cycles removed by edge swaps where
possible. Decoding is flooding sum-product in the LLR domain, run on a
batch of syndromes at once; the check rule carries the syndrome bit as
a sign flip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .gf2 import BitWord, Gf2Matrix, independent_rows, to_systematic

LLR_CLAMP = 25.0
_TANH_MAX = 1.0 - 1e-15


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distribution pair.

    ``lam`` and ``rho`` hold ``(degree, edge_fraction)`` for variable and
    check nodes; a polynomial term ``c x^k`` is degree ``k + 1``.
    """

    lam: tuple
    rho: tuple

    def __post_init__(self):
        for name, dist in (("lambda", self.lam), ("rho", self.rho)):
            if not dist:
                raise ParameterError(f"{name} is empty")
            for deg, frac in dist:
                if int(deg) != deg or deg < 1:
                    raise ParameterError(f"{name} has invalid degree {deg}")
                if frac < 0:
                    raise ParameterError(f"{name} has a negative fraction")
            total = math.fsum(f for _, f in dist)
            if abs(total - 1.0) > 1e-9:
                raise ParameterError(f"{name} fractions sum to {total!r}, not 1")

    def design_rate(self) -> float:
        return 1.0 - math.fsum(f / d for d, f in self.rho) / math.fsum(f / d for d, f in self.lam)


HALF_RATE_IRREGULAR = DegreeDistribution(
    lam=((2, 0.234029), (3, 0.212425), (6, 0.146898), (7, 0.102840), (20, 0.303808)),
    rho=((8, 0.71875), (9, 0.28125)),
)


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """Parity-check structure: ``check_vars[c]`` lists the variables of check ``c``."""

    n: int
    check_vars: tuple
    name: str = ""

    def __post_init__(self):
        cv = tuple(tuple(sorted(int(v) for v in vs)) for vs in self.check_vars)
        object.__setattr__(self, "check_vars", cv)
        for c, vs in enumerate(cv):
            if len(set(vs)) != len(vs):
                raise ParameterError(f"check {c} repeats a variable")
            if vs and (vs[0] < 0 or vs[-1] >= self.n):
                raise ParameterError(f"check {c} references a variable outside 0..{self.n - 1}")

    @property
    def m(self) -> int:
        return len(self.check_vars)

    @cached_property
    def var_checks(self) -> tuple:
        vc: list[list[int]] = [[] for _ in range(self.n)]
        for c, vs in enumerate(self.check_vars):
            for v in vs:
                vc[v].append(c)
        return tuple(tuple(x) for x in vc)

    @property
    def num_edges(self) -> int:
        return sum(len(vs) for vs in self.check_vars)

    def var_degree_hist(self) -> dict[int, int]:
        return _hist(len(cs) for cs in self.var_checks)

    def check_degree_hist(self) -> dict[int, int]:
        return _hist(len(vs) for vs in self.check_vars)

    def dense(self) -> Gf2Matrix:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, vs in enumerate(self.check_vars):
            H[c, list(vs)] = 1
        return Gf2Matrix(H)

    @cached_property
    def systematic(self) -> "SystematicInfo":
        """Independent checks and the column permutation of the dense lift."""
        H = self.dense()
        kept = independent_rows(H)
        _, perm = to_systematic(Gf2Matrix(H.array[kept]))
        rank = len(kept)
        return SystematicInfo(rank, perm, np.array(perm[: self.n - rank], dtype=np.int64))

    def syndrome(self, x: BitWord) -> BitWord:
        if x.length != self.n:
            raise DimensionError(f"word length {x.length} != n = {self.n}")
        return BitWord(self.syndromes(x.bits[None, :])[0])

    def syndromes(self, X: np.ndarray) -> np.ndarray:
        """Row-wise syndromes of a ``(B, n)`` 0/1 array."""
        g = self.graph
        bits = np.concatenate([X[:, g.ev], np.zeros((X.shape[0], 1), dtype=X.dtype)], axis=1)
        return _xor_slots(bits[:, g.chk_slots]).astype(np.uint8)

    @cached_property
    def graph(self) -> "_Graph":
        return _Graph.build(self)

    def same_structure(self, other: "LdpcCode") -> bool:
        return self.n == other.n and self.check_vars == other.check_vars

    def label(self) -> str:
        return self.name or f"ldpc({self.n},{self.m})"


@dataclass(frozen=True)
class SystematicInfo:
    rank: int
    perm: tuple
    info_positions: np.ndarray

    @property
    def key_length(self) -> int:
        return int(self.info_positions.size)


def _hist(degrees) -> dict[int, int]:
    out: dict[int, int] = {}
    for d in degrees:
        out[d] = out.get(d, 0) + 1
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class _Graph:
    """Edge arrays in check-major order plus padded slot tables."""

    ev: np.ndarray
    ec: np.ndarray
    chk_slots: np.ndarray
    chk_pos: np.ndarray
    var_slots: np.ndarray

    @classmethod
    def build(cls, code: LdpcCode) -> "_Graph":
        ev = np.array([v for vs in code.check_vars for v in vs], dtype=np.int64)
        ec = np.array([c for c, vs in enumerate(code.check_vars) for _ in vs], dtype=np.int64)
        E = ev.size
        dcmax = max((len(vs) for vs in code.check_vars), default=1)
        chk_slots = np.full((code.m, dcmax), E, dtype=np.int64)
        chk_pos = np.empty(E, dtype=np.int64)
        e = 0
        for c, vs in enumerate(code.check_vars):
            for s in range(len(vs)):
                chk_slots[c, s] = e
                chk_pos[e] = c * dcmax + s
                e += 1
        dvmax = max((len(cs) for cs in code.var_checks), default=1)
        var_slots = np.full((code.n, dvmax), E, dtype=np.int64)
        fill = np.zeros(code.n, dtype=np.int64)
        for e_idx, v in enumerate(ev):
            var_slots[v, fill[v]] = e_idx
            fill[v] += 1
        return cls(ev, ec, chk_slots, chk_pos, var_slots)


def _xor_slots(a: np.ndarray) -> np.ndarray:
    acc = a[..., 0].copy()
    for s in range(1, a.shape[-1]):
        acc ^= a[..., s]
    return acc


def _sum_slots(a: np.ndarray) -> np.ndarray:
    acc = a[..., 0].copy()
    for s in range(1, a.shape[-1]):
        acc += a[..., s]
    return acc


# ---------------------------------------------------------------------------
# construction


def _largest_remainder(total: int, shares: Sequence[float]) -> list[int]:
    raw = [total * s for s in shares]
    counts = [math.floor(r) for r in raw]
    short = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def irregular_degrees(n: int, dist: DegreeDistribution) -> tuple[list[int], list[int]]:
    """Per-node degree lists realising ``dist`` on ``n`` variables.

    Node counts use largest-remainder rounding; any socket surplus or
    deficit left by rounding is absorbed by the highest-degree checks.
    """
    lam_w = [f / d for d, f in dist.lam]
    var_counts = _largest_remainder(n, [w / sum(lam_w) for w in lam_w])
    if any(c < 1 for c, (_, f) in zip(var_counts, dist.lam) if f > 0):
        raise ParameterError(f"n = {n} leaves a variable degree bucket empty")
    var_deg = [d for (d, _), c in zip(dist.lam, var_counts) for _ in range(c)]
    E = sum(var_deg)
    rho_w = [f / d for d, f in dist.rho]
    m = round(E * sum(rho_w))
    chk_counts = _largest_remainder(m, [w / sum(rho_w) for w in rho_w])
    if m < 1 or any(c < 1 for c, (_, f) in zip(chk_counts, dist.rho) if f > 0):
        raise ParameterError(f"n = {n} leaves a check degree bucket empty")
    chk_deg = sorted((d for (d, _), c in zip(dist.rho, chk_counts) for _ in range(c)), reverse=True)
    diff = E - sum(chk_deg)
    i = 0
    while diff != 0:
        step = 1 if diff > 0 else -1
        chk_deg[i % m] += step
        diff -= step
        i += 1
    if min(chk_deg) < 2:
        raise ParameterError("rounding left a check of degree < 2")
    return var_deg, chk_deg


def _configuration_model(
    var_deg: list[int],
    chk_deg: list[int],
    rng: np.random.Generator,
    fixed: Sequence[tuple[int, int]] = (),
    girth_passes: int = 30,
) -> list[tuple[int, ...]]:
    """Random socket matching; ``fixed`` (variable, check) edges are placed
    first and never swapped."""
    n, m = len(var_deg), len(chk_deg)
    vc = [set() for _ in range(n)]
    cv = [set() for _ in range(m)]
    vfree, cfree = list(var_deg), list(chk_deg)
    for v, c in fixed:
        vc[v].add(c)
        cv[c].add(v)
        vfree[v] -= 1
        cfree[c] -= 1
    vs = np.repeat(np.arange(n), vfree)
    cs = np.repeat(np.arange(m), cfree)[rng.permutation(len(vs))]
    E = len(vs)
    edge_check = cs.astype(np.int64).tolist()
    dup: list[int] = []
    for e in range(E):
        v, c = int(vs[e]), edge_check[e]
        if c in vc[v]:
            dup.append(e)
        else:
            vc[v].add(c)
            cv[c].add(v)
    # repair double edges by swapping check endpoints with random edges
    tries = 0
    while dup:
        tries += 1
        if tries > 1000 * E:
            raise ParameterError("could not remove double edges")
        e = dup[-1]
        v, c = int(vs[e]), edge_check[e]
        f = int(rng.integers(E))
        u, d = int(vs[f]), edge_check[f]
        if f in dup or u == v or d == c or d in vc[v] or c in vc[u]:
            continue
        _move(vc, cv, u, d, c)
        vc[v].add(d)
        cv[d].add(v)
        edge_check[e], edge_check[f] = d, c
        dup.pop()
    # best-effort 4-cycle removal
    for _ in range(girth_passes):
        bad = [e for e in range(E) if _edge_in_four_cycle(vc, cv, int(vs[e]), edge_check[e])]
        if not bad:
            break
        for e in bad:
            v, c = int(vs[e]), edge_check[e]
            if not _edge_in_four_cycle(vc, cv, v, c):
                continue
            for _attempt in range(20):
                f = int(rng.integers(E))
                u, d = int(vs[f]), edge_check[f]
                if u == v or d == c or d in vc[v] or c in vc[u]:
                    continue
                _move(vc, cv, v, c, d)
                _move(vc, cv, u, d, c)
                if _edge_in_four_cycle(vc, cv, v, d) or _edge_in_four_cycle(vc, cv, u, c):
                    _move(vc, cv, v, d, c)
                    _move(vc, cv, u, c, d)
                    continue
                edge_check[e], edge_check[f] = d, c
                break
    return [tuple(sorted(s)) for s in cv]


def _move(vc, cv, v, old, new) -> None:
    vc[v].discard(old)
    cv[old].discard(v)
    vc[v].add(new)
    cv[new].add(v)


def _edge_in_four_cycle(vc, cv, v: int, c: int) -> bool:
    for u in cv[c]:
        if u != v and len(vc[u] & vc[v]) >= 2:
            return True
    return False


def count_four_cycles(code: LdpcCode) -> int:
    """Number of variable pairs sharing at least two checks."""
    vc = [set(cs) for cs in code.var_checks]
    total = 0
    for v in range(code.n):
        partners = {u for c in vc[v] for u in code.check_vars[c] if u > v}
        total += sum(1 for u in partners if len(vc[u] & vc[v]) >= 2)
    return total


def build_regular_ldpc(n: int, dv: int, dc: int, seed: int) -> LdpcCode:
    """(dv, dc)-regular code with ``m = n dv / dc`` checks."""
    if dv < 2 or dc <= dv:
        raise ParameterError(f"need dv >= 2 and dc > dv, got ({dv},{dc})")
    if (n * dv) % dc:
        raise ParameterError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m = n * dv // dc
    rng = np.random.default_rng(seed)
    checks = _configuration_model([dv] * n, [dc] * m, rng)
    return LdpcCode(n, tuple(checks), f"({dv},{dc})-regular")


def build_irregular_ldpc(n: int, dist: DegreeDistribution, seed: int) -> LdpcCode:
    """Irregular code realising ``dist`` (see :func:`irregular_degrees`).

    When there are fewer degree-2 variables than checks they are laid out
    as a staircase over a random check order, so they form no cycle
    among themselves; all other sockets are matched at random.
    """
    var_deg, chk_deg = irregular_degrees(n, dist)
    rng = np.random.default_rng(seed)
    m = len(chk_deg)
    order = rng.permutation(m).tolist()
    var_deg = sorted(var_deg)
    n2 = var_deg.count(2)
    fixed = []
    if 0 < n2 < m:
        for v in range(n2):
            fixed += [(v, order[v]), (v, order[v + 1])]
    checks = _configuration_model(var_deg, chk_deg, rng, fixed)
    return LdpcCode(n, tuple(checks), "irregular")


# ---------------------------------------------------------------------------
# alist I/O


def dump_alist(code: LdpcCode) -> str:
    """MacKay alist text: sizes, max degrees, degree lists, 1-based adjacency."""
    vc, cv = code.var_checks, code.check_vars
    dvmax = max(len(x) for x in vc)
    dcmax = max(len(x) for x in cv)
    out = [f"{code.n} {code.m}", f"{dvmax} {dcmax}"]
    out.append(" ".join(str(len(x)) for x in vc))
    out.append(" ".join(str(len(x)) for x in cv))
    for x in vc:
        out.append(" ".join(str(c + 1) for c in x) + " 0" * (dvmax - len(x)))
    for x in cv:
        out.append(" ".join(str(v + 1) for v in x) + " 0" * (dcmax - len(x)))
    return "\n".join(out) + "\n"


def parse_alist(text: str, name: str = "") -> LdpcCode:
    rows = [[int(t) for t in ln.split()] for ln in text.splitlines() if ln.strip()]
    try:
        n, m = rows[0]
        col_w, row_w = rows[2], rows[3]
        if len(col_w) != n or len(row_w) != m or len(rows) != 4 + n + m:
            raise ValueError
        var_lists = [[c - 1 for c in r if c] for r in rows[4:4 + n]]
        chk_lists = [[v - 1 for v in r if v] for r in rows[4 + n:4 + n + m]]
    except (ValueError, IndexError) as exc:
        raise ParameterError("malformed alist data") from exc
    if [len(x) for x in var_lists] != col_w or [len(x) for x in chk_lists] != row_w:
        raise ParameterError("alist degree lists disagree with adjacency lines")
    code = LdpcCode(n, tuple(tuple(x) for x in chk_lists), name)
    if [sorted(x) for x in var_lists] != [list(x) for x in code.var_checks]:
        raise ParameterError("alist variable and check adjacency are inconsistent")
    return code


def write_alist(code: LdpcCode, path) -> None:
    Path(path).write_text(dump_alist(code))


def read_alist(path) -> LdpcCode:
    path = Path(path)
    return parse_alist(path.read_text(), path.stem)


# ---------------------------------------------------------------------------
# decoding


def decode_batch(code: LdpcCode, S: np.ndarray, p: float, max_iter: int):
    """Sum-product estimate of the noise words behind a batch of syndromes.

    Parameters
    ----------
    S : ndarray, shape (B, m)
        Target syndromes (0/1).
    p : float
        BSC crossover probability, 0 < p < 1/2.
    max_iter : int
        Iteration cap.

    Returns
    -------
    est : ndarray (B, n) uint8
    converged : ndarray (B,) bool
    iterations : ndarray (B,) int
    """
    if not 0 < p < 0.5:
        raise DomainError(f"crossover probability must lie in (0, 1/2), got {p}")
    S = np.asarray(S, dtype=np.uint8)
    if S.ndim != 2 or S.shape[1] != code.m:
        raise DimensionError(f"syndromes must have shape (B, {code.m})")
    g = code.graph
    B, n, E = S.shape[0], code.n, g.ev.size
    l0 = math.log((1 - p) / p)
    est = np.zeros((B, n), dtype=np.uint8)
    converged = ~S.any(axis=1)
    iterations = np.zeros(B, dtype=np.int64)
    rows = np.flatnonzero(~converged)
    if rows.size == 0 or max_iter <= 0:
        return est, converged, iterations
    sign = 1.0 - 2.0 * S[rows].astype(np.float64)
    target = S[rows]
    v2c = np.full((rows.size, E), l0)
    for it in range(1, max_iter + 1):
        Ba = rows.size
        t = np.tanh(v2c / 2.0)
        t = np.concatenate([t, np.ones((Ba, 1))], axis=1)[:, g.chk_slots]
        D = t.shape[-1]
        pre = np.ones_like(t)
        suf = np.ones_like(t)
        for s in range(1, D):
            pre[..., s] = pre[..., s - 1] * t[..., s - 1]
        for s in range(D - 2, -1, -1):
            suf[..., s] = suf[..., s + 1] * t[..., s + 1]
        ex = np.clip(pre * suf, -_TANH_MAX, _TANH_MAX)
        c2v_slots = 2.0 * np.arctanh(ex) * sign[:, :, None]
        c2v = np.clip(c2v_slots.reshape(Ba, -1)[:, g.chk_pos], -LLR_CLAMP, LLR_CLAMP)
        C = np.concatenate([c2v, np.zeros((Ba, 1))], axis=1)[:, g.var_slots]
        total = l0 + _sum_slots(C)
        hard = (total < 0).astype(np.uint8)
        syn = code.syndromes(hard)
        done = (syn == target).all(axis=1)
        if done.any() or it == max_iter:
            fin = done if it < max_iter else np.ones(Ba, dtype=bool)
            idx = rows[fin]
            est[idx] = hard[fin]
            converged[idx] = done[fin]
            iterations[idx] = it
            keep = ~fin
            rows, sign, target = rows[keep], sign[keep], target[keep]
            if rows.size == 0:
                break
            total, c2v = total[keep], c2v[keep]
        v2c = np.clip(total[:, g.ev] - c2v, -LLR_CLAMP, LLR_CLAMP)
    return est, converged, iterations


def bp_syndrome_decode(code: LdpcCode, s: BitWord, p: float, max_iter: int) -> tuple[BitWord, bool, int]:
    """Decode one syndrome; see :func:`decode_batch`."""
    if s.length != code.m:
        raise DimensionError(f"syndrome length {s.length} != m = {code.m}")
    est, conv, its = decode_batch(code, s.bits[None, :], p, max_iter)
    return BitWord(est[0]), bool(conv[0]), int(its[0])
