"""
Exact secrecy audits by enumeration, Monte Carlo key-bit-error-rate
benchmarks for LDPC codes, the error-probability monotonicity check and
CSV report emission.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, ParameterError
from .gf2 import BitWord
from .ldpc import LLR_CLAMP, LdpcCode, decode_batch
from .lincode import LinearCode, exact_ml_error_prob
from .sources import (
    DEFAULT_AUDIT_BUDGET,
    Model1,
    Model2,
    Model3,
    Model4,
    SourceModel,
    binary_entropy,
    exact_joint_pmf,
    tree_path,
)
from .typeset import build_regular_partition

AUDIT_HEADER = (
    "model", "code", "n", "m", "params", "H_K_bits", "log_keyrange_bits",
    "leak_bits", "agree_prob", "exponent", "arith_mode",
)
KBER_HEADER = (
    "model", "code", "n", "m", "p", "h_p", "blocks", "max_iter", "seed",
    "kber", "kber_ci95", "block_err",
)
# blocks decoded together; fixed so results never depend on the thread count
KBER_CHUNK = 50
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class AuditReport:
    """Exact secrecy, uniformity and agreement figures for one scheme.

    ``leak_bits`` is ``I(K; F)`` for Models 1-3 and ``I(K1; X3, F)`` for
    Model 4. Exact quantities are :class:`~fractions.Fraction`; a leak of
    exactly zero is ``Fraction(0)``.
    """

    model: int
    code: str
    n: int
    m: int
    params: str
    H_K_bits: Union[Fraction, float]
    log_keyrange_bits: Union[Fraction, float]
    leak_bits: Union[Fraction, float]
    agree_prob: Fraction
    exponent: float
    arith_mode: str
    key_range: int
    key_uniform: bool
    independent: bool
    key_pmf: tuple = field(repr=False)
    regime_ok: Optional[bool] = None

    def __post_init__(self):
        if self.leak_bits < 0 or not 0 <= self.agree_prob <= 1:
            raise ValueError("inconsistent audit figures")
        if float(self.H_K_bits) > float(self.log_keyrange_bits) + 1e-12:
            raise ValueError("key entropy exceeds log of key range")

    @property
    def disagree_prob(self) -> Fraction:
        return 1 - self.agree_prob

    def csv_row(self) -> list[str]:
        return [
            str(self.model), self.code, str(self.n), str(self.m), self.params,
            _fmt(self.H_K_bits), _fmt(self.log_keyrange_bits), _fmt(self.leak_bits),
            _fmt(self.agree_prob), _fmt(self.exponent), self.arith_mode,
        ]


@dataclass(frozen=True)
class KberResult:
    """Key bit error rate of the LDPC Model 1 pipeline at one crossover probability.

    ``m`` is the effective number of checks (rank of the parity-check
    matrix), so the key holds ``n - m`` bits.
    """

    model: int
    code: str
    n: int
    m: int
    p: float
    h_p: float
    blocks: int
    max_iter: int
    seed: int
    kber: float
    kber_ci95: float
    block_err: float
    bit_errors: int = 0
    key_bits: int = 0
    nonconverged: int = 0
    llr_clamp: float = LLR_CLAMP

    def __post_init__(self):
        if not 0 <= self.kber <= 1 or self.kber_ci95 < 0:
            raise ValueError("inconsistent KBER figures")

    def csv_row(self) -> list[str]:
        return [
            str(self.model), self.code, str(self.n), str(self.m), _fmt(self.p), _fmt(self.h_p),
            str(self.blocks), str(self.max_iter), str(self.seed), _fmt(self.kber),
            _fmt(self.kber_ci95), _fmt(self.block_err),
        ]


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _log2_exact(L: int) -> Union[Fraction, float]:
    if L > 0 and L & (L - 1) == 0:
        return Fraction(L.bit_length() - 1)
    return math.log2(L)


# ---------------------------------------------------------------------------
# exact audits


def _key_law(K: np.ndarray, F: np.ndarray, cls: np.ndarray, nums: list[int], L: int):
    """Joint law of (key, transcript) in units of ``1 / (L * D)``.

    ``K < 0`` marks a fallback outcome whose key is uniform on ``[0, L)``.
    Returns ``(joint[(f, k)], key_marg[k], f_marg[f], total)`` as ints.
    """
    ncls = len(nums)
    det = K >= 0
    joint: dict[tuple[int, int], int] = {}
    code = (F[det] * L + K[det]) * ncls + cls[det]
    uniq, cnt = np.unique(code, return_counts=True)
    for u, c in zip(uniq.tolist(), cnt.tolist()):
        fk, cl = divmod(u, ncls)
        f, k = divmod(fk, L)
        joint[(f, k)] = joint.get((f, k), 0) + c * L * nums[cl]
    fb = ~det
    if fb.any():
        code = F[fb] * ncls + cls[fb]
        uniq, cnt = np.unique(code, return_counts=True)
        for u, c in zip(uniq.tolist(), cnt.tolist()):
            f, cl = divmod(u, ncls)
            for k in range(L):
                joint[(f, k)] = joint.get((f, k), 0) + c * nums[cl]
    key_marg = [0] * L
    f_marg: dict[int, int] = {}
    for (f, k), w in joint.items():
        key_marg[k] += w
        f_marg[f] = f_marg.get(f, 0) + w
    return joint, key_marg, f_marg, sum(key_marg)


def _secrecy_figures(K, F, cls, nums, den, L):
    joint, key_marg, f_marg, total = _key_law(K, F, cls, nums, L)
    if total != L * den:
        raise AssertionError("probabilities do not sum to one")
    uniform = all(w * L == total for w in key_marg)
    independent = all(
        joint.get((f, k), 0) * total == key_marg[k] * wf for f, wf in f_marg.items() for k in range(L)
    )
    if independent:
        leak: Union[Fraction, float] = Fraction(0)
    else:
        leak = math.fsum(
            (w / total) * math.log2(w * total / (key_marg[k] * f_marg[f]))
            for (f, k), w in joint.items()
            if w
        )
    if uniform:
        H: Union[Fraction, float] = _log2_exact(L)
    else:
        H = -math.fsum((w / total) * math.log2(w / total) for w in key_marg if w)
    key_pmf = tuple(Fraction(w, total) for w in key_marg)
    return H, leak, uniform, independent, key_pmf


def _exponent(agree: Fraction, n: int) -> float:
    dis = 1 - agree
    if dis == 0:
        return math.inf
    return -math.log2(dis) / n


def _model2_params(model, xi, eps_prime, key_range) -> str:
    s = f"{model.describe()};xi={xi};eps'={eps_prime}"
    if key_range is not None:
        s += f";L={key_range}"
    return s


def exact_secrecy_audit(
    model: SourceModel,
    code: LinearCode,
    xi=None,
    eps_prime=None,
    key_range: Optional[int] = None,
    budget: int = DEFAULT_AUDIT_BUDGET,
) -> AuditReport:
    """Enumerate every source outcome and report the exact key law.

    Fallback keys (Models 2 and 4) are marginalised analytically as
    uniform on the key range. ``xi``, ``eps_prime`` and ``key_range`` are
    the regular-partition constants and are ignored for Models 1 and 3.
    """
    n, m = code.n, code.m
    jp = exact_joint_pmf(model, n, budget)
    nums, den = jp.integer_weights()
    W = jp.words
    cls = jp.type_class
    syn = code.syndrome_of_all
    lead = code.coset_table.leaders
    regime = None

    if isinstance(model, (Model1, Model2)):
        x1, x2 = W[:, 0], W[:, 1]
        s1 = syn[x1]
        xh = x2 ^ lead[s1 ^ syn[x2]]
        F = s1
        if isinstance(model, Model1):
            L = 1 << code.k
            K1, K2 = x1 >> m, xh >> m
            params = model.describe()
        else:
            if xi is None or eps_prime is None:
                raise ParameterError("Model 2 audits need xi and eps_prime")
            part = build_regular_partition(code, model, xi, eps_prime, key_range=key_range)
            L, regime = part.L, part.regime_ok
            K1, K2 = part.key_of[x1], part.key_of[xh]
            params = _model2_params(model, xi, eps_prime, key_range)
        keys = [K1, K2]
    elif isinstance(model, Model3):
        tree = model.tree
        root = tree.root
        syns = [syn[W[:, i]] for i in range(tree.d)]
        L = 1 << code.k
        keys = []
        for i in range(1, tree.d + 1):
            est = W[:, i - 1].copy()
            path = tree_path(tree, i, root)
            for a, b in zip(path, path[1:]):
                est ^= lead[syns[a - 1] ^ syns[b - 1]]
            keys.append(est >> m)
        # the root's key comes first in the secrecy computation
        keys.insert(0, keys.pop(root - 1))
        F = np.zeros(len(W), dtype=np.int64)
        for s in syns:
            F = (F << m) | s
        params = model.describe()
    elif isinstance(model, Model4):
        if xi is None or eps_prime is None:
            raise ParameterError("Model 4 audits need xi and eps_prime")
        x1, x2, x3 = W[:, 0], W[:, 1], W[:, 2]
        table = np.empty((1 << n, 1 << n), dtype=np.int64)
        L = None
        for y in range(1 << n):
            part = build_regular_partition(
                code, model, xi, eps_prime, x3=BitWord.from_int(y, n), key_range=key_range
            )
            L, regime = part.L, part.regime_ok
            table[y] = part.key_of
        side = x2 ^ x3
        s1 = syn[x1]
        xh = side ^ lead[s1 ^ syn[side]]
        keys = [table[x3, x1], table[x3, xh]]
        F = (x3 << m) | s1
        params = _model2_params(model, xi, eps_prime, key_range)
    else:
        raise ParameterError(f"unsupported model {model!r}")

    H, leak, uniform, indep, key_pmf = _secrecy_figures(keys[0], F, cls, nums, den, L)

    det = np.logical_and.reduce([k >= 0 for k in keys])
    equal = np.logical_and.reduce([k == keys[0] for k in keys[1:]])
    # in units of 1/(L*D): agreeing deterministic keys weigh L, any fallback 1
    unit = np.where(det, np.where(equal, L, 0), 1)
    acc = np.zeros(len(nums), dtype=np.int64)
    np.add.at(acc, cls, unit)
    agree = Fraction(sum(int(a) * w for a, w in zip(acc.tolist(), nums)), L * den)

    return AuditReport(
        model=model.kind,
        code=code.label(),
        n=n,
        m=m,
        params=params,
        H_K_bits=H,
        log_keyrange_bits=_log2_exact(L),
        leak_bits=leak,
        agree_prob=agree,
        exponent=_exponent(agree, n),
        arith_mode="rational",
        key_range=L,
        key_uniform=uniform,
        independent=indep,
        key_pmf=key_pmf,
        regime_ok=regime,
    )


# ---------------------------------------------------------------------------
# Monte Carlo


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z2 = z * z
    return z / (trials + z2) * math.sqrt(successes * (trials - successes) / trials + z2 / 4)


def simulate_model1_disagreement(code: LinearCode, p, trials: int, seed: int) -> float:
    """Empirical ``Pr{K1 != K2}`` of the Model 1 protocol with coset-leader decoding.

    Vectorised over trials; equivalent to calling
    :func:`skcodes.keygen.run_model1` on each sampled pair.
    """
    rng = np.random.default_rng(seed)
    n, m = code.n, code.m
    weights = np.int64(1) << np.arange(n - 1, -1, -1, dtype=np.int64)
    x2 = rng.integers(0, 2, size=(trials, n), dtype=np.int64) @ weights
    v = (rng.random((trials, n)) < float(p)).astype(np.int64) @ weights
    x1 = x2 ^ v
    syn = code.syndrome_of_all
    xh = x2 ^ code.coset_table.leaders[syn[x1] ^ syn[x2]]
    return float(np.mean((x1 >> m) != (xh >> m)))


def block_seed(seed: int, block: int) -> np.random.SeedSequence:
    """Per-block seed: numpy ``SeedSequence`` over the entropy pair ``(seed, block)``."""
    return np.random.SeedSequence([int(seed), int(block)])


def _kber_chunk(code: LdpcCode, info: np.ndarray, p: float, max_iter: int, seed: int, blocks: range):
    n = code.n
    X2 = np.empty((len(blocks), n), dtype=np.uint8)
    V = np.empty((len(blocks), n), dtype=np.uint8)
    for r, b in enumerate(blocks):
        rng = np.random.default_rng(block_seed(seed, b))
        X2[r] = rng.integers(0, 2, n, dtype=np.uint8)
        # common uniforms across p give nested noise patterns (matched seeds)
        V[r] = rng.random(n) < p
    X1 = X2 ^ V
    target = code.syndromes(X1) ^ code.syndromes(X2)
    est, conv, _ = decode_batch(code, target, p, max_iter)
    Xh = X2 ^ est
    errs = np.count_nonzero(X1[:, info] != Xh[:, info], axis=1)
    return errs, conv


def estimate_kber(
    model: SourceModel,
    code: LdpcCode,
    blocks: int,
    max_iter: int,
    seed: int,
    threads: int = 1,
) -> KberResult:
    """Monte Carlo key bit error rate of the Model 1 LDPC pipeline.

    Per block: draw ``x2`` uniform and noise ``v``, terminal 1 sends
    ``H x1``, terminal 2 runs syndrome BP on ``H x1 + H x2`` and both keep
    the information positions of the systematic form of ``H``. Block
    ``b`` is seeded by :func:`block_seed` and decoded in chunk
    ``b // KBER_CHUNK``, so the result is independent of ``threads``.
    """
    if not isinstance(model, Model1):
        raise ParameterError("KBER benchmarking runs the Model 1 pipeline only")
    if blocks < 1:
        raise ParameterError("blocks must be positive")
    p = float(model.p)
    info = code.systematic.info_positions
    chunks = [range(s, min(s + KBER_CHUNK, blocks)) for s in range(0, blocks, KBER_CHUNK)]

    def work(ch):
        return _kber_chunk(code, info, p, max_iter, seed, ch)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(ch) for ch in chunks]
    errs = np.concatenate([e for e, _ in parts])
    conv = np.concatenate([c for _, c in parts])
    k = int(info.size)
    bit_errors = int(errs.sum())
    trials = blocks * k
    kber = bit_errors / trials
    ci = 3.0 / blocks if bit_errors == 0 else wilson_halfwidth(bit_errors, trials)
    return KberResult(
        model=1,
        code=code.label(),
        n=code.n,
        m=code.systematic.rank,
        p=p,
        h_p=binary_entropy(p),
        blocks=blocks,
        max_iter=max_iter,
        seed=seed,
        kber=kber,
        kber_ci95=ci,
        block_err=float(np.count_nonzero(errs)) / blocks,
        bit_errors=bit_errors,
        key_bits=k,
        nonconverged=int(np.count_nonzero(~conv)),
    )


def kber_sweep(code: LdpcCode, ps: Iterable, blocks: int, max_iter: int, seed: int, threads: int = 1) -> list[KberResult]:
    """KBER over a p-grid with the same block seeds at every point, sorted by p."""
    return [estimate_kber(Model1(p), code, blocks, max_iter, seed, threads) for p in sorted(ps)]


# ---------------------------------------------------------------------------
# monotonicity


def monotonicity_check(code: LinearCode, p_grid: Sequence) -> tuple[bool, list]:
    """Exact ML block error probability on the grid; True iff strictly increasing."""
    grid = list(p_grid)
    if any(not 0 < p < 0.5 for p in grid):
        raise DomainError("grid points must lie in (0, 1/2)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("grid must be strictly increasing")
    values = [exact_ml_error_prob(code, p) for p in grid]
    return all(b > a for a, b in zip(values, values[1:])), values


# ---------------------------------------------------------------------------
# reports


def emit_report(report, destination=None) -> None:
    """Write one report or a homogeneous list of reports as CSV.

    ``destination`` may be a path, an open text file or None (stdout).
    KBER sweeps are written sorted by ``p``.
    """
    rows = list(report) if isinstance(report, (list, tuple)) else [report]
    if not rows:
        raise ValueError("nothing to report")
    if all(isinstance(r, KberResult) for r in rows):
        header = KBER_HEADER
        rows = sorted(rows, key=lambda r: r.p)
    elif all(isinstance(r, AuditReport) for r in rows):
        header = AUDIT_HEADER
    else:
        raise TypeError("reports must all be AuditReport or all KberResult")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow(r.csv_row())
    text = buf.getvalue()
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
