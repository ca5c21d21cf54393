"""
The four correlated binary source models, their samplers, exact
enumerators and closed-form key capacities.

Terminals are numbered from 1 as in the protocol descriptions; the
sampler and enumerator return one word per terminal in that order.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CapacityError, DomainError, ParameterError
from .gf2 import BitWord
from .lincode import as_fraction

DEFAULT_AUDIT_BUDGET = 1 << 24


def _open_half(name: str, v: Fraction) -> None:
    if not 0 < v < Fraction(1, 2):
        raise DomainError(f"{name} must lie in (0, 1/2), got {v}")


def _open_unit(name: str, v: Fraction) -> None:
    if not 0 < v < 1:
        raise DomainError(f"{name} must lie in (0, 1), got {v}")


def _bsc_pair(p: Fraction) -> dict[tuple[int, int], Fraction]:
    return {(a, b): (1 - p) / 2 if a == b else p / 2 for a in (0, 1) for b in (0, 1)}


@dataclass(frozen=True)
class TreeTopology:
    """Tree on vertices ``1..d``; each edge carries a BSC crossover probability.

    Edges are stored canonically as ``(i, j, p)`` with ``i < j``, sorted.
    """

    d: int
    edges: tuple

    def __init__(self, d: int, edges):
        canon = []
        for i, j, p in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            p = as_fraction(p)
            _open_half(f"p({i},{j})", p)
            canon.append((i, j, p))
        canon.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "edges", tuple(canon))
        self._validate()

    def _validate(self) -> None:
        d = self.d
        if d < 2:
            raise ParameterError("a tree model needs at least two terminals")
        if len(self.edges) != d - 1:
            raise ParameterError(f"a tree on {d} vertices has {d - 1} edges, got {len(self.edges)}")
        pairs = {(i, j) for i, j, _ in self.edges}
        if len(pairs) != len(self.edges):
            raise ParameterError("repeated edge")
        for i, j, _ in self.edges:
            if not (1 <= i <= d and 1 <= j <= d):
                raise ParameterError(f"edge ({i},{j}) has a vertex outside 1..{d}")
        seen = {1}
        todo = [1]
        while todo:
            v = todo.pop()
            for u in self.neighbours[v]:
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        if len(seen) != d:
            raise ParameterError("edge list is not connected")

    @cached_property
    def neighbours(self) -> dict[int, list[int]]:
        nb: dict[int, list[int]] = {v: [] for v in range(1, self.d + 1)}
        for i, j, _ in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return nb

    def edge_p(self, i: int, j: int) -> Fraction:
        a, b = min(i, j), max(i, j)
        for u, v, p in self.edges:
            if (u, v) == (a, b):
                return p
        raise ParameterError(f"({i},{j}) is not an edge")

    @property
    def p_max(self) -> Fraction:
        return max(p for _, _, p in self.edges)

    @property
    def root_pair(self) -> tuple[int, int]:
        """``(i*, j*)``: first edge in canonical order attaining ``p_max``."""
        pm = self.p_max
        for i, j, p in self.edges:
            if p == pm:
                return i, j
        raise AssertionError("unreachable")

    @property
    def root(self) -> int:
        return self.root_pair[0]

    @classmethod
    def chain(cls, ps) -> "TreeTopology":
        return cls(len(ps) + 1, [(k + 1, k + 2, p) for k, p in enumerate(ps)])


def tree_path(tree: TreeTopology, i: int, j: int) -> list[int]:
    """Unique vertex path from ``i`` to ``j`` inclusive."""
    for v in (i, j):
        if not 1 <= v <= tree.d:
            raise DomainError(f"vertex {v} is not in 1..{tree.d}")
    parent = {i: None}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        if v == j:
            break
        for u in tree.neighbours[v]:
            if u not in parent:
                parent[u] = v
                queue.append(u)
    path = [j]
    while path[-1] != i:
        path.append(parent[path[-1]])
    return path[::-1]


class SourceModel:
    """Common interface of the four source models."""

    kind: int
    d: int

    def symbol_pmf(self) -> dict[tuple[int, ...], Fraction]:
        """Exact joint pmf of one position ``(X_1, ..., X_d)``."""
        raise NotImplementedError

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Model1(SourceModel):
    """Uniform X2 through a BSC(p) to X1."""

    p: Fraction
    kind = 1
    d = 2

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        _open_half("p", self.p)

    def symbol_pmf(self):
        return _bsc_pair(self.p)

    def _sample(self, n, rng):
        x2 = rng.integers(0, 2, n, dtype=np.uint8)
        v = (rng.random(n) < float(self.p)).astype(np.uint8)
        return np.stack([x2 ^ v, x2])

    def describe(self):
        return f"p={self.p}"


@dataclass(frozen=True)
class Model2(SourceModel):
    """X2 ~ Bernoulli(q), X1 = X2 xor V with V ~ Bernoulli(p)."""

    p: Fraction
    q: Fraction
    kind = 2
    d = 2

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        object.__setattr__(self, "q", as_fraction(self.q))
        _open_half("p", self.p)
        _open_unit("q", self.q)

    def symbol_pmf(self):
        p, q = self.p, self.q
        return {
            (0, 0): (1 - p) * (1 - q),
            (0, 1): p * q,
            (1, 0): p * (1 - q),
            (1, 1): q * (1 - p),
        }

    def _sample(self, n, rng):
        x2 = (rng.random(n) < float(self.q)).astype(np.uint8)
        v = (rng.random(n) < float(self.p)).astype(np.uint8)
        return np.stack([x2 ^ v, x2])

    def describe(self):
        return f"p={self.p};q={self.q}"


@dataclass(frozen=True)
class Model3(SourceModel):
    """Markov chain on a tree with a BSC on every edge and uniform marginals."""

    tree: TreeTopology
    kind = 3

    @property
    def d(self) -> int:
        return self.tree.d

    @property
    def p(self) -> Fraction:
        return self.tree.p_max

    def symbol_pmf(self):
        root = self.tree.root
        order = self._outward_edges()
        pmf = {}
        for sym in itertools.product((0, 1), repeat=self.d):
            pr = Fraction(1, 2)
            for parent, child, p in order:
                pr *= p if sym[parent - 1] != sym[child - 1] else 1 - p
            pmf[sym] = pr
        assert sum(pmf.values()) == 1 and root >= 1
        return pmf

    def _outward_edges(self) -> list[tuple[int, int, Fraction]]:
        """Edges oriented away from the root, in breadth-first order."""
        root = self.tree.root
        out, seen, queue = [], {root}, deque([root])
        while queue:
            v = queue.popleft()
            for u in self.tree.neighbours[v]:
                if u not in seen:
                    seen.add(u)
                    out.append((v, u, self.tree.edge_p(v, u)))
                    queue.append(u)
        return out

    def _sample(self, n, rng):
        x = np.zeros((self.d, n), dtype=np.uint8)
        x[self.tree.root - 1] = rng.integers(0, 2, n, dtype=np.uint8)
        for parent, child, p in self._outward_edges():
            flips = (rng.random(n) < float(p)).astype(np.uint8)
            x[child - 1] = x[parent - 1] ^ flips
        return x

    def describe(self):
        return ";".join(f"p{i}{j}={p}" for i, j, p in self.tree.edges)


@dataclass(frozen=True)
class Model4(SourceModel):
    """Helper model: X3 uniform, X2 = X3 xor W, X1 = X2 xor X3 xor V."""

    p: Fraction
    q: Fraction
    kind = 4
    d = 3

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        object.__setattr__(self, "q", as_fraction(self.q))
        _open_half("p", self.p)
        _open_unit("q", self.q)

    def symbol_pmf(self):
        p, q = self.p, self.q
        a, b, c, e = (1 - p) * (1 - q) / 2, p * q / 2, p * (1 - q) / 2, q * (1 - p) / 2
        return {
            (0, 0, 0): a, (0, 1, 1): a,
            (0, 0, 1): b, (0, 1, 0): b,
            (1, 0, 0): c, (1, 1, 1): c,
            (1, 0, 1): e, (1, 1, 0): e,
        }

    def _sample(self, n, rng):
        x3 = rng.integers(0, 2, n, dtype=np.uint8)
        w = (rng.random(n) < float(self.q)).astype(np.uint8)
        v = (rng.random(n) < float(self.p)).astype(np.uint8)
        x2 = x3 ^ w
        return np.stack([x2 ^ x3 ^ v, x2, x3])

    def describe(self):
        return f"p={self.p};q={self.q}"


def make_model(kind: int, p=None, q=None, edges=None, d=None) -> SourceModel:
    if kind == 1:
        return Model1(p)
    if kind == 2:
        return Model2(p, q)
    if kind == 3:
        if not edges:
            raise ParameterError("model 3 needs a tree edge list")
        d = d or (max(max(i, j) for i, j, _ in edges))
        return Model3(TreeTopology(d, edges))
    if kind == 4:
        return Model4(p, q)
    raise ParameterError(f"unknown model {kind}; expected 1..4")


def sample_sequences(model: SourceModel, n: int, seed: int) -> list[BitWord]:
    """``n`` i.i.d. positions of the model, one word per terminal."""
    if n < 1:
        raise ParameterError("n must be positive")
    rows = model._sample(n, np.random.default_rng(seed))
    return [BitWord(r) for r in rows]


@dataclass(frozen=True)
class ExactJointPmf:
    """Exact law of the ``d`` words of length ``n``.

    ``words[t, i]`` is terminal ``i+1``'s packed word in outcome ``t``.
    Outcomes with the same joint type have the same probability, so
    probabilities are stored once per type: outcome ``t`` has
    probability ``class_prob[type_class[t]]``.
    """

    n: int
    d: int
    words: np.ndarray
    type_class: np.ndarray
    class_prob: tuple

    def prob(self, t: int) -> Fraction:
        return self.class_prob[int(self.type_class[t])]

    def __len__(self) -> int:
        return self.words.shape[0]

    def total(self) -> Fraction:
        counts = np.bincount(self.type_class, minlength=len(self.class_prob))
        return sum(int(c) * pr for c, pr in zip(counts, self.class_prob))

    def integer_weights(self) -> tuple[list[int], int]:
        """Class probabilities over a common denominator: ``(numerators, D)``."""
        den = math.lcm(*(pr.denominator for pr in self.class_prob))
        return [pr.numerator * (den // pr.denominator) for pr in self.class_prob], den


def joint_type_counts(words: np.ndarray, n: int) -> np.ndarray:
    """Counts of every symbol tuple over positions, shape ``(T, 2^d)``.

    Column ``a`` corresponds to the tuple whose bits, read with terminal
    1 as the most significant, spell ``a``.
    """
    d = words.shape[1]
    mask = np.uint64((1 << n) - 1)
    w = words.astype(np.uint64)
    cols = []
    for sym in itertools.product((0, 1), repeat=d):
        acc = np.full(w.shape[0], mask, dtype=np.uint64)
        for i, bit in enumerate(sym):
            acc &= w[:, i] if bit else (~w[:, i]) & mask
        cols.append(np.bitwise_count(acc).astype(np.int64))
    return np.stack(cols, axis=1)


def exact_joint_pmf(model: SourceModel, n: int, budget: int = DEFAULT_AUDIT_BUDGET) -> ExactJointPmf:
    """Enumerate all ``2^(d n)`` outcomes with exact rational probabilities."""
    d = model.d
    if n < 1:
        raise ParameterError("n must be positive")
    if (1 << (d * n)) > budget:
        raise CapacityError(f"2^{d * n} outcomes exceed the audit budget of {budget}")
    t = np.arange(1 << (d * n), dtype=np.int64)
    mask = (1 << n) - 1
    words = np.stack([(t >> (n * (d - 1 - i))) & mask for i in range(d)], axis=1)
    counts = joint_type_counts(words, n)
    radix = (n + 1) ** np.arange(counts.shape[1], dtype=np.int64)
    uniq, inverse = np.unique(counts @ radix, return_inverse=True)
    pmf = model.symbol_pmf()
    syms = list(itertools.product((0, 1), repeat=d))
    class_prob = []
    for code in uniq.tolist():
        pr = Fraction(1)
        for a, sym in enumerate(syms):
            c = (code // (n + 1) ** a) % (n + 1)
            if c:
                pr *= pmf[sym] ** c
        class_prob.append(pr)
    return ExactJointPmf(n, d, words, inverse.astype(np.int64).ravel(), tuple(class_prob))


def binary_entropy(p) -> float:
    """``h(p)`` in bits, with ``h(0) = h(1) = 0``."""
    p = float(p)
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def capacity(model: SourceModel) -> float:
    """Secret (Models 1-3) or private (Model 4) key capacity in bits per symbol."""
    if isinstance(model, Model1):
        return 1 - binary_entropy(model.p)
    if isinstance(model, (Model2, Model4)):
        p, q = model.p, model.q
        return binary_entropy(p + q - 2 * p * q) - binary_entropy(p)
    if isinstance(model, Model3):
        return 1 - binary_entropy(model.tree.p_max)
    raise ParameterError(f"unsupported model {model!r}")


def parse_model(text: str) -> SourceModel:
    """Read ``key = value`` lines (``model``, ``p``, ``q``, ``d``) and
    ``i j p_ij`` tree edge lines; ``#`` starts a comment."""
    fields: dict[str, str] = {}
    edges = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, val = (s.strip() for s in line.split("=", 1))
            fields[key.lower()] = val
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParameterError(f"cannot parse model line {raw!r}")
        edges.append((int(parts[0]), int(parts[1]), parts[2]))
    if "model" not in fields:
        raise ParameterError("model file lacks 'model = ...'")
    return make_model(
        int(fields["model"]),
        p=fields.get("p"),
        q=fields.get("q"),
        edges=edges or None,
        d=int(fields["d"]) if "d" in fields else None,
    )


def dump_model(model: SourceModel) -> str:
    lines = [f"model = {model.kind}"]
    if isinstance(model, Model3):
        lines.append(f"d = {model.d}")
        lines += [f"{i} {j} {p}" for i, j, p in model.tree.edges]
    else:
        lines.append(f"p = {model.p}")
        if hasattr(model, "q"):
            lines.append(f"q = {model.q}")
    return "\n".join(lines) + "\n"


def read_model(path) -> SourceModel:
    return parse_model(Path(path).read_text())
