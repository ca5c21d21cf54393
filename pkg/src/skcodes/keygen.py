"""
One-shot key generation protocols for the four source models.

Every protocol is a pure function of its inputs and seeds. The public
messages are returned as a :class:`Transcript`; the keys as a
:class:`KeyOutcome` indexed by terminal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, ParameterError
from .gf2 import BitWord, xor_add
from .lincode import LinearCode, coset_index, ml_decode_noise, sw_reconstruct
from .sources import TreeTopology, tree_path
from .typeset import RegularPartition

SYNDROME = "syndrome"
REVEAL = "reveal"


@dataclass(frozen=True)
class Transcript:
    """Public messages in the order they are sent: ``(terminal, kind, word)``."""

    messages: tuple

    def dump(self) -> str:
        return "".join(f"{t} {kind} {w.to_hex()}\n" for t, kind, w in self.messages)

    def syndromes(self) -> dict[int, BitWord]:
        return {t: w for t, kind, w in self.messages if kind == SYNDROME}

    def __len__(self) -> int:
        return len(self.messages)


def parse_transcript(text: str, lengths: dict[str, int]) -> Transcript:
    """Inverse of :meth:`Transcript.dump`; ``lengths`` maps kind to bit length."""
    msgs = []
    for line in text.splitlines():
        if not line.strip():
            continue
        t, kind, hexbits = line.split()
        msgs.append((int(t), kind, BitWord.from_int(int(hexbits, 16), lengths[kind])))
    return Transcript(tuple(msgs))


@dataclass(frozen=True)
class KeyOutcome:
    """Key per terminal (1-based dict), common key range and fallback flags."""

    keys: dict
    key_range: int
    fallback: dict

    def __post_init__(self):
        for t, k in self.keys.items():
            if not 0 <= k < self.key_range:
                raise ParameterError(f"key {k} of terminal {t} outside [0, {self.key_range})")

    def agree(self) -> bool:
        return len(set(self.keys.values())) == 1


def fallback_key(seed: int, terminal: int, L: int) -> int:
    """Private uniform draw on ``[0, L)`` for a terminal outside every regular subset."""
    return int(np.random.default_rng([seed, terminal]).integers(L))


def _check_lengths(code: LinearCode, *words: BitWord) -> None:
    for w in words:
        if w.length != code.n:
            raise DimensionError(f"word length {w.length} != n = {code.n}")


def run_model1(code: LinearCode, x1: BitWord, x2: BitWord, p) -> tuple[KeyOutcome, Transcript]:
    """Terminal 1 publishes its syndrome; both index their word within the coset."""
    _check_lengths(code, x1, x2)
    s1 = code.syndrome(x1)
    x2_hat = sw_reconstruct(code, x2, s1, p)
    k1 = coset_index(code, x1)[1]
    k2 = coset_index(code, x2_hat)[1]
    out = KeyOutcome({1: k1, 2: k2}, 1 << code.k, {1: False, 2: False})
    return out, Transcript(((1, SYNDROME, s1),))


def _partition_key(partition: RegularPartition, x: BitWord, seed: int, terminal: int) -> tuple[int, bool]:
    k = int(partition.key_of[x.to_int()])
    if k >= 0:
        return k, False
    return fallback_key(seed, terminal, partition.L), True


def _check_partition(code: LinearCode, partition: RegularPartition, x3: Optional[BitWord]) -> None:
    if partition.code != code:
        raise ParameterError("partition was built for a different code")
    want = None if x3 is None else x3.to_int()
    if partition.x3 != want:
        raise ParameterError("partition was built for a different conditioning word x3")


def run_model2(
    code: LinearCode,
    partition: RegularPartition,
    x1: BitWord,
    x2: BitWord,
    p,
    seed: int,
) -> tuple[KeyOutcome, Transcript]:
    """Model 1 reconciliation, keys read from same-type regular subsets."""
    _check_lengths(code, x1, x2)
    _check_partition(code, partition, None)
    s1 = code.syndrome(x1)
    x2_hat = sw_reconstruct(code, x2, s1, p)
    k1, f1 = _partition_key(partition, x1, seed, 1)
    k2, f2 = _partition_key(partition, x2_hat, seed, 2)
    return KeyOutcome({1: k1, 2: k2}, partition.L, {1: f1, 2: f2}), Transcript(((1, SYNDROME, s1),))


def run_model3(code: LinearCode, tree: TreeTopology, xs: Sequence[BitWord]) -> tuple[KeyOutcome, Transcript]:
    """Every terminal publishes a syndrome; each non-root terminal walks the
    tree path to the root ``i*`` decoding one hop at a time."""
    if len(xs) != tree.d:
        raise ParameterError(f"{len(xs)} words for a tree with {tree.d} terminals")
    _check_lengths(code, *xs)
    p = tree.p_max
    syn = {i + 1: code.syndrome(x) for i, x in enumerate(xs)}
    root = tree.root
    keys = {root: coset_index(code, xs[root - 1])[1]}
    for i in range(1, tree.d + 1):
        if i == root:
            continue
        path = tree_path(tree, i, root)
        est = xs[i - 1]
        for a, b in zip(path, path[1:]):
            est = xor_add(est, ml_decode_noise(code, xor_add(syn[a], syn[b]), p))
        keys[i] = coset_index(code, est)[1]
    keys = dict(sorted(keys.items()))
    transcript = Transcript(tuple((i, SYNDROME, syn[i]) for i in sorted(syn)))
    return KeyOutcome(keys, 1 << code.k, {i: False for i in keys}), transcript


def run_model4(
    code: LinearCode,
    partition: RegularPartition,
    x1: BitWord,
    x2: BitWord,
    x3: BitWord,
    p,
    seed: int,
) -> tuple[KeyOutcome, Transcript]:
    """Terminal 3 reveals ``x3``; terminal 2 decodes ``x1`` from ``x2 xor x3``."""
    _check_lengths(code, x1, x2, x3)
    _check_partition(code, partition, x3)
    s1 = code.syndrome(x1)
    x2_hat = sw_reconstruct(code, xor_add(x2, x3), s1, p)
    k1, f1 = _partition_key(partition, x1, seed, 1)
    k2, f2 = _partition_key(partition, x2_hat, seed, 2)
    transcript = Transcript(((3, REVEAL, x3), (1, SYNDROME, s1)))
    return KeyOutcome({1: k1, 2: k2}, partition.L, {1: f1, 2: f2}), transcript
