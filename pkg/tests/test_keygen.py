import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from skcodes.errors import DimensionError, ParameterError
from skcodes.gf2 import BitWord, xor_add
from skcodes.keygen import (
    REVEAL,
    SYNDROME,
    KeyOutcome,
    fallback_key,
    parse_transcript,
    run_model1,
    run_model2,
    run_model3,
    run_model4,
)
from skcodes.lincode import exact_ml_error_prob, hamming74, named_code
from skcodes.sources import Model2, Model4, TreeTopology
from skcodes.typeset import build_regular_partition

words7 = st.integers(0, 127).map(lambda v: BitWord.from_int(v, 7))


@pytest.fixture(scope="module")
def part2():
    return build_regular_partition(named_code("hamming84"), Model2("1/20", "3/10"), 0.1, 0.35)


def part4(x3):
    return build_regular_partition(named_code("hamming63"), Model4("1/20", "3/10"), 0.05, 0.4, x3=x3)


class TestModel1:
    @given(words7)
    def test_noiseless(self, x):
        out, tr = run_model1(hamming74(), x, x, 0.05)
        assert out.agree()
        assert out.key_range == 16

    def test_correctable(self, hamming):
        x2 = BitWord("1001110")
        out, _ = run_model1(hamming, xor_add(x2, BitWord.unit(7, 4)), x2, 0.05)
        assert out.keys[1] == out.keys[2]

    def test_key_is_information_prefix(self, hamming):
        x = BitWord("1011001")
        out, tr = run_model1(hamming, x, x, 0.05)
        assert out.keys[1] == 0b1011
        assert tr.messages == ((1, SYNDROME, hamming.syndrome(x)),)

    def test_exhaustive_disagreement(self, hamming):
        p = Fraction(1, 100)
        miss = Fraction(0)
        for a, b in itertools.product(range(128), repeat=2):
            out, _ = run_model1(hamming, BitWord.from_int(a, 7), BitWord.from_int(b, 7), p)
            if not out.agree():
                w = bin(a ^ b).count("1")
                miss += Fraction(1, 128) * p**w * (1 - p) ** (7 - w)
        assert miss == exact_ml_error_prob(hamming, p)
        assert float(miss) == pytest.approx(0.002031, abs=5e-7)

    def test_dimension(self, hamming):
        with pytest.raises(DimensionError):
            run_model1(hamming, BitWord("101"), BitWord("101"), 0.1)


class TestModel2:
    def test_member_reconstructed(self, part2):
        code = part2.code
        x1 = BitWord.from_int(part2.subsets[min(part2.subsets)][0][2], 8)
        out, tr = run_model2(code, part2, x1, x1, "1/20", seed=1)
        assert out.agree() and out.fallback == {1: False, 2: False}
        assert out.keys[1] == 2 and out.key_range == 4
        assert len(tr) == 1

    def test_residual_falls_back(self, part2):
        x1 = BitWord.from_int(part2.residual()[0], 8)
        out, _ = run_model2(part2.code, part2, x1, x1, "1/20", seed=7)
        assert out.fallback[1] and out.fallback[2]
        assert out.keys[1] == fallback_key(7, 1, 4)
        assert 0 <= out.keys[2] < 4

    def test_degenerate_uniform(self):
        code = hamming74()
        part = build_regular_partition(code, Model2("1/10", "1/2"), 0.1, 0.45)
        for a, b in [(0, 0), (5, 9), (127, 3)]:
            out, _ = run_model2(code, part, BitWord.from_int(a, 7), BitWord.from_int(b, 7), 0.1, seed=0)
            assert out.keys == {1: 0, 2: 0}

    def test_partition_mismatch(self, part2):
        with pytest.raises(ParameterError):
            run_model2(named_code("random:8,4,0"), part2, BitWord.zeros(8), BitWord.zeros(8), 0.05, 0)

    def test_fallback_private_per_terminal(self):
        draws = {(fallback_key(3, t, 1 << 20)) for t in (1, 2)}
        assert len(draws) == 2
        assert fallback_key(3, 1, 1 << 20) == fallback_key(3, 1, 1 << 20)


class TestModel3:
    def test_two_terminals_is_model1(self, hamming):
        tree = TreeTopology(2, [(1, 2, "1/10")])
        for a, b in [(0, 0), (3, 100), (77, 76), (127, 1)]:
            x1, x2 = BitWord.from_int(a, 7), BitWord.from_int(b, 7)
            k3, _ = run_model3(hamming, tree, [x1, x2])
            k1, _ = run_model1(hamming, x1, x2, Fraction(1, 10))
            assert k3.keys == k1.keys

    def test_chain_noiseless(self, hamming):
        tree = TreeTopology.chain(["1/20", "1/10"])
        x = BitWord("0110110")
        out, tr = run_model3(hamming, tree, [x, x, x])
        assert out.agree() and len(tr) == 3

    def test_chain_single_flips(self, hamming):
        tree = TreeTopology.chain(["1/20", "1/10"])
        x1 = BitWord("1010011")
        for i, j in itertools.product(range(7), repeat=2):
            x2 = xor_add(x1, BitWord.unit(7, i))
            x3 = xor_add(x2, BitWord.unit(7, j))
            out, _ = run_model3(hamming, tree, [x1, x2, x3])
            assert out.agree()

    def test_root_key_is_own_prefix(self, hamming):
        tree = TreeTopology.chain(["1/20", "1/10"])
        xs = [BitWord("1111111"), BitWord("0000111"), BitWord("1100000")]
        out, _ = run_model3(hamming, tree, xs)
        assert out.keys[tree.root] == 0b0000

    def test_topology_mismatch(self, hamming):
        with pytest.raises(ParameterError):
            run_model3(hamming, TreeTopology.chain(["1/10"]), [BitWord.zeros(7)] * 3)


class TestModel4:
    def test_noiseless_member(self):
        y = BitWord("101100")
        part = part4(y)
        w = part.subsets[min(part.subsets)][0][1]
        x1 = BitWord.from_int(w, 6)
        x2 = xor_add(x1, y)
        out, tr = run_model4(part.code, part, x1, x2, y, "1/20", seed=2)
        assert out.agree() and not out.fallback[1]
        assert [m[:2] for m in tr.messages] == [(3, REVEAL), (1, SYNDROME)]
        assert tr.messages[0][2] == y

    def test_residual_falls_back(self):
        y = BitWord("000000")
        part = part4(y)
        x1 = BitWord.from_int(part.residual()[0], 6)
        out, _ = run_model4(part.code, part, x1, xor_add(x1, y), y, "1/20", seed=2)
        assert out.fallback[1]

    def test_wrong_conditioning_word(self):
        part = part4(BitWord("000000"))
        with pytest.raises(ParameterError):
            run_model4(part.code, part, BitWord.zeros(6), BitWord.zeros(6), BitWord("000001"), 0.05, 0)


class TestTranscript:
    def test_dump_and_parse(self):
        y = BitWord("101100")
        part = part4(y)
        _, tr = run_model4(part.code, part, BitWord("110011"), BitWord("000111"), y, "1/20", seed=0)
        text = tr.dump()
        assert text.splitlines()[0] == "3 reveal 2c"
        assert parse_transcript(text, {REVEAL: 6, SYNDROME: 3}) == tr

    def test_syndromes(self, hamming):
        xs = [BitWord("1000000"), BitWord("0100000"), BitWord("0010000")]
        _, tr = run_model3(hamming, TreeTopology.chain(["1/10", "1/10"]), xs)
        assert tr.syndromes() == {i + 1: hamming.syndrome(x) for i, x in enumerate(xs)}

    def test_key_range_enforced(self):
        with pytest.raises(ParameterError):
            KeyOutcome({1: 4}, 4, {1: False})
