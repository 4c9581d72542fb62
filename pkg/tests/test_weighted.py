import random
from fractions import Fraction

import pytest

from probeq.errors import AlphabetError, BudgetError, SymbolError
from probeq.numerics import QMatrix
from probeq.weighted import (WeightedAutomaton, brute_force_zeroness, difference, equivalence,
                             tzeng_zeroness, weight, words_upto)

from helpers import conjugate, naive_weight, rand_pair, rand_weighted, words


def one_state(m=1, alpha=1, eta=1):
    return WeightedAutomaton.build("a", {"a": [[m]]}, [alpha], [eta])


def test_weight_examples():
    a = one_state(2, 1, 3)
    assert weight(a, "aa") == 12
    assert weight(a, "") == 3
    b = WeightedAutomaton.build("ab", {"a": [[1, 1], [0, 2]], "b": [[0, 1], [1, 0]]}, [1, 0], [0, 0])
    assert all(weight(b, w) == 0 for w in words("ab", 4))


def test_weight_unknown_symbol():
    with pytest.raises(SymbolError):
        weight(one_state(), "z")


def test_weight_matches_path_sum():
    r = random.Random(1)
    for _ in range(10):
        a = rand_weighted(r, 4, "ab")
        w = tuple(r.choice("ab") for _ in range(6))
        assert weight(a, w) == naive_weight(a, w)


def test_difference_identity():
    r = random.Random(2)
    for _ in range(10):
        b, c = rand_weighted(r, 2, "ab"), rand_weighted(r, 3, "ab")
        d = difference(b, c)
        assert d.n == 5
        for w in words("ab", 3):
            assert weight(d, w) == weight(b, w) - weight(c, w)
    b = rand_weighted(r, 3, "ab")
    assert all(weight(difference(b, b), w) == 0 for w in words("ab", 4))
    z = WeightedAutomaton.zero(2, "ab")
    assert all(weight(difference(b, z), w) == weight(b, w) for w in words("ab", 4))


def test_difference_alphabet_mismatch():
    with pytest.raises(AlphabetError):
        difference(rand_weighted(random.Random(0), 2, "ab"), rand_weighted(random.Random(0), 2, "ac"))


def test_tzeng_examples():
    assert tzeng_zeroness(WeightedAutomaton.zero(3, "ab")).kind == "zero"
    res = tzeng_zeroness(one_state())
    assert res.kind == "nonzero" and res.witness == ()


def test_brute_force_examples():
    assert brute_force_zeroness(WeightedAutomaton.zero(3, "ab")).kind == "zero"
    assert brute_force_zeroness(one_state()).witness == ()
    with pytest.raises(BudgetError):
        brute_force_zeroness(WeightedAutomaton.zero(12, "abc"), budget=1000)


def test_tzeng_agrees_with_brute_force():
    r = random.Random(3)
    for _ in range(200):
        b, c = rand_pair(r)
        a = difference(b, c)
        t = tzeng_zeroness(a)
        bf = brute_force_zeroness(a)
        assert t.kind == bf.kind
        if t.witness is not None:
            assert len(t.witness) <= a.n - 1
            assert weight(a, t.witness) != 0
            # the first non-zero word in length-lex order
            assert t.witness == bf.witness


def test_tzeng_witness_is_shortest():
    # only "ab" has non-zero weight: chain 0 -a-> 1 -b-> 2
    a = WeightedAutomaton.build("ab", {"a": [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
                                       "b": [[0, 0, 0], [0, 0, 1], [0, 0, 0]]}, [1, 0, 0], [0, 0, 1])
    assert tzeng_zeroness(a).witness == ("a", "b")


def test_equivalence_examples():
    r = random.Random(4)
    b = rand_weighted(r, 3, "ab")
    assert equivalence(b, b).kind == "equivalent"
    # two 2-state automata weighing 1 on every word
    c1 = WeightedAutomaton.build("a", {"a": [[1, 0], [0, 1]]}, [1, 0], [1, 1])
    c2 = WeightedAutomaton.build("a", {"a": [[0, 1], [1, 0]]}, [0, 1], [1, 1])
    assert all(weight(c1, w) == weight(c2, w) == 1 for w in words("a", 3))
    assert equivalence(c1, c2).kind == "equivalent"


def test_equivalence_detects_perturbation():
    base = WeightedAutomaton.build("ab", {"a": [[Fraction(1, 2), Fraction(1, 2)], [0, 1]],
                                          "b": [[0, 1], [Fraction(1, 3), 0]]}, [1, 0], [0, 1])
    bumped = WeightedAutomaton.build("ab", {"a": [[Fraction(1, 2), Fraction(1, 2)], [0, 1]],
                                            "b": [[0, 1], [Fraction(1, 4), 0]]}, [1, 0], [0, 1])
    res = equivalence(base, bumped)
    assert res.kind == "inequivalent"
    assert weight(base, res.witness) != weight(bumped, res.witness)


def test_equivalence_reflexive_and_symmetric():
    r = random.Random(6)
    for _ in range(40):
        b, c = rand_pair(r)
        assert equivalence(b, b).positive
        assert equivalence(b, c).kind == equivalence(c, b).kind
    b = rand_weighted(r, 3, "ab")
    assert equivalence(b, conjugate(b, r)).positive


def test_words_upto_order():
    assert list(words_upto("ab", 2)) == [(), ("a",), ("b",), ("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]


def test_qmatrix_dims_checked():
    with pytest.raises(ValueError):
        WeightedAutomaton("a", {"a": QMatrix([[1, 0], [0, 1]])}, QMatrix([[1]]), QMatrix([[1]]))
