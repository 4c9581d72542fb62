import random
from collections import Counter
from fractions import Fraction

import pytest
from scipy.stats import chisquare

from probeq.errors import DimError
from probeq.isolating import (RetryNeeded, WeightAssignment, extract_counterexample, iso_polynomial,
                              randomized_equivalence, randomized_zeroness, sample_weights)
from probeq.numerics import UniPoly
from probeq.weighted import WeightedAutomaton, difference, tzeng_zeroness, weight

from helpers import rand_pair, rand_weighted, words


def unit():
    return WeightedAutomaton.build("a", {"a": [[1]]}, [1], [1])


def chain_ab():
    return WeightedAutomaton.build("ab", {"a": [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
                                          "b": [[0, 0, 0], [0, 0, 1], [0, 0, 0]]}, [1, 0, 0], [0, 0, 1])


def test_sample_weights_range_and_determinism():
    a = WeightedAutomaton.zero(2, "a")
    wa = sample_weights(a, random.Random(9))
    assert len(wa.weights) == 2
    assert all(1 <= x <= 4 for x in wa.weights.values())
    assert sample_weights(a, random.Random(9)) == wa


def test_sample_weights_uniform():
    a = WeightedAutomaton.zero(2, "ab")
    r = random.Random(123)
    counts = Counter(sample_weights(a, r)[(1, "a")] for _ in range(10_000))
    upper = 2 * 2 * 2
    assert set(counts) <= set(range(1, upper + 1))
    obs = [counts[k] for k in range(1, upper + 1)]
    assert chisquare(obs).pvalue > 1e-4


def test_iso_polynomial_unit_example():
    wa = WeightAssignment(1, ("a",), {(1, "a"): 3})
    assert iso_polynomial(unit(), wa) == UniPoly({0: 1, 3: 1})


def test_iso_polynomial_zero_automaton():
    z = WeightedAutomaton.zero(3, "ab")
    r = random.Random(0)
    for _ in range(100):
        assert iso_polynomial(z, sample_weights(z, r)).is_zero()


def test_iso_polynomial_matches_enumeration():
    r = random.Random(4)
    for _ in range(15):
        n = r.randint(1, 4)
        alphabet = "ab"[: r.randint(1, 2)]
        a = rand_weighted(r, n, alphabet)
        wa = sample_weights(a, r)
        expect = {}
        for u in words(alphabet, n):
            d = wa.word_weight(u)
            expect[d] = expect.get(d, Fraction(0)) + weight(a, u)
        assert iso_polynomial(a, wa) == UniPoly(expect)


def test_iso_polynomial_dimension_mismatch():
    wa = WeightAssignment(2, ("a",), {(1, "a"): 1, (2, "a"): 1})
    with pytest.raises(DimError):
        iso_polynomial(unit(), wa)


def test_extract_unit_gives_empty_word():
    wa = WeightAssignment(1, ("a",), {(1, "a"): 3})
    p = iso_polynomial(unit(), wa)
    assert extract_counterexample(unit(), wa, p) == ()


def test_extract_chain_returns_ab():
    a = chain_ab()
    r = random.Random(8)
    hits = 0
    for _ in range(30):
        wa = sample_weights(a, r)
        u = extract_counterexample(a, wa, iso_polynomial(a, wa))
        if not isinstance(u, RetryNeeded):
            assert u == ("a", "b")
            hits += 1
    assert hits > 0


def test_extract_with_tie_never_returns_unverified_word():
    # "a" and "b" both weigh 1 and are tied at degree 1 under this assignment
    a = WeightedAutomaton.build("ab", {"a": [[0, 1], [0, 0]], "b": [[0, 1], [0, 0]]}, [1, 0], [0, 1])
    wa = WeightAssignment(2, ("a", "b"), {(1, "a"): 1, (1, "b"): 1, (2, "a"): 5, (2, "b"): 5})
    p = iso_polynomial(a, wa)
    assert p.coefficient(1) == 2
    out = extract_counterexample(a, wa, p)
    assert isinstance(out, RetryNeeded) or weight(a, out) != 0


def test_randomized_zeroness_examples():
    z = WeightedAutomaton.zero(3, "ab")
    assert randomized_zeroness(z, 10, 1).kind == "probably-zero"
    res = randomized_zeroness(unit(), 10, 1)
    assert res.kind == "nonzero" and weight(unit(), res.witness) != 0


def test_randomized_zeroness_detects_nonzero_automata():
    r = random.Random(10)
    checked = 0
    while checked < 200:
        b, c = rand_pair(r, max_n=4)
        a = difference(b, c)
        if tzeng_zeroness(a).positive:
            continue
        res = randomized_zeroness(a, 40, checked)
        assert res.kind == "nonzero"
        assert weight(a, res.witness) != 0
        checked += 1


def test_successful_extraction_sits_at_min_degree():
    r = random.Random(12)
    for seed in range(40):
        a = rand_weighted(r, 3, "ab")
        wa = sample_weights(a, random.Random(seed))
        p = iso_polynomial(a, wa)
        if p.is_zero():
            continue
        u = extract_counterexample(a, wa, p)
        if not isinstance(u, RetryNeeded):
            assert wa.word_weight(u) == p.min_degree()
            assert p.coefficient(wa.word_weight(u)) == weight(a, u)


def test_randomized_equivalence():
    r = random.Random(13)
    b = rand_weighted(r, 3, "ab")
    assert randomized_equivalence(b, b, 5, 0).kind == "probably-equivalent"
    c = WeightedAutomaton(b.alphabet, b.transitions, b.initial, b.final.scale(2))
    if not tzeng_zeroness(b).positive:
        res = randomized_equivalence(b, c, 40, 0)
        assert res.kind == "inequivalent"
        assert weight(b, res.witness) != weight(c, res.witness)


def test_same_seed_same_verdict():
    a = chain_ab()
    assert randomized_zeroness(a, 40, 77) == randomized_zeroness(a, 40, 77)
