import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probeq.errors import AlphabetError, NotWellMatched, SymbolError
from probeq.numerics import QMatrix
from probeq.vpa import (VisiblyAlphabet, WeightedVPA, linearize, parse_well_matched, product,
                        sample_well_matched, sparse_product, vpa_weight, well_matched_level,
                        well_matched_words)

from helpers import SMALL_VPA_ALPHABET as AB, derivations, naive_vpa_weight, rand_vpa


def in_level(w, k, alphabet):
    """Membership in L_k straight from the grammar (exponential; short words only)."""
    w = tuple(w)
    if k == 0:
        return len(w) == 0 or (len(w) == 1 and alphabet.kind(w[0]) == "internal")
    if in_level(w, k - 1, alphabet):
        return True
    if len(w) >= 2 and alphabet.kind(w[0]) == "call" and alphabet.kind(w[-1]) == "return":
        if in_level(w[1:-1], k - 1, alphabet):
            return True
    return any(in_level(w[:i], k - 1, alphabet) and in_level(w[i:], k - 1, alphabet)
               for i in range(1, len(w)))


def test_alphabet_must_be_disjoint():
    with pytest.raises(AlphabetError):
        VisiblyAlphabet(("a",), ("a",), ())
    with pytest.raises(AlphabetError):
        VisiblyAlphabet((), (), ())


def test_parse_examples():
    assert parse_well_matched((), AB).tree is None
    assert parse_well_matched(("c", "i", "r"), AB).tree == ("nest", "c", "i", "r")
    t = parse_well_matched(("c", "r", "c", "r"), AB).tree
    assert t == ("cat", ("nest", "c", None, "r"), ("nest", "c", None, "r"))
    with pytest.raises(NotWellMatched):
        parse_well_matched(("r", "c"), AB)
    with pytest.raises(NotWellMatched):
        parse_well_matched(("c", "i"), AB)


def test_concatenation_associates_left():
    t = parse_well_matched(("i", "i", "i"), AB).tree
    assert t == ("cat", ("cat", "i", "i"), "i")


def test_parse_round_trips():
    r = random.Random(0)
    for _ in range(200):
        w = sample_well_matched(AB, 5, r)
        assert linearize(w.tree) == w.symbols
        assert parse_well_matched(w.symbols, AB).symbols == w.symbols


def test_weight_examples():
    r = random.Random(1)
    v = rand_vpa(r, 3, AB)
    alpha, eta = v.initial, v.final
    assert vpa_weight(v, ()) == (alpha @ eta)[(0, 0)]
    m = v.internal["i"]
    assert vpa_weight(v, ("i", "i")) == (alpha @ m @ m @ eta)[(0, 0)]
    with pytest.raises(SymbolError):
        vpa_weight(v, ("z",))


def test_weight_matches_run_semantics():
    r = random.Random(2)
    for _ in range(30):
        v = rand_vpa(r, 2, AB)
        w = sample_well_matched(AB, 4, r)
        assert vpa_weight(v, w) == naive_vpa_weight(v, w.symbols)


def test_product_with_unit_automaton():
    r = random.Random(3)
    a = rand_vpa(r, 3, AB)
    one = QMatrix([[1]])
    unit = WeightedVPA(1, AB, ("u",), {("c", "u"): one}, {("r", "u"): one}, {"i": one}, one, one)
    p = product(a, unit)
    for _ in range(30):
        w = sample_well_matched(AB, 4, r)
        assert vpa_weight(p, w) == vpa_weight(a, w)


def test_product_identity():
    r = random.Random(4)
    for _ in range(50):
        a, b = rand_vpa(r, r.randint(1, 3), AB), rand_vpa(r, r.randint(1, 3), AB, stack=("p",))
        p = product(a, b)
        assert p.n == a.n * b.n and len(p.stack) == len(a.stack) * len(b.stack)
        w = sample_well_matched(AB, 4, r)
        assert vpa_weight(p, w) == vpa_weight(a, w) * vpa_weight(b, w)
        assert vpa_weight(product(a, a), w) == vpa_weight(a, w) ** 2
        assert vpa_weight(sparse_product(a, b), w) == vpa_weight(p, w)


def test_product_alphabet_mismatch():
    r = random.Random(5)
    other = VisiblyAlphabet(("c",), ("r",), ("j",))
    with pytest.raises(AlphabetError):
        product(rand_vpa(r, 1, AB), rand_vpa(r, 1, other))


def test_sample_depth_zero():
    r = random.Random(6)
    for _ in range(50):
        w = sample_well_matched(AB, 0, r)
        assert len(w) <= 1 and all(AB.kind(a) == "internal" for a in w.symbols)


def test_samples_stay_in_level():
    r = random.Random(7)
    for _ in range(10_000):
        w = sample_well_matched(AB, 5, r)
        assert well_matched_level(w.symbols, AB) <= 5


def test_level_matches_grammar():
    for w in well_matched_words(AB, 6):
        k = well_matched_level(w, AB)
        assert in_level(w, k, AB)
        assert k == 0 or not in_level(w, k - 1, AB)


def test_derivation_words_are_in_level():
    for k in range(3):
        for w in derivations(AB, k):
            assert well_matched_level(w, AB) <= k


def test_well_matched_words_enumeration():
    ws = list(well_matched_words(AB, 4))
    assert ws[0] == ()
    assert ("c", "r") in ws and ("c", "i", "r", "i") in ws
    assert all(len(w) <= 4 for w in ws)
    assert len(set(ws)) == len(ws)
    brute = set()
    import itertools
    for n in range(5):
        for w in itertools.product(("c", "r", "i"), repeat=n):
            try:
                parse_well_matched(w, AB)
                brute.add(w)
            except NotWellMatched:
                pass
    assert set(ws) == brute


def test_weights_are_exact_rationals():
    v = rand_vpa(random.Random(8), 2, AB)
    assert isinstance(vpa_weight(v, ("c", "i", "r")), F)


def _interval_dp(xs):
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def f(i, j):
        if j - i == 1:
            return xs[i]
        return min(max(f(i, k), f(k, j)) + 1 for k in range(i + 1, j))

    return f(0, len(xs))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=10))
def test_concatenation_level_matches_interval_dp(levels):
    # a word whose top-level factors sit at exactly these levels
    def factor(k):
        return ("i",) if k == 0 else ("c",) + factor(k - 1) + ("r",)

    w = sum((factor(k) for k in levels), ())
    assert well_matched_level(w, AB) == _interval_dp(tuple(levels))
