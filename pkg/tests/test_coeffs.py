import itertools
import math
import random

import pytest

from qtwick import (
    CoefficientTable,
    NonPairClassError,
    PairPartition,
    QTPolynomial,
    ValidationError,
    build_table,
    derive_seed,
    normal_order,
    pair_limit_monomial,
    pair_pattern_is_default,
    sample_base,
    sampled_table,
)
from qtwick.coeffs import _beta_closed_form, _pair_rank


@pytest.fixture
def table():
    return build_table({(1, 2): 0.7}, 2.0)


def test_lookup_examples(table):
    assert table.lookup("*", "*", 1, 2) == 0.7
    assert table.lookup("*", "1", 1, 2) == 1.4
    assert table.lookup("1", "1", 1, 2) == pytest.approx(1 / 0.7, abs=0)
    assert table.lookup("1", "*", 2, 1) == pytest.approx(1 / 1.4, abs=0)
    assert table.lookup("*", "*", 2, 1) == pytest.approx(1 / 0.7, abs=0)
    assert table.lookup("1", "1", 2, 1) == 0.7


def test_lookup_validation(table):
    with pytest.raises(ValueError):
        table.lookup("x", "1", 1, 2)
    with pytest.raises(ValueError):
        table.lookup("1", "1", 2, 2)
    with pytest.raises(ValidationError):
        table.lookup("1", "1", 1, 3)


def test_table_validation():
    with pytest.raises(ValidationError):
        build_table({(1, 2): 1.0}, 0.0)
    with pytest.raises(ValidationError):
        build_table({(2, 1): 1.0}, 1.0)
    with pytest.raises(ValidationError):
        build_table({(1, 2): 0.0}, 1.0)


def test_covers_and_matrix():
    tb = sampled_table(4, 0.0, 1.0, 1)
    assert tb.covers(4) and not tb.covers(5)
    assert tb.max_index == 4
    m = tb.base_matrix(4)
    assert m.shape == (4, 4)
    assert m[0, 1] == tb.base_value(1, 2)
    assert m[1, 0] == 0.0
    with pytest.raises(ValidationError):
        tb.base_matrix(5)


def test_lookup_swap_inverts(table):
    rng = random.Random(3)
    for _ in range(50):
        n = 8
        base = {
            (i, j): rng.choice([1, -1]) * rng.uniform(0.2, 3.0)
            for j in range(2, n + 1)
            for i in range(1, j)
        }
        tb = build_table(base, rng.uniform(0.3, 2.5))
        i, j = rng.sample(range(1, n + 1), 2)
        for e1 in "1*":
            for e2 in "1*":
                prod = tb.lookup(e1, e2, i, j) * tb.lookup(e2, e1, j, i)
                assert prod == pytest.approx(1.0, abs=1e-14)
                # conjugating both letters also inverts
                c1 = "1" if e1 == "*" else "*"
                c2 = "1" if e2 == "*" else "*"
                assert tb.lookup(e1, e2, i, j) * tb.lookup(c1, c2, i, j) == pytest.approx(
                    1.0, abs=1e-14
                )


def test_lookup_star_one_scaling(table):
    # the (*, 1) entry is t times the (*, *) entry for i < j
    assert table.lookup("*", "1", 1, 2) == 2.0 * table.lookup("*", "*", 1, 2)


def test_derive_seed_pins():
    assert derive_seed(42, 0) == 13679457532755275413
    assert derive_seed(42, 1) == 2949826092126892291
    assert derive_seed(0, 0) == 16294208416658607535
    assert derive_seed(2**64 + 5, 0) == derive_seed(5, 0)


def test_pair_rank_is_cutoff_free():
    assert _pair_rank(1, 2) == 0
    assert _pair_rank(2, 3) == 2
    assert _pair_rank(1, 5) == 6
    ranks = [_pair_rank(i, j) for j in range(2, 30) for i in range(1, j)]
    assert sorted(ranks) == list(range(len(ranks)))


def test_sample_base_values_and_determinism():
    a = sample_base(6, 0.5, 1.25, 42)
    b = sample_base(6, 0.5, 1.25, 42)
    assert a == b
    assert set(a) == {(i, j) for j in range(2, 7) for i in range(1, j)}
    assert set(a.values()) <= {1.0, -1.0}
    assert sample_base(6, 0.5, 1.25, 43) != a


def test_sample_base_restriction():
    big = sample_base(9, 0.3, 0.9, 7)
    small = sample_base(5, 0.3, 0.9, 7)
    assert small == {k: v for k, v in big.items() if k[1] <= 5}


def test_sample_base_degenerate_laws():
    assert set(sample_base(8, 1.0, 1.0, 11).values()) == {1.0}
    assert set(sample_base(8, -1.0, 1.0, 11).values()) == {-1.0}


def test_sample_base_mean_pin():
    base = sample_base(448, 0.5, 1.25, 42)
    assert len(base) == 448 * 447 // 2
    mean = sum(base.values()) / len(base)
    assert mean == 0.4040428251837648
    assert abs(mean - 0.5 / 1.25) <= 0.02


def test_sample_base_validation():
    with pytest.raises(ValidationError):
        sample_base(3, 0.5, 0.0, 1)
    with pytest.raises(ValidationError):
        sample_base(3, 2.0, 1.0, 1)
    with pytest.raises(ValidationError):
        sample_base(0, 0.0, 1.0, 1)


def test_normal_order_examples(table):
    r = normal_order((1, 2, 1, 2), "11**", table)
    assert r.beta == 1.4
    assert r.pairing.pairs == ((1, 3), (2, 4))
    assert r.pattern == "1*1*"
    r = normal_order((1, 2, 2, 1), "11**", table)
    assert r.beta == pytest.approx(0.98, rel=1e-12)
    assert r.pairing.pairs == ((1, 4), (2, 3))
    r = normal_order((1, 2, 1, 2), "1*1*", table)
    assert r.beta == pytest.approx(1 / 1.4, abs=0)
    assert r.pattern == "11**"


def test_normal_order_trivial_cases(table):
    r = normal_order((3, 3), "1*", table)
    assert r.beta == 1.0 and r.pattern == "1*"
    with pytest.raises(NonPairClassError):
        normal_order((1, 1, 1, 1), "11**", table)
    with pytest.raises(NonPairClassError):
        normal_order((1, 2, 1), "111", table)
    with pytest.raises(ValueError):
        normal_order((1, 1), "1", table)


def test_normal_order_matches_closed_form_exhaustively():
    rng = random.Random(5)
    base = {
        (i, j): rng.choice([1, -1]) * rng.uniform(0.3, 2.0)
        for j in range(2, 5)
        for i in range(1, j)
    }
    tb = build_table(base, 1.7)
    from qtwick import enumerate_pair_partitions

    for n in (1, 2, 3, 4):
        for p in enumerate_pair_partitions(n):
            block = p.block_of()
            labels = rng.sample(range(1, 5), n)
            values = tuple(labels[block[pos] - 1] for pos in range(1, 2 * n + 1))
            for eps_bits in itertools.product("1*", repeat=2 * n):
                eps = "".join(eps_bits)
                # normal_order itself raises if the transposition product and
                # the crossing/nesting closed form drift apart
                r = normal_order(values, eps, tb)
                closed = _beta_closed_form(values, eps, p, tb)
                assert r.beta == pytest.approx(closed, rel=1e-9)
                assert r.pairing == p


def test_pair_limit_monomial():
    crossing = PairPartition(((1, 3), (2, 4)))
    nesting = PairPartition(((1, 4), (2, 3)))
    split = PairPartition(((1, 2), (3, 4)))
    assert pair_pattern_is_default(crossing, "11**")
    assert not pair_pattern_is_default(crossing, "1*1*")
    assert pair_limit_monomial(crossing, "11**") == QTPolynomial.monomial(1, 0)
    assert pair_limit_monomial(nesting, "11**") == QTPolynomial.monomial(0, 1)
    assert pair_limit_monomial(split, "1*1*") == QTPolynomial.one()
    assert pair_limit_monomial(crossing, "1*1*") == QTPolynomial.zero()
    with pytest.raises(ValueError):
        pair_limit_monomial(crossing, "1*")


def test_sampled_table_round_trip():
    tb = sampled_table(5, 0.5, 1.25, 9)
    assert isinstance(tb, CoefficientTable)
    assert tb.t == 1.25
    assert tb.covers(5)
    assert tb.base_value(2, 5) in (1.0, -1.0)
    assert math.isfinite(tb.lookup("1", "*", 5, 2))
