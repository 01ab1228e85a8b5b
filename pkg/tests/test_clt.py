import itertools
import json

import pytest

from qtwick import (
    ExperimentConfig,
    ExperimentReport,
    PairPartition,
    SizeLimitError,
    ValidationError,
    convergence_experiment,
    limit_coefficient_estimate,
    normal_order,
    partial_sum_moment,
    sampled_table,
    vacuum_expectation,
    wick_mixed,
)

CROSSING = PairPartition(((1, 3), (2, 4)))
NESTING = PairPartition(((1, 4), (2, 3)))
DISJOINT = PairPartition(((1, 2), (3, 4)))


def test_second_moment_is_exactly_one():
    for n in (1, 5, 25, 117):
        table = sampled_table(n, 0.5, 1.25, 42)
        assert partial_sum_moment(n, "1*", table) == 1.0


def test_odd_and_unbalanced_moments_vanish_exactly():
    table = sampled_table(12, 0.3, 0.9, 1)
    for eps in ("1", "*", "111", "1*1", "11*", "*1*"):
        assert partial_sum_moment(12, eps, table) == 0.0


def test_moment_agrees_with_site_by_site_sum():
    n = 6
    table = sampled_table(n, 0.5, 1.25, 6)
    for eps in ("11**", "1*1*", "1**1", "*11*"):
        brute = 0.0
        for tup in itertools.product(range(1, n + 1), repeat=len(eps)):
            ops = [(site, letter == "*") for site, letter in zip(tup, eps)]
            brute += vacuum_expectation(ops, n, table)
        brute /= n ** (len(eps) // 2)
        assert partial_sum_moment(n, eps, table) == pytest.approx(brute, abs=1e-12)


def test_moment_validation():
    table = sampled_table(3, 0.5, 1.25, 0)
    with pytest.raises(ValidationError):
        partial_sum_moment(0, "1*", table)
    with pytest.raises(SizeLimitError):
        partial_sum_moment(401, "1*", table)
    with pytest.raises(SizeLimitError):
        partial_sum_moment(3, "1*" * 5, table)
    with pytest.raises(ValidationError):
        partial_sum_moment(4, "1*", table)  # table covers only 3 sites


def test_estimate_single_pair_is_one():
    table = sampled_table(10, 0.5, 1.25, 0)
    assert limit_coefficient_estimate(PairPartition(((1, 2),)), "1*", 10, table) == 1.0


def test_estimate_disjoint_counts_offdiagonal_tuples():
    for n in (5, 40):
        table = sampled_table(n, 0.5, 1.25, 3)
        got = limit_coefficient_estimate(DISJOINT, "1*1*", n, table)
        assert got == (n * n - n) / n**2


def test_estimate_matches_tuple_average():
    n = 6
    table = sampled_table(n, 0.5, 1.25, 3)
    pairing = PairPartition(((1, 4), (2, 6), (3, 5)))
    eps = "111***"
    block = pairing.block_of()
    brute = 0.0
    for tup in itertools.permutations(range(1, n + 1), 3):
        values = tuple(tup[block[pos] - 1] for pos in range(1, 7))
        brute += normal_order(values, eps, table).beta
    brute /= n**3
    got = limit_coefficient_estimate(pairing, eps, n, table)
    assert got == pytest.approx(brute, rel=1e-12)


def test_estimate_two_pair_matches_tuple_average():
    n = 9
    table = sampled_table(n, -0.4, 0.8, 5)
    for pairing, eps in ((CROSSING, "11**"), (NESTING, "1*1*"), (CROSSING, "1**1")):
        block = pairing.block_of()
        brute = 0.0
        for tup in itertools.permutations(range(1, n + 1), 2):
            values = tuple(tup[block[pos] - 1] for pos in range(1, 5))
            brute += normal_order(values, eps, table).beta
        brute /= n**2
        got = limit_coefficient_estimate(pairing, eps, n, table)
        assert got == pytest.approx(brute, rel=1e-12)


def test_estimate_regression_pin():
    table = sampled_table(7, 0.5, 1.25, 3)
    got = limit_coefficient_estimate(
        PairPartition(((1, 4), (2, 6), (3, 5))), "111***", 7, table
    )
    assert got == 0.011388483965014577


def test_estimate_validation():
    table = sampled_table(8, 0.5, 1.25, 0)
    four = PairPartition(((1, 2), (3, 4), (5, 6), (7, 8)))
    with pytest.raises(SizeLimitError):
        limit_coefficient_estimate(four, "1*1*1*1*", 8, table)
    with pytest.raises(ValidationError):
        limit_coefficient_estimate(CROSSING, "1*", 8, table)
    with pytest.raises(ValidationError):
        limit_coefficient_estimate(
            PairPartition(((1, 4), (2, 6), (3, 5))), "111***", 2, table
        )
    with pytest.raises(SizeLimitError):
        limit_coefficient_estimate(
            PairPartition(((1, 4), (2, 6), (3, 5))), "111***", 500, table
        )


def test_config_validation_collects_all_problems():
    cfg = ExperimentConfig(mode="bogus", eps="1x", q=0.5, t=-1.0, ns=(), seed=0)
    problems = cfg.validate()
    assert len(problems) == 4
    joined = "; ".join(problems)
    assert "mode" in joined and "eps" in joined and "t > 0" in joined and "ns" in joined
    with pytest.raises(ValidationError) as err:
        convergence_experiment(cfg)
    assert ";" in str(err.value)


def test_config_validation_passes_good_configs():
    good = ExperimentConfig(
        mode="moment", eps="11**", q=0.5, t=1.25, ns=(5, 10), seed=0
    )
    assert good.validate() == []
    good = ExperimentConfig(
        mode="lambda", eps="11**", q=0.5, t=1.25, ns=(5, 10), seed=0, pairing=CROSSING
    )
    assert good.validate() == []


def test_config_validation_specifics():
    bad_ns = ExperimentConfig(mode="moment", eps="1*", q=0.5, t=1.25, ns=(5, 5), seed=0)
    assert any("increasing" in p for p in bad_ns.validate())
    too_big = ExperimentConfig(
        mode="moment", eps="1*", q=0.5, t=1.25, ns=(500,), seed=0
    )
    assert any("400" in p for p in too_big.validate())
    missing_pairing = ExperimentConfig(
        mode="lambda", eps="1*", q=0.5, t=1.25, ns=(5,), seed=0
    )
    assert any("pairing" in p for p in missing_pairing.validate())
    q_out = ExperimentConfig(mode="moment", eps="1*", q=2.0, t=1.0, ns=(5,), seed=0)
    assert any("|q| <= t" in p for p in q_out.validate())
    tuple_cap = ExperimentConfig(
        mode="lambda",
        eps="111***",
        q=0.5,
        t=1.25,
        ns=(400,),
        seed=0,
        pairing=PairPartition(((1, 4), (2, 6), (3, 5))),
    )
    assert any("tuples" in p for p in tuple_cap.validate())


def test_moment_experiment_frozen_values():
    cfg = ExperimentConfig(
        mode="moment", eps="11**", q=0.5, t=1.25, ns=(25, 50, 100, 200), seed=42
    )
    report = convergence_experiment(cfg)
    values = [row.value for row in report.rows]
    assert values == [
        1.5440000000000003,
        1.7260000000000004,
        1.7310000000000003,
        1.7383750000000004,
    ]
    assert all(row.target == 1.75 for row in report.rows)
    assert report.rows[0].abs_err == pytest.approx(0.206, abs=1e-12)
    target = wick_mixed("11**").evaluate(0.5, 1.25)
    assert target == 1.75


def test_experiment_rows_are_restriction_stable():
    short = ExperimentConfig(mode="moment", eps="11**", q=0.5, t=1.25, ns=(5, 10), seed=9)
    long = ExperimentConfig(
        mode="moment", eps="11**", q=0.5, t=1.25, ns=(5, 10, 20), seed=9
    )
    a = convergence_experiment(short).rows
    b = convergence_experiment(long).rows
    assert [(r.n, r.value) for r in a] == [(r.n, r.value) for r in b[:2]]


def test_lambda_experiment_exact_disjoint():
    cfg = ExperimentConfig(
        mode="lambda",
        eps="1*1*",
        q=0.5,
        t=1.25,
        ns=(10, 20),
        seed=4,
        pairing=DISJOINT,
    )
    report = convergence_experiment(cfg)
    assert [row.value for row in report.rows] == [1 - 1 / 10, 1 - 1 / 20]
    assert all(row.target == 1.0 for row in report.rows)
    assert report.rows[1].abs_err == pytest.approx(1 / 20, abs=1e-15)


def test_lambda_experiment_without_default_pattern_has_no_target():
    cfg = ExperimentConfig(
        mode="lambda",
        eps="1**1",
        q=0.5,
        t=1.25,
        ns=(6, 12),
        seed=4,
        pairing=CROSSING,
    )
    report = convergence_experiment(cfg)
    assert all(row.target is None and row.abs_err is None for row in report.rows)
    csv_text = report.to_csv()
    assert ",none,none" in csv_text


def test_csv_shape_and_determinism():
    cfg = ExperimentConfig(
        mode="moment", eps="11**", q=0.5, t=1.25, ns=(10, 20), seed=7
    )
    first = convergence_experiment(cfg).to_csv()
    second = convergence_experiment(cfg).to_csv()
    assert first == second
    lines = first.splitlines()
    assert lines[0] == "# command: clt"
    assert "N,eps,q,t,seed,mode,value,target,abs_err" in lines
    data = [l for l in lines if not l.startswith("#") and not l.startswith("N,")]
    assert len(data) == 2
    assert data[0].startswith("10,11**,0.5,1.25,7,moment,")
    assert first.endswith("\n")


def test_metadata_contents():
    cfg = ExperimentConfig(
        mode="lambda", eps="11**", q=0.5, t=1.25, ns=(5, 10), seed=3, pairing=CROSSING
    )
    meta = convergence_experiment(cfg).metadata()
    assert list(meta) == [
        "command",
        "version",
        "mode",
        "eps",
        "q",
        "t",
        "seed",
        "ns",
        "pairing",
    ]
    assert meta["pairing"] == "1-3;2-4"
    assert meta["ns"] == "5,10"


def test_json_round_trip():
    cfg = ExperimentConfig(mode="moment", eps="1*", q=0.0, t=1.0, ns=(3,), seed=0)
    report = convergence_experiment(cfg)
    payload = json.loads(report.to_json())
    assert payload["metadata"]["command"] == "clt"
    assert payload["rows"][0]["value"] == 1.0
    assert payload["rows"][0]["N"] == 3
    assert isinstance(report, ExperimentReport)
