"""Metric correctness against independently written oracles."""

import json
import math
import random

import numpy as np
import pytest
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from reviewkit.errors import InvalidInputError, UndefinedCorrelationError, UndefinedMetricError
from reviewkit.metrics import (
    PairPolicy,
    concordance_index,
    evaluate_run,
    mse,
    pair_absolute,
    pair_confidence,
    pair_relation,
    render_report_table,
    spearman,
)

ratings = st.floats(min_value=1.0, max_value=10.0, allow_nan=False)


# --- independent oracles -------------------------------------------------

def oracle_pair_relation(s1, s2, t1, t2):
    def sgn(x):
        if x > 0:
            return 1
        if x < 0:
            return -1
        return 0

    return 1.0 if sgn(s1 - s2) == sgn(t1 - t2) else 0.0


def oracle_pair_absolute(s1, s2, t1, t2):
    d = abs(s1 - t1) + abs(s2 - t2)
    if d == 0:
        return 1.0
    if d <= 2:
        return 0.6
    return 0.0


def oracle_pair_confidence(s1, s2, t1, t2):
    return 1.0 if abs(s1 - s2) >= abs(t1 - t2) else 0.0


def oracle_concordance(predicted, truth):
    total, comparable = 0.0, 0
    for i in range(len(truth)):
        for j in range(len(truth)):
            if i < j and truth[i] != truth[j]:
                comparable += 1
                lo, hi = (i, j) if truth[i] < truth[j] else (j, i)
                if predicted[lo] < predicted[hi]:
                    total += 1.0
                elif predicted[lo] == predicted[hi]:
                    total += 0.5
    return total / comparable


def oracle_spearman(predicted, truth):
    ranks = lambda xs: scipy.stats.rankdata(xs, method="average")  # noqa: E731
    return float(np.corrcoef(ranks(predicted), ranks(truth))[0, 1])


class TestMse:
    def test_identical(self):
        assert mse([6, 6], [6, 6]) == 0.0

    def test_simple(self):
        assert mse([5, 7], [6, 6]) == 1.0

    def test_against_two_pass_oracle(self):
        rng = random.Random(11)
        for _ in range(100):
            n = rng.randint(1, 40)
            predicted = [rng.uniform(1, 10) for _ in range(n)]
            truth = [rng.uniform(1, 10) for _ in range(n)]
            naive = sum((p - t) ** 2 for p, t in zip(predicted, truth)) / n
            assert abs(mse(predicted, truth) - naive) < 1e-12

    def test_errors(self):
        with pytest.raises(InvalidInputError):
            mse([1], [1, 2])
        with pytest.raises(InvalidInputError):
            mse([], [])


class TestSpearman:
    def test_perfect_agreement(self):
        assert spearman([1, 2, 3, 4], [2, 5, 7, 9]) == 1.0

    def test_perfect_inversion(self):
        assert spearman([4, 3, 2, 1], [1, 2, 3, 4]) == -1.0

    def test_tied_example_matches_rank_oracle(self):
        value = spearman([1, 2, 2, 3], [1, 3, 2, 4])
        assert abs(value - 3 / math.sqrt(10)) < 1e-12
        assert abs(value - oracle_spearman([1, 2, 2, 3], [1, 3, 2, 4])) < 1e-12

    def test_random_vectors_with_ties(self):
        rng = random.Random(7)
        for _ in range(50):
            n = rng.randint(2, 30)
            predicted = [rng.randint(1, 6) for _ in range(n)]
            truth = [rng.randint(1, 6) for _ in range(n)]
            if len(set(predicted)) < 2 or len(set(truth)) < 2:
                continue
            assert abs(spearman(predicted, truth) - oracle_spearman(predicted, truth)) < 1e-12

    def test_constant_vector(self):
        with pytest.raises(UndefinedCorrelationError):
            spearman([5, 5, 5], [1, 2, 3])

    @given(st.lists(st.integers(min_value=1, max_value=1000), min_size=3, max_size=20, unique=True))
    def test_invariant_under_monotone_transform(self, values):
        truth = list(range(len(values)))
        rng = random.Random(3)
        rng.shuffle(truth)
        # consecutive integers stay distinct under exp(v/3): ranks are unchanged
        transformed = [math.exp(v / 3.0) + 1 for v in values]
        assert abs(spearman(values, truth) - spearman(transformed, truth)) < 1e-9


class TestPairMetrics:
    @pytest.mark.parametrize(
        "fn,args,expected",
        [
            (pair_relation, (8, 3, 7, 4), 1.0),
            (pair_relation, (5, 5, 6, 4), 0.0),
            (pair_relation, (5, 5, 6, 6), 1.0),
            (pair_absolute, (7, 4, 7, 4), 1.0),
            (pair_absolute, (8, 3, 7, 4), 0.6),
            (pair_absolute, (9, 3, 6, 4), 0.0),
            (pair_confidence, (8, 3, 7, 4), 1.0),
            (pair_confidence, (6, 5, 8, 4), 0.0),
            (pair_confidence, (7, 4, 8, 5), 1.0),
        ],
    )
    def test_spec_values(self, fn, args, expected):
        assert fn(*args) == expected

    def test_thousand_random_quadruples_match_oracles(self):
        rng = random.Random(99)
        for _ in range(1000):
            quad = [rng.uniform(1, 10) for _ in range(4)]
            assert pair_relation(*quad) == oracle_pair_relation(*quad)
            assert pair_absolute(*quad) == oracle_pair_absolute(*quad)
            assert pair_confidence(*quad) == oracle_pair_confidence(*quad)

    @given(s1=ratings, s2=ratings, t1=ratings, t2=ratings)
    def test_symmetric_under_pair_swap(self, s1, s2, t1, t2):
        for fn in (pair_relation, pair_absolute, pair_confidence):
            assert fn(s1, s2, t1, t2) == fn(s2, s1, t2, t1)

    @given(s1=ratings, s2=ratings, t1=ratings, t2=ratings, shift=st.floats(-5, 5))
    def test_confidence_shift_invariance(self, s1, s2, t1, t2, shift):
        assert pair_confidence(s1, s2, t1, t2) == pair_confidence(
            s1 + shift, s2 + shift, t1 + shift, t2 + shift
        )


class TestConcordance:
    def test_perfect_order(self):
        assert concordance_index([1, 2, 3, 4], [2, 4, 6, 8]) == 1.0

    def test_all_equal_predictions(self):
        assert concordance_index([5, 5, 5], [1, 2, 3]) == 0.5

    def test_negated_predictions(self):
        truth = [1.0, 2.5, 4.0, 7.0]
        assert concordance_index(truth, truth) == 1.0
        assert concordance_index([-t for t in truth], truth) == 0.0

    def test_no_comparable_pairs(self):
        with pytest.raises(UndefinedMetricError):
            concordance_index([1, 2], [5, 5])

    def test_random_vectors_match_counting_oracle(self):
        rng = random.Random(1234)
        for _ in range(100):
            predicted = [rng.randint(1, 10) for _ in range(50)]
            truth = [rng.randint(1, 10) for _ in range(50)]
            assert concordance_index(predicted, truth) == oracle_concordance(predicted, truth)


class TestEvaluateRun:
    def test_two_records_one_pair(self):
        report = evaluate_run([(6.0, 6.0), (7.0, 8.0)], PairPolicy("all_pairs"))
        assert report["n_pairs"] == 1
        assert report["mse"] == 0.5

    def test_all_pairs_count_472(self):
        rng = random.Random(0)
        records = [(rng.uniform(1, 10), rng.uniform(1, 10)) for _ in range(472)]
        report = evaluate_run(records, PairPolicy("all_pairs"))
        assert report["n_pairs"] == 111156  # C(472, 2)

    def test_sampled_policy_deterministic(self):
        rng = random.Random(5)
        records = [(rng.uniform(1, 10), rng.uniform(1, 10)) for _ in range(100)]
        a = evaluate_run(records, PairPolicy("sampled", n=1000, seed=7))
        b = evaluate_run(records, PairPolicy("sampled", n=1000, seed=7))
        assert a == b
        assert a["n_pairs"] == 1000

    def test_auto_policy_stated_in_report(self):
        records = [(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]
        report = evaluate_run(records)
        assert report["pair_policy"] == {"kind": "all_pairs"}

    def test_auto_policy_switches_to_sampling_on_large_runs(self):
        rng = random.Random(2)
        records = [(rng.uniform(1, 10), rng.uniform(1, 10)) for _ in range(1200)]
        report = evaluate_run(records, PairPolicy("auto", seed=9))
        assert report["pair_policy"] == {"kind": "sampled", "n": 120000, "seed": 9}
        assert report["n_pairs"] == 120000

    def test_unparseable_predictions_excluded_and_counted(self):
        records = [(None, 5.0), (6.0, 6.0), (7.0, 8.0), (None, 2.0)]
        report = evaluate_run(records, PairPolicy("all_pairs"))
        assert report["n_excluded"] == 2
        assert report["n_used"] == 2
        assert report["n_pairs"] == 1

    def test_too_few_usable(self):
        with pytest.raises(InvalidInputError):
            evaluate_run([(None, 5.0), (6.0, 6.0)])

    def test_degenerate_spearman_reported_not_raised(self):
        report = evaluate_run([(5.0, 1.0), (5.0, 2.0), (5.0, 3.0)], PairPolicy("all_pairs"))
        assert report["spearman"] is None
        assert "spearman" in report["errors"]
        assert report["concordance"] == 0.5

    def test_report_is_json_and_renderable(self):
        records = [(2.0, 2.5), (4.0, 4.0), (8.0, 7.0)]
        report = evaluate_run(records)
        text = render_report_table(report)
        json.dumps(report)
        assert "MSE" in text and "Concordance" in text

    def test_pairwise_means_match_manual_enumeration(self):
        records = [(2.0, 3.0), (5.0, 5.0), (9.0, 8.0)]
        report = evaluate_run(records, PairPolicy("all_pairs"))
        predicted = [p for p, _ in records]
        truth = [t for _, t in records]
        pairs = [(0, 1), (0, 2), (1, 2)]
        for name, fn in (
            ("pair_relation", pair_relation),
            ("pair_absolute", pair_absolute),
            ("pair_confidence", pair_confidence),
        ):
            manual = sum(fn(predicted[i], predicted[j], truth[i], truth[j]) for i, j in pairs) / 3
            assert abs(report[name] - manual) < 1e-12
