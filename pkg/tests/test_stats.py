import random

import pytest

from naveval.stats import PairedScores, correlate_metrics, pearson


class TestPearson:
    def test_worked_example(self):
        """A known four-point pair correlates at exactly 0.8."""
        x = [1.0, 2.0, 3.0, 4.0]
        y = [1.0, 3.0, 2.0, 4.0]
        assert abs(pearson(x, y) - 0.8) < 1e-12

    def test_perfect_positive_and_negative(self):
        x = [1.0, 2.0, 3.0]
        assert abs(pearson(x, [2.0, 4.0, 6.0]) - 1.0) < 1e-12
        assert abs(pearson(x, [6.0, 4.0, 2.0]) + 1.0) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least two"):
            pearson([1.0], [2.0])

    def test_constant_series(self):
        with pytest.raises(ValueError, match="constant"):
            pearson([3.0, 3.0, 3.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError, match="constant"):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_symmetry(self):
        rng = random.Random(5)
        for _ in range(100):
            n = rng.randrange(2, 20)
            x = [rng.gauss(0, 1) for _ in range(n)]
            y = [rng.gauss(0, 1) for _ in range(n)]
            assert abs(pearson(x, y) - pearson(y, x)) < 1e-12

    def test_affine_invariance(self):
        """Positive rescaling and shifting of either series leaves r unchanged."""
        rng = random.Random(17)
        for _ in range(100):
            n = rng.randrange(3, 15)
            x = [rng.gauss(0, 1) for _ in range(n)]
            y = [rng.gauss(0, 1) for _ in range(n)]
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            base = pearson(x, y)
            assert abs(pearson([a * v + b for v in x], y) - base) < 1e-9
            assert abs(pearson(x, [a * v + b for v in y]) - base) < 1e-9

    def test_range(self):
        rng = random.Random(29)
        for _ in range(300):
            n = rng.randrange(2, 30)
            x = [rng.uniform(-10, 10) for _ in range(n)]
            y = [rng.uniform(-10, 10) for _ in range(n)]
            try:
                r = pearson(x, y)
            except ValueError:
                continue
            assert -1.0 - 1e-12 <= r <= 1.0 + 1e-12


class TestPairedScores:
    def test_correlation(self):
        scores = PairedScores(
            ids=("a", "b", "c", "d"),
            metric=(1.0, 2.0, 3.0, 4.0),
            human=(1.0, 3.0, 2.0, 4.0),
        )
        assert abs(scores.correlation() - 0.8) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            PairedScores(ids=("a",), metric=(1.0, 2.0), human=(1.0, 2.0))

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            PairedScores(ids=("a",), metric=(1.0,), human=(1.0,))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            PairedScores(ids=("a", "b"), metric=(1.0, float("nan")), human=(1.0, 2.0))


class TestCorrelateMetrics:
    def test_identity_column_ranks_first(self):
        human = [1.0, 3.0, 2.0, 4.0]
        report = correlate_metrics(
            {"noisy": [1.0, 2.0, 3.0, 4.0], "exact": list(human)}, human
        )
        assert [e.metric for e in report.entries] == ["exact", "noisy"]
        assert abs(report.entries[0].pearson - 1.0) < 1e-12
        assert abs(report.entries[1].pearson - 0.8) < 1e-12
        assert report.n_used == 4
        assert report.n_dropped == 0

    def test_rows_with_missing_values_dropped(self):
        """A None in any column removes that row from every correlation."""
        report = correlate_metrics(
            {
                "m1": [1.0, None, 3.0, 4.0, 5.0],
                "m2": [2.0, 9.0, 6.0, 8.0, 10.0],
            },
            [1.0, 7.0, 3.0, 4.0, 5.0],
        )
        assert report.n_used == 4
        assert report.n_dropped == 1
        for entry in report.entries:
            assert abs(entry.pearson - 1.0) < 1e-12
            assert entry.n == 4

    def test_fewer_than_two_complete_rows(self):
        with pytest.raises(ValueError, match="at least two"):
            correlate_metrics({"m": [1.0, None, None]}, [1.0, 2.0, 3.0])

    def test_constant_column_error_names_column(self):
        with pytest.raises(ValueError, match="m_const"):
            correlate_metrics(
                {"m_const": [2.0, 2.0, 2.0], "m_ok": [1.0, 2.0, 3.0]},
                [1.0, 2.0, 3.0],
            )

    def test_tied_correlations_keep_input_order(self):
        """Columns with equal r stay in mapping insertion order."""
        human = [1.0, 2.0, 3.0]
        report = correlate_metrics(
            {"zeta": [2.0, 4.0, 6.0], "alpha": [1.0, 2.0, 3.0]}, human
        )
        assert [e.metric for e in report.entries] == ["zeta", "alpha"]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            correlate_metrics({"m": [1.0, 2.0]}, [1.0, 2.0, 3.0])
