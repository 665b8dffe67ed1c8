import numpy as np
import pytest
from scipy import stats

from bayespoison import (
    Budget,
    Dataset,
    NigLinearModel,
    NigParams,
    RngSeed,
    WeightVector,
    load_dataset_csv,
    loglik_matrix,
    weighted_logjoint,
)
from bayespoison.models.nig import pack_params


def _unit_model():
    return NigLinearModel(NigParams(mu=np.zeros(1), lam=np.eye(1), a=2.0, b=2.0))


class TestDataset:
    def test_basic_shape_and_freeze(self):
        d = Dataset([[1.0, 2.0], [3.0, 4.0]], [1.0, 2.0], ("a", "b"))
        assert d.n == 2 and d.p == 2
        with pytest.raises(ValueError):
            d.x[0, 0] = 9.0  # read-only

    def test_response_length_mismatch(self):
        with pytest.raises(ValueError):
            Dataset([[1.0], [2.0]], [1.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Dataset([[np.nan]], None)
        with pytest.raises(ValueError):
            Dataset([[1.0]], [np.inf])

    def test_replicate_rows(self):
        d = Dataset([[1.0], [2.0], [3.0]], [10.0, 20.0, 30.0])
        r = d.replicate_rows([2, 0, 1])
        assert r.x[:, 0].tolist() == [1.0, 1.0, 3.0]
        assert r.y.tolist() == [10.0, 10.0, 30.0]
        with pytest.raises(ValueError):
            d.replicate_rows([0, 0, 0])


class TestWeightVector:
    def test_nonnegativity(self):
        with pytest.raises(ValueError):
            WeightVector([-0.5, 1.0])
        w = WeightVector([0.0, 1.5])
        assert w.n == 2

    def test_integral_flag_checks_wholeness(self):
        with pytest.raises(ValueError):
            WeightVector([1.5, 1.0], integral=True)
        w = WeightVector([2.0 + 1e-12, 0.0], integral=True)
        assert w.values.tolist() == [2.0, 0.0]

    def test_ones(self):
        w = WeightVector.ones(4)
        assert w.integral and w.values.tolist() == [1.0] * 4


class TestBudget:
    def test_validation(self):
        with pytest.raises(ValueError):
            Budget(-1, 2)
        with pytest.raises(ValueError):
            Budget(3, 0)
        b = Budget(3, 2)
        assert (b.b_max, b.l_max) == (3, 2)


class TestRngSeed:
    def test_determinism(self):
        a = RngSeed(7, 3).generator().standard_normal(5)
        b = RngSeed(7, 3).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngSeed(7, 0).generator().standard_normal(5)
        b = RngSeed(7, 1).generator().standard_normal(5)
        assert not np.allclose(a, b)

    def test_children_distinct(self):
        root = RngSeed(11, 2)
        kids = {root.child(k).stream_id for k in range(100)}
        assert len(kids) == 100 and root.stream_id not in kids


class TestLoglikMatrix:
    def test_unit_variance_zero_residual(self):
        # One row with zero residual at unit variance: log density is
        # -log(2 pi) / 2.
        model = _unit_model()
        data = Dataset([[1.0]], [2.0])
        theta = pack_params(np.array([2.0]), 1.0)
        out = loglik_matrix(model, data, [theta])
        np.testing.assert_allclose(out, [[-0.5 * np.log(2 * np.pi)]], atol=1e-12)

    def test_identical_rows_identical_columns(self):
        model = _unit_model()
        data = Dataset([[1.5], [1.5]], [0.7, 0.7])
        out = loglik_matrix(model, data, [pack_params(np.array([0.3]), 2.0)])
        assert out[0, 0] == out[0, 1]

    def test_matches_scalar_density_oracle(self):
        rng = np.random.default_rng(0)
        data = Dataset(rng.standard_normal((3, 1)), rng.standard_normal(3))
        model = _unit_model()
        thetas = np.column_stack([rng.standard_normal(4), rng.uniform(-1, 1, 4)])
        out = loglik_matrix(model, data, thetas)
        for j, th in enumerate(thetas):
            mean = data.x[:, 0] * th[0]
            expected = stats.norm(mean, np.exp(0.5 * th[1])).logpdf(data.y)
            np.testing.assert_allclose(out[j], expected, atol=1e-12)

    def test_dimension_mismatch(self):
        model = _unit_model()
        data = Dataset([[1.0]], [1.0])
        with pytest.raises(ValueError):
            loglik_matrix(model, data, [np.zeros(5)])


class TestWeightedLogjoint:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.data = Dataset(rng.standard_normal((3, 1)), rng.standard_normal(3))
        self.model = _unit_model()
        self.theta = pack_params(np.array([0.4]), 1.3)

    def test_identity_weights(self):
        rows = self.model.loglik_rows(self.data, self.theta)
        expected = rows.sum() + self.model.logprior(self.theta)
        got = weighted_logjoint(self.model, self.data, np.ones(3), self.theta)
        np.testing.assert_allclose(got, expected, rtol=1e-14)

    def test_zero_weights_is_prior(self):
        got = weighted_logjoint(self.model, self.data, np.zeros(3), self.theta)
        np.testing.assert_allclose(got, self.model.logprior(self.theta), rtol=1e-14)

    def test_explicit_three_term_sum(self):
        w = np.array([2.0, 0.0, 1.0])
        rows = self.model.loglik_rows(self.data, self.theta)
        expected = 2 * rows[0] + rows[2] + self.model.logprior(self.theta)
        got = weighted_logjoint(self.model, self.data, w, self.theta)
        np.testing.assert_allclose(got, expected, rtol=1e-14)

    def test_linearity_in_weights(self):
        rng = np.random.default_rng(5)
        rows = self.model.loglik_rows(self.data, self.theta)
        for _ in range(10):
            w = rng.uniform(0, 2, 3)
            lhs = weighted_logjoint(self.model, self.data, w, self.theta) - weighted_logjoint(
                self.model, self.data, np.ones(3), self.theta
            )
            np.testing.assert_allclose(lhs, (w - 1.0) @ rows, atol=1e-10)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(8)
        w = rng.uniform(0, 2, 3)
        perm = np.array([2, 0, 1])
        data_p = Dataset(self.data.x[perm], self.data.y[perm])
        a = weighted_logjoint(self.model, self.data, w, self.theta)
        b = weighted_logjoint(self.model, data_p, w[perm], self.theta)
        np.testing.assert_allclose(a, b, rtol=1e-14)

    def test_non_finite_prior_is_domain_error(self):
        class BadPrior(NigLinearModel):
            def logprior(self, theta):
                return -np.inf

        model = BadPrior(NigParams(mu=np.zeros(1), lam=np.eye(1), a=2.0, b=2.0))
        with pytest.raises(ValueError):
            weighted_logjoint(model, self.data, np.ones(3), self.theta)


class TestCsvLoader:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x1,x2,y\n1.0,2.0,3.0\n4.0,5.0,6.0\n")
        d = load_dataset_csv(path, response="y")
        assert d.column_names == ("x1", "x2")
        np.testing.assert_array_equal(d.x, [[1.0, 2.0], [4.0, 5.0]])
        np.testing.assert_array_equal(d.y, [3.0, 6.0])

    def test_missing_value_is_hard_error(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1.0,\n")
        with pytest.raises(ValueError, match="missing value"):
            load_dataset_csv(path, response="y")

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\noops,1.0\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_dataset_csv(path, response="y")

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\nnan,1.0\n")
        with pytest.raises(ValueError, match="non-finite"):
            load_dataset_csv(path, response="y")

    def test_unknown_response_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1.0,2.0\n")
        with pytest.raises(ValueError, match="response column"):
            load_dataset_csv(path, response="z")

    def test_no_response_loads_features_only(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1.0,2.0\n")
        d = load_dataset_csv(path)
        assert d.y is None and d.p == 2


class TestLoglikRow:
    def test_single_row_matches_matrix_entry(self):
        model = _unit_model()
        rng = np.random.default_rng(11)
        data = Dataset(rng.standard_normal((4, 1)), rng.standard_normal(4))
        theta = np.array([0.2, -0.1])
        rows = model.loglik_rows(data, theta)
        for i in range(4):
            assert model.loglik_row(data, i, theta) == pytest.approx(rows[i])
