import numpy as np
import pytest

import pchqp as P
from pchqp.errors import DataError


class TestSyntheticGenerator:
    def test_planted_vector_shape(self):
        ds = P.generate_synthetic(P.SyntheticSpec(n=12, samples=5, s_true=4, rho=0.3, snr=6.0, seed=0))
        nz = ds.x_true[ds.x_true != 0]
        assert nz.size == 4
        assert set(np.abs(nz)) == {1.0}
        assert ds.train.samples == 5 and ds.test.samples == 5

    def test_deterministic_given_seed(self):
        spec = P.SyntheticSpec(n=6, samples=10, s_true=2, rho=0.5, snr=3.0, seed=7)
        a, b = P.generate_synthetic(spec), P.generate_synthetic(spec)
        assert np.array_equal(a.train.features, b.train.features)
        assert np.array_equal(a.test.targets, b.test.targets)

    def test_independent_covariates_when_rho_zero(self):
        ds = P.generate_synthetic(P.SyntheticSpec(n=4, samples=40000, s_true=1, rho=0.0, snr=6.0, seed=1))
        emp = np.cov(ds.train.features.T)
        assert np.max(np.abs(emp - np.eye(4))) < 0.05

    def test_ar1_covariance_monte_carlo(self):
        ds = P.generate_synthetic(P.SyntheticSpec(n=3, samples=60000, s_true=1, rho=0.5, snr=6.0, seed=2))
        emp = np.cov(ds.train.features.T)
        target = np.array([[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1.0]])
        assert np.max(np.abs(emp - target)) < 0.05

    def test_snr_calibration(self):
        spec = P.SyntheticSpec(n=8, samples=100000, s_true=3, rho=0.5, snr=6.0, seed=3)
        ds = P.generate_synthetic(spec)
        signal = ds.train.features @ ds.x_true
        noise = ds.train.targets - signal
        measured = signal.var() / noise.var()
        assert measured == pytest.approx(6.0, rel=0.1)

    def test_spec_validation(self):
        with pytest.raises(DataError):
            P.SyntheticSpec(n=4, samples=10, s_true=5, rho=0.5, snr=6.0)
        with pytest.raises(DataError):
            P.SyntheticSpec(n=4, samples=10, s_true=2, rho=1.0, snr=6.0)

    def test_covariance_helper(self):
        S = P.ar1_covariance(3, 0.5)
        assert np.allclose(S, [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])


class TestLoadCsv:
    def test_minimal_numeric_file(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("1.0,2.0\n3.0,4.0\n")
        data = P.load_csv(f, -1)
        assert data.samples == 2 and data.n == 1
        assert np.allclose(data.targets, [2.0, 4.0])

    def test_header_is_skipped(self, tmp_path):
        bare = tmp_path / "a.csv"
        bare.write_text("1,2\n3,4\n")
        headed = tmp_path / "b.csv"
        headed.write_text("x,y\n1,2\n3,4\n")
        a = P.load_csv(bare, -1)
        b = P.load_csv(headed, -1)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.targets, b.targets)

    def test_target_by_name(self, tmp_path):
        f = tmp_path / "named.csv"
        f.write_text("a,b,y\n1,2,3\n4,5,6\n")
        data = P.load_csv(f, "y")
        assert np.allclose(data.targets, [3.0, 6.0])
        assert np.allclose(data.features[:, 0], [1.0, 4.0])

    def test_wide_file(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((5, 82))
        f = tmp_path / "wide.csv"
        f.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in M) + "\n")
        data = P.load_csv(f, -1)
        assert data.n == 81

    def test_missing_value_rejected_with_location(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("1,2\n3,\n")
        with pytest.raises(DataError, match="row 2, column 2"):
            P.load_csv(f, -1)

    def test_non_numeric_rejected_with_location(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("1,2\nx,4\n")
        with pytest.raises(DataError, match="row 2, column 1"):
            P.load_csv(f, -1)

    def test_unknown_name_rejected(self, tmp_path):
        f = tmp_path / "named.csv"
        f.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match="no column named"):
            P.load_csv(f, "z")


class TestSplitNormalize:
    def test_minmax_columns(self):
        data = P.RegressionData(np.array([[0.0], [5.0], [10.0]]), np.array([1.0, 2.0, 3.0]))
        ds = P.split_normalize(data, 0.67, seed=0)
        col = np.concatenate([ds.train.features[:, 0], ds.test.features[:, 0]])
        assert set(np.round(sorted(col), 6)) <= {0.0, 0.5, 1.0}

    def test_split_sizes_floor(self):
        rng = np.random.default_rng(1)
        data = P.RegressionData(rng.standard_normal((10, 2)), rng.standard_normal(10))
        ds = P.split_normalize(data, 0.7, seed=0)
        assert ds.train.samples == 7 and ds.test.samples == 3

    def test_same_seed_same_split(self):
        rng = np.random.default_rng(2)
        data = P.RegressionData(rng.standard_normal((20, 3)), rng.standard_normal(20))
        a = P.split_normalize(data, 0.7, seed=5)
        b = P.split_normalize(data, 0.7, seed=5)
        assert np.array_equal(a.train.features, b.train.features)

    def test_columns_land_in_unit_interval(self):
        rng = np.random.default_rng(3)
        data = P.RegressionData(rng.standard_normal((30, 4)) * 7 + 3, rng.standard_normal(30))
        ds = P.split_normalize(data, 0.5, seed=1)
        for block in (ds.train.features, ds.test.features):
            assert block.min() >= -1e-12 and block.max() <= 1 + 1e-12
        assert ds.train.targets.min() >= -1e-12 and ds.train.targets.max() <= 1 + 1e-12

    def test_constant_column_maps_to_zero(self):
        data = P.RegressionData(np.array([[2.0, 1.0], [2.0, 3.0], [2.0, 4.0]]), np.arange(3.0))
        ds = P.split_normalize(data, 0.67, seed=0)
        assert np.allclose(ds.train.features[:, 0], 0.0)
        assert np.allclose(ds.test.features[:, 0], 0.0)

    def test_normalization_recorded(self):
        data = P.RegressionData(np.array([[0.0], [4.0]]), np.array([2.0, 6.0]))
        ds = P.split_normalize(data, 0.5, seed=0)
        assert np.allclose(ds.normalization, [[0.0, 4.0], [2.0, 6.0]])

    def test_too_small_rejected(self):
        with pytest.raises(DataError):
            P.split_normalize(P.RegressionData(np.zeros((1, 1)), np.zeros(1)), 0.7, seed=0)


class TestMse:
    def test_perfect_fit(self):
        rng = np.random.default_rng(4)
        W = rng.standard_normal((10, 3))
        x = rng.standard_normal(3)
        data = P.RegressionData(W, W @ x)
        assert P.mse(x, data) == pytest.approx(0.0, abs=1e-16)

    def test_zero_predictor(self):
        rng = np.random.default_rng(5)
        data = P.RegressionData(rng.standard_normal((6, 2)), rng.standard_normal(6))
        assert P.mse(np.zeros(2), data) == pytest.approx(float(data.targets @ data.targets) / 6)

    def test_scalar_loop_oracle(self):
        rng = np.random.default_rng(6)
        data = P.RegressionData(rng.standard_normal((5, 3)), rng.standard_normal(5))
        x = rng.standard_normal(3)
        total = 0.0
        for i in range(5):
            pred = sum(x[j] * data.features[i, j] for j in range(3))
            total += (data.targets[i] - pred) ** 2
        assert P.mse(x, data) == pytest.approx(total / 5, rel=1e-12)


def test_default_eta_rule():
    data = P.RegressionData(np.zeros((49, 2)), np.zeros(49))
    assert P.default_eta(data) == pytest.approx(7.0)


class TestRunGrid:
    def test_single_cell_single_rep(self):
        cells = [P.GridCell(n=10, samples=30, s=2, rho=0.3, snr=6.0, eta=1.0)]
        rows = P.run_grid(cells, "dp", [4], 1, master_seed=0, dp_config=P.DPConfig(max_iters=60))
        metrics = {r["metric"] for r in rows}
        assert metrics == {"support_size", "mse", "objective", "wall_time"}
        assert all(r["reps"] == 1 and r["std"] == 0.0 for r in rows)

    def test_deterministic_tables(self):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        kw = dict(master_seed=3, dp_config=P.DPConfig(max_iters=50))
        a = P.run_grid(cells, "dp", [3], 2, **kw)
        b = P.run_grid(cells, "dp", [3], 2, **kw)
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time" and r["metric"] != "wall_time"} for r in rows]
        assert strip(a) == strip(b)

    def test_threaded_matches_serial(self):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        kw = dict(master_seed=3, dp_config=P.DPConfig(max_iters=50))
        serial = P.run_grid(cells, "dp", [3], 3, threads=1, **kw)
        threaded = P.run_grid(cells, "dp", [3], 3, threads=3, **kw)
        for a, b in zip(serial, threaded):
            if a["metric"] == "wall_time":
                continue
            assert a == b

    def test_br_method_works(self):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=1.0)]
        rows = P.run_grid(cells, "br", [4], 1, master_seed=1)
        assert any(r["metric"] == "support_size" for r in rows)

    def test_errors_recorded_not_fatal(self):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        rows = P.run_grid(
            cells, "dp", [3], 1, master_seed=0, dp_config=P.DPConfig(max_iters=50, step_a=1e9)
        )
        assert any(r["metric"] == "error" for r in rows)

    def test_screened_size_grows_with_eta(self):
        cells = [
            P.GridCell(n=40, samples=120, s=4, rho=0.5, snr=6.0, eta=eta)
            for eta in (1e-3, 1.0, 1e2)
        ]
        rows = P.run_grid(cells, "dp", [16], 6, master_seed=1)
        by_eta = {r["eta"]: r["mean"] for r in rows if r["metric"] == "support_size"}
        means = [by_eta[eta] for eta in sorted(by_eta)]
        assert all(a <= b + 1e-12 for a, b in zip(means, means[1:]))


class TestTables:
    def test_csv_round_trip(self, tmp_path):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        rows = P.run_grid(cells, "dp", [3], 1, master_seed=0, dp_config=P.DPConfig(max_iters=40))
        f = tmp_path / "t.csv"
        P.write_table(rows, f, fmt="csv")
        back = P.read_table(f)
        for orig, rt in zip(rows, back):
            for col in ("n", "samples", "s", "rho", "snr", "eta", "method", "k", "metric", "mean", "std", "reps"):
                assert rt[col] == orig[col]

    def test_json_round_trip(self, tmp_path):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        rows = P.run_grid(cells, "dp", [3], 1, master_seed=0, dp_config=P.DPConfig(max_iters=40))
        f = tmp_path / "t.json"
        P.write_table(rows, f, fmt="json")
        back = P.read_table(f)
        assert back[0]["metric"] == rows[0]["metric"]
        assert back[0]["mean"] == rows[0]["mean"]

    def test_timings_can_be_excluded(self, tmp_path):
        cells = [P.GridCell(n=8, samples=25, s=2, rho=0.5, snr=6.0, eta=0.5)]
        rows = P.run_grid(cells, "dp", [3], 1, master_seed=0, dp_config=P.DPConfig(max_iters=40))
        f = tmp_path / "t.csv"
        P.write_table(rows, f, fmt="csv", include_timings=False)
        assert all(r["metric"] != "wall_time" for r in P.read_table(f))
