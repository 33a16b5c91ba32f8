import csv
import json

import numpy as np
import pytest

from gpshape import ConstrainedGPRegressor
from gpshape.benchmarks.cli import main
from gpshape.benchmarks.functions import FUNCTIONS, FUNCTIONS_1D, FUNCTIONS_2D, LOGISTIC_UNIT
from gpshape.benchmarks.runner import (
    ExperimentConfig,
    fit_csv,
    q_squared,
    run_cv_selection,
    run_rmse_benchmark,
    run_sample_size_sweep,
    write_rows,
)


def write_dataset(path, X, y, header=None):
    d = X.shape[1]
    header = header or [f"x{i + 1}" for i in range(d)] + ["y"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row, v in zip(X, y):
            w.writerow([repr(float(r)) for r in row] + [repr(float(v))])


class TestFunctionRegistry:
    def test_1d_functions_are_nondecreasing_at_dense_probes(self):
        xs = np.linspace(1e-9, 10, 10_000)[:, None]
        for bf in FUNCTIONS_1D.values():
            vals = bf(xs)
            assert np.all(np.diff(vals) >= -1e-12), bf.name

    def test_logistic_unit_is_nondecreasing(self):
        xs = np.linspace(0, 1, 10_000)[:, None]
        assert np.all(np.diff(LOGISTIC_UNIT(xs)) >= 0)

    def test_2d_functions_are_isotonic_at_dense_probes(self):
        axis = np.linspace(0, 1, 100)
        pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        for bf in FUNCTIONS_2D.values():
            surf = bf(pts).reshape(100, 100)
            assert np.all(np.diff(surf, axis=0) >= -1e-12), bf.name
            assert np.all(np.diff(surf, axis=1) >= -1e-12), bf.name

    def test_quarter_sphere_corner_values(self):
        bf = FUNCTIONS_2D["quarter_sphere"]
        assert bf(np.array([[1.0, 1.0]]))[0] == pytest.approx(1.0)
        assert bf(np.array([[0.0, 0.0]]))[0] == 0.0

    def test_step_is_left_closed_at_the_jump(self):
        bf = FUNCTIONS_1D["step"]
        assert bf(np.array([[8.0]]))[0] == 3.0
        assert bf(np.array([[8.0 + 1e-12]]))[0] == 8.0


class TestInterpolation:
    def test_noise_free_knot_design_is_reproduced_exactly(self):
        # piecewise-linear monotone data at the knots pin the value-basis
        # curve, so the noise-free fit interpolates everywhere
        knots = np.linspace(0.0, 10.0, 21)
        heights = np.cumsum(np.abs(np.sin(np.arange(21))))
        est = ConstrainedGPRegressor(
            constraint="bounded:0,inf", kernel="matern32", lengthscale=3.0,
            grid_size=20, noise_std=0.0, domain=[(0, 10)],
        ).fit(knots[:, None], heights)
        xs = np.linspace(0.1, 10.0, 100)
        truth = np.interp(xs, knots, heights)
        rmse = np.sqrt(np.mean((est.predict(xs[:, None]) - truth) ** 2))
        assert rmse <= 1e-6


class TestDominance:
    def test_constraint_improves_mse_on_most_replications(self):
        from gpshape.benchmarks.runner import _draw_data
        from gpshape.sampler import derive_rng

        bf = FUNCTIONS_2D["sqrt_x1"]
        axis = np.linspace(0, 1, 32)
        grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        truth = bf(grid)
        wins = 0
        for rep in range(20):
            rng = derive_rng(21, 0, rep)
            X, y = _draw_data(bf, 64, 0.1, rng)
            est = ConstrainedGPRegressor(
                constraint="isotonic", lengthscale=bf.default_lengthscale,
                grid_size=10, noise_std=0.1, domain=bf.domain,
            ).fit(X, y)
            mse_map = np.mean((est.predict(grid) - truth) ** 2)
            mse_free = np.mean((est.predict_unconstrained(grid) - truth) ** 2)
            wins += mse_map <= mse_free
        assert wins >= 16  # at least 80% of replications


class TestQSquared:
    def test_mean_predictor_scores_zero(self, rng):
        y = rng.standard_normal(50)
        assert q_squared(y, np.full(50, y.mean()), float(y.mean())) == pytest.approx(0.0, abs=1e-12)

    def test_perfect_prediction_scores_one(self, rng):
        y = rng.standard_normal(50)
        assert q_squared(y, y, float(y.mean())) == 1.0


class TestFitCsv:
    def test_representable_data_scores_near_one(self, tmp_path, rng):
        bf = FUNCTIONS_2D["linear_blend"]
        X = rng.uniform(0, 1, (30, 2))
        path = tmp_path / "linear.csv"
        write_dataset(path, X, bf(X))
        cfg = ExperimentConfig(
            dataset=str(path), constraint="isotonic", theta=(0.5, 0.5),
            grid_n=4, noise=1e-6, holdout=0.0, seed=0, out=str(tmp_path / "out"),
        )
        report = fit_csv(cfg)
        scores = {r["estimator"]: r["value"] for r in report["rows"]}
        assert scores["map"] >= 0.999
        assert scores["unconstrained_mean"] >= 0.999
        artifact = json.loads((tmp_path / "out" / "fit_artifact.json").read_text())
        assert artifact["posterior_covariance_shape"] == [25, 25]
        assert len(artifact["map_coefficients"]) == 25

    def test_five_point_training_prefers_constrained_fit(self, tmp_path):
        # qualitative analogue of a monotone 2-D application with scarce data
        bf = FUNCTIONS_2D["quarter_sphere"]
        axis = np.linspace(0, 1, 6)
        pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        path = tmp_path / "surface.csv"
        write_dataset(path, pts, bf(pts))
        train = [0, 5, 30, 35, 14]
        idxfile = tmp_path / "holdout.txt"
        idxfile.write_text("\n".join(str(i) for i in range(36) if i not in train))
        cfg = ExperimentConfig(
            dataset=str(path), constraint="isotonic", theta=(0.4, 0.4),
            grid_n=6, noise=0.05, holdout_indices=str(idxfile), seed=1,
        )
        report = fit_csv(cfg)
        scores = {r["estimator"]: r["value"] for r in report["rows"]}
        assert scores["map"] > scores["unconstrained_mean"]

    def test_malformed_numeric_field_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n0.1,1.0\n0.2,broken\n")
        with pytest.raises(ValueError, match="line 3"):
            fit_csv(ExperimentConfig(dataset=str(path)))

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0.1,1.0\n")
        with pytest.raises(ValueError, match="line 1"):
            fit_csv(ExperimentConfig(dataset=str(path)))

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n0.1,1.0\n0.2\n")
        with pytest.raises(ValueError, match="line 3"):
            fit_csv(ExperimentConfig(dataset=str(path)))

    def test_out_of_hull_holdout_rows_are_listed_and_dropped(self, tmp_path, rng):
        X = np.concatenate([rng.uniform(0.2, 0.8, (20, 1)), [[0.0]], [[1.0]]])
        y = 2 * X[:, 0] + 0.01 * rng.standard_normal(22)
        path = tmp_path / "hull.csv"
        write_dataset(path, X, y)
        idxfile = tmp_path / "holdout.txt"
        idxfile.write_text("20\n21\n5\n")  # rows 20, 21 sit outside the training hull
        cfg = ExperimentConfig(
            dataset=str(path), constraint="increasing", theta=(0.5,),
            grid_n=10, noise=0.01, holdout_indices=str(idxfile), seed=0,
        )
        report = fit_csv(cfg)
        assert report["rejected_rows"] == [20, 21]


class TestRunners:
    def test_rmse_rows_structure(self, tmp_path):
        cfg = ExperimentConfig(
            function="linear", replications=3, n=30, noise=1.0, grid_n=10,
            seed=4, out=str(tmp_path),
        )
        rows = run_rmse_benchmark(cfg)
        assert {r["estimator"] for r in rows} == {"map", "map_uncentered", "unconstrained_mean"}
        assert all(r["replications"] == 3 for r in rows)
        assert (tmp_path / "rmse_benchmark.csv").exists()
        assert (tmp_path / "runs.jsonl").exists()

    def test_sweep_median_is_consistent(self):
        cfg = ExperimentConfig(replications=5, noise=0.5, grid_n=20, seed=4)
        rows = run_sample_size_sweep(cfg, sizes=(25, 100))
        by_metric = {r["metric"]: r for r in rows}
        assert by_metric["rmse_n100"]["median"] <= by_metric["rmse_n25"]["median"]

    def test_cv_runner_reports_selected_and_default(self, tmp_path):
        cfg = ExperimentConfig(function="sinusoidal", n=40, noise=1.0, grid_n=15, seed=2, out=str(tmp_path))
        rows = run_cv_selection(cfg)
        estimators = {r["estimator"] for r in rows}
        assert estimators == {"loo_cv", "registry_default"}
        sel = [r for r in rows if r["estimator"] == "loo_cv"][0]["value"]
        assert 0.1 <= sel <= 100.0

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            cfg = ExperimentConfig(
                function="linear", replications=2, n=25, noise=1.0, grid_n=10,
                seed=11, out=str(out),
            )
            run_rmse_benchmark(cfg)
        a = (out1 / "rmse_benchmark.csv").read_bytes()
        b = (out2 / "rmse_benchmark.csv").read_bytes()
        assert a == b

    def test_config_file_round_trip(self, tmp_path):
        payload = {"function": "linear", "replications": 2, "n": 20, "grid_n": 8, "seed": 3}
        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload))
        cfg = ExperimentConfig.from_json(path)
        assert cfg.function == "linear" and cfg.replications == 2

    def test_unknown_config_field_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"replications": 2, "wiggle": 1}))
        with pytest.raises(ValueError, match="wiggle"):
            ExperimentConfig.from_json(path)


class TestCli:
    def test_rmse_subcommand(self, tmp_path, capsys):
        out = tmp_path / "res"
        code = main([
            "rmse-bench", "--function", "linear", "--reps", "2", "--n", "20",
            "--grid-n", "8", "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        assert (out / "rmse_benchmark.csv").exists()
        assert "linear" in capsys.readouterr().out

    def test_sweep_subcommand(self, tmp_path):
        code = main([
            "sweep", "--reps", "2", "--grid-n", "10", "--seed", "1",
            "--out", str(tmp_path), "--noise", "0.5",
        ])
        assert code == 0
        assert (tmp_path / "sample_size_sweep.csv").exists()

    def test_coverage_subcommand(self, tmp_path):
        code = main([
            "coverage-bench", "--reps", "2", "--n", "30", "--grid-n", "15",
            "--samples", "120", "--seed", "1", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "coverage_benchmark.csv").exists()

    def test_mse2d_subcommand(self, tmp_path):
        code = main([
            "mse2d-bench", "--function", "linear_blend", "--reps", "2", "--n", "60",
            "--grid-n", "4", "--noise", "0.1", "--seed", "1", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "mse2d_benchmark.csv").exists()

    def test_cv_subcommand(self, tmp_path):
        code = main([
            "cv", "--function", "linear", "--n", "30", "--grid-n", "10",
            "--seed", "1", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "cv_selection.csv").exists()

    def test_fit_subcommand_with_config_override(self, tmp_path, rng):
        bf = FUNCTIONS_2D["linear_blend"]
        X = rng.uniform(0, 1, (25, 2))
        data = tmp_path / "d.csv"
        write_dataset(data, X, bf(X) + 0.01 * rng.standard_normal(25))
        config = tmp_path / "c.json"
        config.write_text(json.dumps({
            "constraint": "isotonic", "theta": [0.5, 0.5], "grid_n": 4,
            "noise": 0.01, "holdout": 0.2,
        }))
        code = main([
            "fit", str(data), "--config", str(config), "--seed", "2",
            "--out", str(tmp_path / "fit_out"),
        ])
        assert code == 0
        report = tmp_path / "fit_out" / "fit_report.csv"
        assert report.exists()
        with open(report) as fh:
            rows = list(csv.DictReader(fh))
        assert {r["estimator"] for r in rows} == {"map", "unconstrained_mean"}

    def test_write_rows_formats_numpy_floats(self, tmp_path):
        path = tmp_path / "x.csv"
        write_rows(path, [{
            "function": "f", "estimator": "map", "metric": "rmse",
            "value": np.float64(0.5), "stderr": 0.0, "replications": 1, "seed": 0,
        }])
        assert "0.5" in path.read_text()
        assert "np.float64" not in path.read_text()
