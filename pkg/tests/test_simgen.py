"""Series generation, the pilot simulation, and the benchmark harness."""

import numpy as np
import pytest

import adoptkit as ak
from adoptkit import fisher, jsonio, simgen
from adoptkit.curves import PhaseKind, ThetaTwoComp
from adoptkit.errors import ValidationError
from adoptkit.fisher import BinomialCounts, GaussianAr1, GaussianIid, PoissonCounts

THETA = ThetaTwoComp(3.0, 0.8, 2.0, 0.25)


class TestGenSeries:
    def test_zero_sigma_reproduces_curve(self):
        s = simgen.gen_series(THETA, GaussianIid(0.0), 21, 20.0, seed=5)
        assert s.values == pytest.approx(ak.eval_curve(THETA, s.times), abs=0.0)
        assert s.times[0] == 0.0 and s.times[-1] == 20.0

    def test_deterministic_per_seed(self):
        a = simgen.gen_series(THETA, GaussianIid(0.05), 21, 20.0, seed=7)
        b = simgen.gen_series(THETA, GaussianIid(0.05), 21, 20.0, seed=7)
        c = simgen.gen_series(THETA, GaussianIid(0.05), 21, 20.0, seed=8)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_poisson_mean_matches_rate(self):
        kappa = 7.0
        t_fix = 4.0
        lam = kappa * float(ak.eval_curve(THETA, t_fix))
        rng = np.random.default_rng(11)
        draws = np.array([
            fisher.sample_observations(THETA, [t_fix], PoissonCounts(kappa), rng)[0]
            for _ in range(10_000)
        ])
        se = np.sqrt(lam / len(draws))
        assert abs(draws.mean() - lam) <= 3 * se

    def test_ar1_lag1_autocorrelation(self):
        s = simgen.gen_series(THETA, GaussianAr1(0.2, 0.5), 10_000, 30.0, seed=3)
        noise = s.values - ak.eval_curve(THETA, s.times)
        r = np.corrcoef(noise[:-1], noise[1:])[0, 1]
        assert r == pytest.approx(0.5, abs=0.02)

    def test_binomial_counts_within_bounds(self):
        em = BinomialCounts(m=5.0, trials=40)
        s = simgen.gen_series(THETA, em, 21, 20.0, seed=9)
        assert np.all(s.values >= 0) and np.all(s.values <= 40)
        assert np.all(s.values == np.round(s.values))

    def test_validation(self):
        with pytest.raises(ValidationError):
            simgen.gen_series(THETA, GaussianIid(0.1), 1, 20.0)
        with pytest.raises(ValidationError):
            simgen.gen_series(THETA, GaussianIid(0.1), 21, -1.0)


class TestPilot:
    def test_reference_stream(self):
        res = simgen.pilot_sim()
        assert res.r_chat == pytest.approx(0.59)
        assert res.r_agent == pytest.approx(0.775)
        assert res.r_star == pytest.approx(res.r_chat + 0.4 / res.mu_c, rel=1e-12)

    def test_means_near_beta_expectations(self):
        res = simgen.pilot_sim(simgen.PilotConfig(seed=42, n_tasks=200))
        assert abs(res.r_chat - 0.6) <= 3 * np.sqrt(0.6 * 0.4 / 200)
        assert abs(res.r_agent - 0.8) <= 3 * np.sqrt(0.8 * 0.2 / 200)

    def test_zero_deltas_reduce_to_chat(self):
        cfg = simgen.PilotConfig(seed=1, n_tasks=50, delta_tau=0.0, delta_phi=0.0)
        res = simgen.pilot_sim(cfg)
        assert res.r_star == res.r_chat


class TestDepthParameterization:
    def test_zero_depth_is_monotone_boundary(self):
        th = simgen.theta_for_depth(0.0)
        assert th.beta * th.umax == pytest.approx(th.alpha * th.n0, rel=1e-12)
        assert ak.monotone_condition(th)
        assert simgen.trough_depth(th) == 0.0

    def test_target_depth_reached(self):
        for d in (0.1, 0.2, 0.3):
            th = simgen.theta_for_depth(d)
            assert simgen.trough_depth(th) == pytest.approx(d, abs=1e-8)
            assert ak.classify_phase(th).kind == PhaseKind.TROUGH

    def test_depth_increases_with_n0(self):
        d1 = simgen.trough_depth(ThetaTwoComp(1.0, 0.8, 2.0, 0.25))
        d2 = simgen.trough_depth(ThetaTwoComp(2.0, 0.8, 2.0, 0.25))
        assert d2 > d1


class TestBenchmark:
    def small_grid(self, depths=(0.0, 0.2), reps=40, seed=17):
        return simgen.ScenarioGrid(
            thetas=tuple(simgen.theta_for_depth(d) for d in depths),
            error_models=(GaussianIid(0.05),),
            n_points=(21,),
            replicates=reps,
            seed=seed,
            shape_boot=60,
        )

    def test_bitwise_reproducible_across_threads(self):
        grid = self.small_grid()
        a = simgen.run_benchmark(grid, threads=1)
        b = simgen.run_benchmark(grid, threads=4)
        assert jsonio.dumps_canonical(a) == jsonio.dumps_canonical(b)

    def test_monotone_and_trough_roles(self):
        report = simgen.run_benchmark(self.small_grid())
        mono, trough = report.scenarios
        assert mono.is_monotone_truth and mono.type1_lr is not None
        assert mono.coverage_tstar is None and mono.power_lr is None
        assert not trough.is_monotone_truth
        assert trough.power_lr is not None and trough.coverage_tstar is not None
        assert trough.mean_crlb_ratio is not None
        assert report.totals["coverage_tstar_wellconditioned"] == trough.coverage_tstar

    def test_power_monotone_in_depth(self):
        grid = simgen.ScenarioGrid(
            thetas=tuple(simgen.theta_for_depth(d) for d in (0.05, 0.15, 0.3)),
            error_models=(GaussianIid(0.05),),
            n_points=(21,),
            replicates=60,
            seed=29,
            shape_boot=60,
        )
        report = simgen.run_benchmark(grid, threads=2)
        powers = [s.power_lr for s in report.scenarios]
        assert powers[1] >= powers[0] - 0.03
        assert powers[2] >= powers[1] - 0.03

    def test_near_degenerate_flagged_and_excluded(self):
        theta = ThetaTwoComp(1.95, 0.8, 2.0, 0.25)  # |umax-n0|/umax = 0.025
        grid = simgen.ScenarioGrid(
            thetas=(theta,),
            error_models=(GaussianIid(0.05),),
            n_points=(21,),
            replicates=30,
            seed=5,
            shape_boot=40,
        )
        report = simgen.run_benchmark(grid)
        s = report.scenarios[0]
        assert s.near_degenerate and not s.well_conditioned
        assert report.totals["coverage_tstar_wellconditioned"] is None

    def test_ar1_scenarios_not_headline(self):
        grid = simgen.ScenarioGrid(
            thetas=(simgen.theta_for_depth(0.2),),
            error_models=(GaussianAr1(0.05, 0.6),),
            n_points=(21,),
            replicates=30,
            seed=6,
            shape_boot=40,
        )
        report = simgen.run_benchmark(grid)
        assert not report.scenarios[0].well_conditioned
