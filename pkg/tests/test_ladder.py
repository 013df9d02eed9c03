"""Sigma ladder runs, averaging, and the zero-step extrapolation."""

import numpy as np
import pytest

import noisygrover.ladder as ladder_mod
from noisygrover import (
    ConfigError,
    DegenerateStateError,
    LadderConfig,
    NoiseConvention,
    NoiseSpec,
    ProblemSize,
    RandomStream,
    SigmaCeilingError,
    SigmaMaxStat,
    cell_master_seed,
    extrapolate_to_zero_step,
    initial_state,
    m_max,
    noisy_step,
    run_seed,
    sigma_max_averaged,
    sigma_max_runs,
    sigma_max_single_run,
    stat_from_runs,
    success_probability,
    trajectory_curve,
    trajectory_success_probability,
)


def test_ladder_config_validation():
    LadderConfig(d_sigma=1e-4, p_cut=0.5)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=0.0, p_cut=0.5)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=0.02, p_cut=0.5)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=1e-4, p_cut=0.0)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=1e-4, p_cut=1.0)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=1e-4, p_cut=0.5, runs=0)
    with pytest.raises(ConfigError):
        LadderConfig(d_sigma=1e-4, p_cut=0.5, sigma_ceiling=0.0)


def test_trajectory_probability_zero_sigma():
    size = ProblemSize(10)
    p = trajectory_success_probability(size, 0.0, RandomStream(1))
    assert np.allclose(p, success_probability(size, m_max(size)), atol=1e-12)


def test_trajectory_curve_zero_sigma():
    size = ProblemSize(8)
    curve = trajectory_curve(size, 0.0, RandomStream(1))
    assert curve.shape == (2 * m_max(size) + 1,)
    expected = [success_probability(size, m) for m in range(len(curve))]
    assert np.allclose(curve, expected, atol=1e-12)


def test_trajectory_rejects_negative_sigma():
    with pytest.raises(ConfigError):
        trajectory_success_probability(ProblemSize(4), -0.001, RandomStream(1))
    with pytest.raises(ConfigError):
        trajectory_curve(ProblemSize(4), -0.001, RandomStream(1))


def test_infeasible_p_cut_rejected():
    # Noiseless success at N=1024 tops out near 0.99945, so 0.9999 can never pass.
    cfg = LadderConfig(d_sigma=1e-4, p_cut=0.9999, runs=2)
    with pytest.raises(ConfigError):
        sigma_max_runs(ProblemSize(10), cfg)
    with pytest.raises(ConfigError):
        sigma_max_single_run(ProblemSize(10), cfg, RandomStream(1))


def test_single_runs_land_on_grid():
    cfg = LadderConfig(d_sigma=1e-3, p_cut=0.9, runs=8, master_seed=42)
    runs = sigma_max_runs(ProblemSize(10), cfg)
    assert len(runs) == 8
    assert [r.run_index for r in runs] == list(range(8))
    for r in runs:
        k = r.sigma_max / cfg.d_sigma
        assert np.allclose(k, round(k), atol=1e-9) and round(k) >= 1
        assert r.p_at_break < cfg.p_cut


def test_block_path_matches_scalar_steps():
    # The vectorized rung blocks must consume the stream exactly like a
    # one-rung-at-a-time loop over noisy_step.
    size = ProblemSize(10)
    m = m_max(size)
    for conv in NoiseConvention:
        cfg = LadderConfig(d_sigma=1e-3, p_cut=0.9, convention=conv)
        for seed in (1, 99, 12345):
            got = sigma_max_single_run(size, cfg, RandomStream(seed))
            rng = RandomStream(seed)
            k = 0
            while True:
                k += 1
                spec = NoiseSpec(k * cfg.d_sigma, conv)
                st = initial_state(size)
                for _ in range(m):
                    st = noisy_step(st, size, spec, rng)
                if st.A * st.A < cfg.p_cut:
                    break
            assert got == k * cfg.d_sigma


def test_run_seed_derivation():
    seeds = {run_seed(7, i) for i in range(100)}
    assert len(seeds) == 100
    assert run_seed(7, 3) == run_seed(7, 3)
    assert run_seed(7, 3, attempt=1) != run_seed(7, 3)
    assert run_seed(8, 3) != run_seed(7, 3)


def test_cell_master_seed_fixed_point():
    base = cell_master_seed(12345, 10, 0.7, 1e-5)
    # 0.6 + 0.1 is not the literal 0.7 double, but the same cell.
    assert cell_master_seed(12345, 10, 0.6 + 0.1, 1e-5) == base
    assert cell_master_seed(12345, 11, 0.7, 1e-5) != base
    assert cell_master_seed(12345, 10, 0.5, 1e-5) != base
    assert cell_master_seed(12345, 10, 0.7, 1e-6) != base


def test_sigma_ceiling_error():
    # Two rungs of barely-there noise cannot push P(1) at N=4 below 0.5.
    cfg = LadderConfig(d_sigma=1e-3, p_cut=0.5, sigma_ceiling=2e-3)
    with pytest.raises(SigmaCeilingError):
        sigma_max_single_run(ProblemSize(2), cfg, RandomStream(3))


def test_stat_from_runs():
    runs = sigma_max_runs(ProblemSize(10), LadderConfig(d_sigma=1e-3, p_cut=0.9, runs=10, master_seed=5))
    stat = stat_from_runs(runs, 1e-3)
    values = np.array([r.sigma_max for r in runs])
    assert np.allclose(stat.mean, values.mean(), atol=1e-15)
    assert np.allclose(stat.stderr, values.std(ddof=1) / np.sqrt(10), atol=1e-15)
    assert stat.runs == 10 and stat.d_sigma == 1e-3
    lone = stat_from_runs(runs[:1], 1e-3)
    assert np.isnan(lone.stderr) and lone.runs == 1


def test_sigma_max_averaged_reproducible():
    cfg = LadderConfig(d_sigma=1e-3, p_cut=0.7, runs=12, master_seed=2026)
    a = sigma_max_averaged(ProblemSize(10), cfg)
    b = sigma_max_averaged(ProblemSize(10), cfg)
    assert a == b
    assert a.mean > 0.0 and a.stderr > 0.0


def test_degenerate_runs_are_reseeded(monkeypatch):
    real = ladder_mod._ladder_climb
    failures = {"left": 2}

    def flaky(size, ladder, rng):
        if failures["left"] > 0:
            failures["left"] -= 1
            raise DegenerateStateError("forced")
        return real(size, ladder, rng)

    monkeypatch.setattr(ladder_mod, "_ladder_climb", flaky)
    cfg = LadderConfig(d_sigma=1e-3, p_cut=0.9, runs=3, master_seed=9)
    runs = sigma_max_runs(ProblemSize(10), cfg)
    assert len(runs) == 3
    # Run 0 burned two seeds before succeeding on attempt 2.
    assert runs[0].seed == run_seed(9, 0, attempt=2)
    assert runs[1].seed == run_seed(9, 1)


def test_extrapolation_input_requirements():
    def stat(d):
        return SigmaMaxStat(mean=0.001 + 0.02 * d**0.25, stderr=1e-6, runs=10, d_sigma=d)

    with pytest.raises(ConfigError):
        extrapolate_to_zero_step([stat(d) for d in (1e-4, 1e-5, 1e-6)])
    with pytest.raises(ConfigError):
        extrapolate_to_zero_step([stat(d) for d in (1e-4, 5e-5, 2e-5, 1e-5)])


def test_extrapolation_recovers_synthetic_law():
    zeta, xi, alpha = 0.0012, 0.018, 0.31
    stats = [
        SigmaMaxStat(mean=zeta + xi * d**alpha, stderr=1e-7, runs=50, d_sigma=d)
        for d in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
    ]
    fit = extrapolate_to_zero_step(stats)
    assert np.allclose(fit.zeta, zeta, atol=1e-8)
    assert np.allclose(fit.alpha_exp, alpha, atol=1e-6)
    assert np.allclose(fit.xi, xi, rtol=1e-5)
    assert fit.zeta_err >= 0.0
