"""Iterated-search budget arithmetic and the break-even table pipeline."""

import math

import numpy as np
import pytest

import noisygrover.iterated as iterated_mod
from noisygrover import (
    ConfigError,
    DegenerateStateError,
    LadderConfig,
    ProblemSize,
    build_breakeven_table,
    iterated_params,
    m_max,
    min_p_cut,
    repetition_count,
)

from reference import BREAKEVEN_TABLE, SUITE_SEED


def test_repetition_count_values():
    assert repetition_count(ProblemSize(4)) == 2
    assert repetition_count(ProblemSize(10)) == 20
    assert repetition_count(ProblemSize(12)) == 40
    with pytest.raises(ConfigError):
        repetition_count(ProblemSize(3))


def test_repetition_count_is_tight():
    # The budget I*m_max <= N/2 holds, and one more round would exceed it.
    for n in range(5, 17):
        size = ProblemSize(n)
        reps = repetition_count(size)
        assert reps * m_max(size) <= size.N // 2
        assert (reps + 1) * m_max(size) > size.N // 2


def test_min_p_cut_closed_form():
    size = ProblemSize(10)
    assert np.allclose(min_p_cut(size), 1.0 - 0.5 ** (math.pi / 64.0), atol=1e-15)
    with pytest.raises(ConfigError):
        min_p_cut(ProblemSize(1))


def test_min_p_cut_matches_published_table():
    # Published cutoffs are quoted to two significant figures.
    for N, (p_printed, _, _) in BREAKEVEN_TABLE.items():
        n = int(math.log2(N))
        got = min_p_cut(ProblemSize(n))
        unit = 10.0 ** (math.floor(math.log10(p_printed)) - 1)
        assert abs(got - p_printed) <= 1.05 * unit


def test_compound_success_identity():
    # At the ideal (unfloored) repetition count the compound success is 1/2.
    # The integer count sits within ~1.5 of the ideal, so the compound value
    # stays within one repetition's worth of probability on either side.
    for n in (10, 12, 14, 16):
        size = ProblemSize(n)
        p = min_p_cut(size)
        ideal = (2.0 / math.pi) * math.sqrt(size.N)
        assert np.allclose(1.0 - (1.0 - p) ** ideal, 0.5, atol=1e-12)
        compound = 1.0 - (1.0 - p) ** repetition_count(size)
        assert abs(compound - 0.5) <= 0.8 * p


def test_iterated_params():
    params = iterated_params(ProblemSize(10))
    assert params.repetitions == 20
    assert params.total_steps == 20 * 25
    assert params.total_steps <= 512
    assert 0.0 < params.p_cut_min < 1.0


def test_build_breakeven_table_small():
    # Three decades of step sizes keep the exponent identifiable at few runs.
    sizes = [ProblemSize(n) for n in (12, 10, 11)]
    template = LadderConfig(d_sigma=1e-4, p_cut=0.5, runs=8, master_seed=SUITE_SEED)
    rows, fit = build_breakeven_table(sizes, template, d_sigmas=(1e-4, 1e-5, 1e-6, 1e-7))
    assert [r.n for r in rows] == [10, 11, 12]
    for r in rows:
        assert r.N == 2**r.n
        assert np.allclose(r.p_cut, min_p_cut(ProblemSize(r.n)), atol=1e-15)
        assert r.sigma_max > 0.0
    assert fit is not None and fit.exponent < 0.0


def test_breakeven_failed_rows_are_skipped(monkeypatch):
    # Substitute a synthetic ladder so the test isolates the row-skipping
    # logic from simulation statistics.
    def fake(size, cfg):
        if size.n == 11:
            raise DegenerateStateError("forced")
        mean = 0.001 * (1024.0 / size.N) ** 0.7 + 0.02 * cfg.d_sigma**0.3
        return iterated_mod.SigmaMaxStat(mean=mean, stderr=1e-6, runs=cfg.runs, d_sigma=cfg.d_sigma)

    monkeypatch.setattr(iterated_mod, "sigma_max_averaged", fake)
    sizes = [ProblemSize(n) for n in (10, 11, 12)]
    template = LadderConfig(d_sigma=1e-4, p_cut=0.5, runs=2, master_seed=SUITE_SEED)
    rows, fit = build_breakeven_table(sizes, template, d_sigmas=(1e-4, 3e-5, 1e-5, 3e-6, 1e-6))
    assert [r.n for r in rows] == [10, 12]
    assert fit is None
