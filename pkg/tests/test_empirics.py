import math

import numpy as np
import pytest

from rmtwalks.empirics import (PathSample, fdd_stats, mixed_trace_estimate, sample_Y, sample_Y_alpha,
                               sample_Z, symmetric_circulant_weights, write_fdd_csv, write_paths_csv)
from rmtwalks.ensemble import ProcessConfig, build_process
from rmtwalks.errors import ValidationError
from rmtwalks.spectra import circulant_eigenvalues
from rmtwalks.specfn import inverse_subordinator_moment

GRID = [0.0, 0.25, 0.5, 1.0]


def _y_config(n=101, **kw):
    return ProcessConfig("SymmetricCirculant", n, GRID, **kw)


@pytest.mark.parametrize("n", [10, 11])
def test_weights_reproduce_eigenvalues(n):
    snap = build_process(ProcessConfig("SymmetricCirculant", n, [1.0], seed=2))[0]
    row = snap.first_row()
    w = symmetric_circulant_weights(n, np.arange(n))
    assert np.allclose(w @ row[:n // 2 + 1], circulant_eigenvalues(snap), atol=1e-12)


def test_paths_start_at_zero_and_keep_index():
    for sample in (sample_Y(_y_config(), 50),
                   sample_Y_alpha(_y_config(alpha=0.6, clock="fpp_shared"), 50),
                   sample_Z(ProcessConfig("Circulant", 64, GRID), 50)):
        assert np.all(sample.values[:, 0] == 0)
        assert sample.index.shape == (50,)
        assert sample.index.min() >= 0


def test_index_is_uniform():
    sample = sample_Y(_y_config(n=31, seed=5), 4000)
    counts = np.bincount(sample.index, minlength=31)
    assert counts.size == 31 and counts.min() > 0


def test_kind_and_clock_checks():
    with pytest.raises(ValidationError):
        sample_Y(ProcessConfig("Wigner", 10, GRID), 5)
    with pytest.raises(ValidationError):
        sample_Y(_y_config(alpha=0.5, clock="fpp_shared"), 5)
    with pytest.raises(ValidationError):
        sample_Y_alpha(_y_config(), 5)
    with pytest.raises(ValidationError):
        fdd_stats([sample_Y(_y_config(), 5), sample_Y(ProcessConfig("SymmetricCirculant", 11, [0, 1]), 5)],
                  [(0, 1)])


def test_y_covariance_and_increments():
    sample = sample_Y(_y_config(n=201, seed=6), 20000)
    stats = fdd_stats(sample, [(1.0, 1.0), (0.5, 1.0)])
    var, se = stats.get("cov", 1.0, 1.0)
    assert var == pytest.approx(1.0, rel=0.05)
    cov, _ = stats.get("cov", 0.5, 1.0)
    assert cov == pytest.approx(0.5, rel=0.05)
    inc = np.diff(sample.values, axis=1)
    assert abs(np.corrcoef(inc[:, 1], inc[:, 2])[0, 1]) < 0.02
    assert abs(np.corrcoef(inc[:, 0], inc[:, 2])[0, 1]) < 0.02


def test_y_odd_moments_symmetric():
    sample = sample_Y_alpha(_y_config(n=101, alpha=0.5, clock="fpp_shared", seed=7), 20000)
    for k in (1, 2, 3):
        for p in (1, 3):
            x = sample.values[:, k] ** p
            assert abs(x.mean()) < 3 * x.std() / math.sqrt(x.size)


def test_y_alpha_one_is_poisson_clock_bm():
    sample = sample_Y_alpha(_y_config(n=101, clock="fpp_shared", seed=8), 20000)
    assert sample.values[:, 3].var() == pytest.approx(1.0, rel=0.03)


def test_y_alpha_covariance_matches_inverse_mean():
    alpha = 0.6
    sample = sample_Y_alpha(_y_config(n=101, alpha=alpha, clock="fpp_shared", seed=9), 20000)
    stats = fdd_stats(sample, [(0.5, 1.0)])
    cov, _ = stats.get("cov", 0.5, 1.0)
    assert cov == pytest.approx(inverse_subordinator_moment(1, 0.5, alpha), rel=0.07)


def test_z_statistics():
    sample = sample_Z(ProcessConfig("Circulant", 512, GRID, seed=10), 20000)
    stats = fdd_stats(sample, [(1.0, 1.0), (0.5, 1.0), (0.25, 0.5)])
    assert stats.get("cov", 1.0, 1.0)[0] == pytest.approx(1.0, rel=0.05)
    for s, t in ((0.5, 1.0), (0.25, 0.5)):
        assert abs(stats.get("cov", s, t)[0]) == pytest.approx(min(s, t), rel=0.05)
        est, se = stats.get("pcov", s, t)
        assert abs(est.real) < 3 * se and abs(est.imag) < 3 * se
    z = sample.values[:, 3]
    assert z.real.var() == pytest.approx(0.5, rel=0.05)
    assert z.imag.var() == pytest.approx(0.5, rel=0.05)
    est, se = stats.get("re_im", 1.0, 1.0)
    assert abs(est) < 3 * se


def test_covariance_matrix_is_psd():
    sample = sample_Y(_y_config(seed=12), 5000)
    pts = GRID[1:]
    stats = fdd_stats(sample, [(s, t) for i, s in enumerate(pts) for t in pts[i:]])
    assert np.linalg.eigvalsh(stats.covariance_matrix(pts)).min() > -1e-3


def test_free_vs_classical_small():
    w = mixed_trace_estimate(ProcessConfig("Wigner", 200, [0.5, 1.0], trials=10, seed=13), 0.5, 1.0)
    c = mixed_trace_estimate(ProcessConfig("SymmetricCirculant", 200, [0.5, 1.0], trials=10, seed=13),
                             0.5, 1.0)
    assert w.estimate < 0.75 < 0.85 < c.estimate


def test_csv_outputs(tmp_path):
    sample = sample_Z(ProcessConfig("Circulant", 8, [0.0, 1.0]), 3)
    write_paths_csv(tmp_path / "p.csv", sample)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "path_id,t,value,im_value" and len(lines) == 7
    real = PathSample((0.0, 1.0), np.array([[0.0, 1.0], [0.0, -1.0]]), np.array([0, 1]))
    write_fdd_csv(tmp_path / "f.csv", fdd_stats(real, [(1.0, 1.0)]), {(1.0, 1.0, "cov"): 1.0})
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "s,t,statistic,estimate,stderr,theory"
    assert lines[1].startswith("1.0,1.0,cov,2.0,") and lines[1].endswith(",1.0")
