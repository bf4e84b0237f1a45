"""Samplers against exact oracles, seed determinism, and parameter validation."""

import numpy as np
import pytest

from vertexflow.errors import EnumerationCapError, ParameterRangeError
from vertexflow.lattice import ModelParams, rectangle_domain
from vertexflow.sampler import (
    beta_first_moment,
    enumerate_higher_spin,
    enumerate_sc6v,
    qhahn_boundary_probs,
    sample_higher_spin,
    sample_qhahn,
    sample_sc6v,
    sc6v_quadrant_domain,
    simulate_beta_polymer,
)


def poch_inf(x, q):
    out, p = 1.0, 1.0
    while p > 1e-18:
        out *= 1 - p * x
        p *= q
    return out


def test_seed_determinism_and_worker_streams():
    params = ModelParams(q=0.4, row_rapidities=(2.0,), col_rapidities=(1.0,))
    dom = rectangle_domain(1, 1, (0, 1))
    b1 = sample_sc6v(dom, params, seed=5, count=300)
    b2 = sample_sc6v(dom, params, seed=5, count=300)
    assert np.array_equal(b1.h_edges, b2.h_edges)
    assert np.array_equal(b1.v_edges, b2.v_edges)
    b3 = sample_sc6v(dom, params, seed=5, count=300, workers=3)
    b4 = sample_sc6v(dom, params, seed=5, count=300, workers=3)
    assert np.array_equal(b3.h_edges, b4.h_edges)
    assert not np.array_equal(b1.h_edges, b3.h_edges)  # streams differ by worker


def test_sc6v_one_by_one_probabilities():
    q, z = 0.4, 2.0
    params = ModelParams(q=q, row_rapidities=(2.0,), col_rapidities=(1.0,))
    dom = rectangle_domain(1, 1, (0, 1))
    batch = sample_sc6v(dom, params, seed=11, count=200000)
    frac_right = (batch.h_edges[:, 1, 1] == 1).mean()
    frac_up = (batch.v_edges[:, 1, 1] == 1).mean()
    want_right = (z - 1) / (z - q)
    want_up = (1 - q) / (z - q)
    sig = np.sqrt(want_right * want_up / 200000)
    assert abs(frac_right - want_right) < 4 * sig
    assert abs(frac_up - want_up) < 4 * sig


def test_sc6v_empty_boundary_is_deterministic():
    params = ModelParams(q=0.4, row_rapidities=(2.0, 2.2), col_rapidities=(1.0, 1.1))
    dom = rectangle_domain(2, 2, (0, 0, 0, 0))
    batch = sample_sc6v(dom, params, seed=1, count=50)
    assert not batch.h_edges.any() and not batch.v_edges.any()


def test_sc6v_parameter_range_error_names_vertex():
    params = ModelParams(q=0.4, row_rapidities=(0.5,), col_rapidities=(1.0,))  # z < 1
    dom = rectangle_domain(1, 1, (0, 1))
    with pytest.raises(ParameterRangeError, match=r"vertex \(1, 1\)"):
        sample_sc6v(dom, params, seed=0, count=10)


def test_enumerate_degenerate_domain():
    # Q = P: zero vertices, a single entry of weight 1
    from vertexflow.lattice import SkewDomain, UpLeftPath

    params = ModelParams(q=0.4, row_rapidities=(2.0,), col_rapidities=(1.0, 1.1))
    path = UpLeftPath((5, 1), "HVHV")
    dom = SkewDomain(path, path, (0, 1, 1, 3))
    ens = enumerate_sc6v(dom, params)
    assert len(ens.entries) == 1 and ens.entries[0][0] == 1.0


def test_enumerate_sc6v_small_cases():
    params = ModelParams(q=0.4, row_rapidities=(2.0,), col_rapidities=(1.0,))
    dom0 = rectangle_domain(1, 1, (0, 0))
    # 1x1 with empty boundary: one configuration of weight 1
    ens0 = enumerate_sc6v(dom0, params)
    assert len(ens0.entries) == 1 and abs(ens0.entries[0][0] - 1) < 1e-15
    dom1 = rectangle_domain(1, 1, (0, 1))
    ens = enumerate_sc6v(dom1, params)
    z, q = 2.0, 0.4
    weights = sorted(w for w, _ in ens.entries)
    assert len(weights) == 2
    assert abs(sum(weights) - 1) < 1e-14
    assert abs(min(weights) - min((z - 1) / (z - q), (1 - q) / (z - q))) < 1e-14


def test_enumerate_sc6v_weights_sum_to_one_random():
    import random

    rng = random.Random(3)
    for _ in range(5):
        params = ModelParams(
            q=rng.uniform(0.2, 0.6),
            row_rapidities=tuple(rng.uniform(1.5, 2.5) for _ in range(2)),
            col_rapidities=tuple(rng.uniform(0.9, 1.2) for _ in range(3)),
        )
        coloring = sorted(rng.randint(0, 3) for _ in range(5))
        dom = rectangle_domain(2, 3, coloring)
        ens = enumerate_sc6v(dom, params)
        assert abs(ens.total_weight() - 1) < 1e-12


def test_enumeration_cap():
    params = ModelParams(q=0.4, row_rapidities=(2.0,) * 5, col_rapidities=(1.0,) * 5)
    dom = rectangle_domain(5, 5, tuple([0] * 5 + [1] * 5))
    with pytest.raises(EnumerationCapError):
        enumerate_sc6v(dom, params, cap=16)


def test_sc6v_frequencies_match_oracle():
    params = ModelParams(q=0.3, row_rapidities=(2.0, 2.4), col_rapidities=(1.0, 1.1))
    dom = rectangle_domain(2, 2, (0, 1, 1, 2))
    ens = enumerate_sc6v(dom, params)
    probs = ens.config_keys()
    batch = sample_sc6v(dom, params, seed=3, count=100000)
    counts = {}
    n_check = 4000
    for i in range(n_check):
        c = batch.config(i)
        key = (tuple(sorted(c.h_edges.items())), tuple(sorted(c.v_edges.items())))
        counts[key] = counts.get(key, 0) + 1
    for key, cnt in counts.items():
        p = probs[key]
        sig = np.sqrt(p * (1 - p) / n_check)
        assert abs(cnt / n_check - p) <= 4 * sig + 5e-3, (cnt / n_check, p)


# ---------------------------------------------------------------------------
# higher spin
# ---------------------------------------------------------------------------


HS_PARAMS = ModelParams(q=0.5, row_rapidities=(5.0, 6.0), col_rapidities=(1.0, 1.1),
                        col_spins=(4.0, 4.0), boundary_levels=(1, 2))


def test_higher_spin_empty_boundary():
    params = ModelParams(q=0.5, row_rapidities=(5.0, 6.0), col_rapidities=(1.0, 1.1),
                         col_spins=(4.0, 4.0), boundary_levels=())
    batch = sample_higher_spin(params, (2, 2), seed=1, count=20)
    assert not batch.h_edges.any() and not batch.v_edges.any()


def test_higher_spin_unfused_reduction():
    # s_j = q^{-1/2} reproduces the SC6V distribution with y' = q^{-1/2} y
    q = 0.36
    params_hs = ModelParams(q=q, row_rapidities=(3.0, 3.4), col_rapidities=(1.0, 1.2),
                            col_spins=(q**-0.5, q**-0.5), boundary_levels=(1, 2))
    ens_hs = enumerate_higher_spin(params_hs, (2, 2))
    assert abs(ens_hs.total_weight() - 1) < 1e-11
    params_6v = ModelParams(q=q, row_rapidities=(3.0, 3.4),
                            col_rapidities=(q**-0.5, q**-0.5 * 1.2), boundary_levels=(1, 2))
    ens_6v = enumerate_sc6v(sc6v_quadrant_domain(2, 2, params_6v), params_6v)
    for pt, c in [((1.5, 2.5), 0), ((2.5, 1.5), 1), ((2.5, 2.5), 0)]:
        assert abs(ens_hs.moment([pt], [c], q) - ens_6v.moment([pt], [c], q)) < 1e-11


def test_higher_spin_sampler_matches_oracle():
    ens = enumerate_higher_spin(HS_PARAMS, (2, 2))
    assert abs(ens.total_weight() - 1) < 1e-11
    batch = sample_higher_spin(HS_PARAMS, (2, 2), seed=9, count=150000)
    q = HS_PARAMS.q
    for pt, c in [((1.5, 2.5), 0), ((2.5, 2.5), 1)]:
        vals = q ** batch.heights(pt, c).astype(float)
        se = vals.std() / np.sqrt(len(vals))
        exact = ens.moment([pt], [c], q)
        assert abs(vals.mean() - exact) <= 4 * se + 1e-4


def test_higher_spin_regime_error():
    bad = ModelParams(q=0.5, row_rapidities=(1.0, 1.1), col_rapidities=(1.0, 1.1),
                      col_spins=(4.0, 4.0), boundary_levels=(1, 2))  # sz < 1 regime
    with pytest.raises(ParameterRangeError, match="vertex"):
        sample_higher_spin(bad, (2, 2), seed=0, count=50)


# ---------------------------------------------------------------------------
# q-Hahn
# ---------------------------------------------------------------------------


def test_qhahn_boundary_distribution():
    q, s, z = 0.4, 0.4, 0.7
    probs = qhahn_boundary_probs(q, s, z)
    want0 = poch_inf(s * s / (z * z), q) / poch_inf(s * s, q)
    assert abs(probs[0] - want0) < 1e-12
    assert abs(probs.sum() - 1) < 1e-10
    assert probs.min() >= 0
    with pytest.raises(ParameterRangeError):
        qhahn_boundary_probs(q, 0.8, 0.7)  # s^2 > z^2


def test_qhahn_empty_boundary_draw():
    # boundary_levels = () means no colors enter: everything stays empty
    q, s, z = 0.4, 0.4, 0.7
    batch = sample_qhahn(q, s, z, (2, 2), (), seed=2, count=30, keep_edges=True)
    assert not batch.h_edges.any() and not batch.v_edges.any()


def test_qhahn_tracked_heights_match_edges():
    q, s, z = 0.4, 0.4, 0.7
    batch = sample_qhahn(q, s, z, (2, 2), (1, 2), seed=13, count=20000,
                         track=[(1.5, 2.5, 0), (2.5, 2.5, 1)], keep_edges=True)
    for key in [(1.5, 2.5, 0), (2.5, 2.5, 1)]:
        a, b, c = key
        assert np.array_equal(batch.tracked_heights[key], batch.heights((a, b), c))


def test_qhahn_forced_up_structure():
    # left-entering paths turn up: no path may cross column line x+1/2 below
    # height (entry row + x)
    q, s, z = 0.4, 0.4, 0.7
    batch = sample_qhahn(q, s, z, (3, 2), (1, 2, 3), seed=4, count=2000, keep_edges=True)
    assert not batch.h_edges[:, 1, 1, :].any()  # crossing x=1.5 at height 1 impossible
    assert not batch.h_edges[:, 2, 1, :].any()
    assert not batch.h_edges[:, 2, 2, :].any()


# ---------------------------------------------------------------------------
# Beta polymer
# ---------------------------------------------------------------------------


def test_beta_polymer_boundaries_and_range():
    bb = simulate_beta_polymer(4.0, 1.0, 5, {0, 1}, seed=21, count=20000,
                               keep_points=[(0, 1, 5), (0, 3, 5), (1, 4, 5), (1, 2, 5)])
    assert np.allclose(bb.value(1, 4, 5), 1.0)
    for key, vals in bb.values.items():
        assert vals.min() >= 0 and vals.max() <= 1, key


def test_beta_polymer_first_moments():
    sigma, rho = 4.0, 1.0
    mu = (sigma - rho) / sigma
    bb = simulate_beta_polymer(sigma, rho, 5, {0}, seed=21, count=100000,
                               keep_points=[(0, 1, 5), (0, 3, 5)])
    z15 = bb.value(0, 1, 5)
    se = z15.std() / np.sqrt(len(z15))
    assert abs(z15.mean() - mu**4) <= 4 * se
    z35 = bb.value(0, 3, 5)
    se = z35.std() / np.sqrt(len(z35))
    assert abs(z35.mean() - beta_first_moment(sigma, rho, 0, 3, 5)) <= 4 * se


def test_beta_polymer_delays_share_noise():
    # Z_(1)^(m,t) computed from the same field: coupling forces Z_(1) >= Z_(0)
    # pathwise on the overlap region (delayed boundary is closer)
    bb = simulate_beta_polymer(4.0, 1.0, 4, {0, 1}, seed=8, count=5000,
                               keep_points=[(0, 2, 4), (1, 2, 4)])
    assert np.all(bb.value(1, 2, 4) >= bb.value(0, 2, 4) - 1e-12)


def test_beta_polymer_invalid_params():
    with pytest.raises(ParameterRangeError):
        simulate_beta_polymer(1.0, 1.5, 4, {0}, seed=0, count=10)


def test_prop_9_1_drift_toward_beta_polymer():
    # q-Hahn with q=e^-eps, s^2=q^sigma, z^2=q^rho, l_i=i: exp(-eps h) drifts
    # toward the Beta-polymer moment as eps decreases
    sigma, rho = 4.0, 1.0
    for (c, m, t) in [(0, 2, 4), (1, 2, 5)]:
        exact = beta_first_moment(sigma, rho, c, m, t)
        errs = []
        for eps in (0.2, 0.1):
            q = float(np.exp(-eps))
            batch = sample_qhahn(q, q ** (sigma / 2), q ** (rho / 2),
                                 (t - 1, max(m - 1, 1)), tuple(range(1, t + 1)),
                                 seed=5, count=40000, track=[(m - 0.5, t - 0.5, c)],
                                 keep_edges=False)
            emp = (q ** batch.tracked_heights[(m - 0.5, t - 0.5, c)].astype(float)).mean()
            errs.append(abs(emp - exact))
        assert errs[1] < errs[0], (c, m, t, errs)
