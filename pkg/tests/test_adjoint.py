import math

import numpy as np
import pytest

from kinetic_feedback import SimConfig, run_adjoint_oneshot
from kinetic_feedback.adjoint import (AdjointCollapse, AdjointOverflow, extract_control,
                                      reaction_amplify, source_counts, source_injection,
                                      theta_on_grid, time_average_control, velocity_gradient)
from kinetic_feedback.collisions import c_star_0
from kinetic_feedback.domain import ControlField, GridSpec, ParticleEnsemble

GRID = GridSpec(10, 12, 10.0, 5.0)
# short, coarse but with the default horizon T = 2.5
SMALL = dict(n_t=20, dt=0.125, n_x=10, n_v=12, n_q_terminal=50)


def v_rows(values):
    return np.tile(values, (GRID.n_x, 1))


def test_control_exact_on_linear_profile():
    vc = GRID.v_centers()
    u = extract_control(v_rows(3.0 * vc), 2.0, GRID.dv)
    assert np.allclose(u, 1.5, rtol=1e-12)


def test_control_exact_on_quadratic_interior():
    vc = GRID.v_centers()
    u = extract_control(v_rows(vc ** 2), 1.0, GRID.dv)
    assert np.allclose(u[:, 1:-1], 2 * vc[1:-1], rtol=1e-12, atol=1e-12)
    # one-sided ends
    assert np.allclose(u[:, 0], (vc[1] ** 2 - vc[0] ** 2) / GRID.dv)
    assert np.allclose(u[:, -1], (vc[-1] ** 2 - vc[-2] ** 2) / GRID.dv)


def test_control_scales_with_inverse_nu():
    q = np.random.default_rng(0).normal(size=GRID.shape)
    assert np.allclose(extract_control(q, 2.0, GRID.dv), extract_control(q, 1.0, GRID.dv) / 2)
    with pytest.raises(ValueError):
        extract_control(q, 0.0, GRID.dv)


def test_source_counts_examples():
    theta = np.zeros(GRID.shape)
    flat = np.zeros(GRID.shape)
    assert not source_counts(flat, theta, 1.0, GRID.dv).any()
    theta[4, 5] = -7.6
    counts = source_counts(flat, theta, 1.0, GRID.dv)
    assert counts[4, 5] == 7 and counts.sum() == 7
    steep = v_rows(100.0 * GRID.v_centers())
    assert not source_counts(steep, theta, 1.0, GRID.dv).any()
    assert source_counts(steep, theta, 1.0, GRID.dv, closure=False)[4, 5] == 7


def test_source_skips_outer_ring():
    theta = np.full(GRID.shape, -3.0)
    counts = source_counts(np.zeros(GRID.shape), theta, 1.0, GRID.dv)
    assert not counts[0].any() and not counts[-1].any()
    assert not counts[:, 0].any() and not counts[:, -1].any()
    assert (counts[1:-1, 1:-1] == 3).all()


def test_source_places_particles_in_their_cell():
    theta = np.zeros(GRID.shape)
    theta[3, 7] = -25.0
    ens, total = source_injection(ParticleEnsemble.empty("adjoint"), np.zeros(GRID.shape),
                                  theta, 1, 1.0, GRID, seed=0)
    assert total == 25 and len(ens) == 25
    x0, v0 = 3 * GRID.dx, 7 * GRID.dv - GRID.v_max
    assert ((ens.x >= x0) & (ens.x < x0 + GRID.dx)).all()
    assert ((ens.v >= v0) & (ens.v < v0 + GRID.dv)).all()
    assert len(set(ens.ids.tolist())) == 25


def test_reaction_examples():
    ens = ParticleEnsemble.from_phase(np.linspace(1, 9, 7), np.linspace(-2, 2, 7), "adjoint")
    same, added = reaction_amplify(ens, 0.1, 0.0)
    assert added == 0 and len(same) == 7
    tripled, added = reaction_amplify(ens, 1.0, 2.0)
    assert added == 14 and len(tripled) == 21
    for x in ens.x:
        assert (tripled.x == x).sum() == 3
    with pytest.raises(ValueError):
        reaction_amplify(ens, 0.1, -1.0)


def test_reaction_growth_rate():
    n, m = 1_000_000, 0.001
    ens = ParticleEnsemble.from_phase(np.full(n, 5.0), np.zeros(n), "adjoint")
    out, added = reaction_amplify(ens, 1.0, m, k=3, seed=1)
    assert abs(added / n - m) < 3 * math.sqrt(m * (1 - m) / n)
    assert len(out) == n + added


def test_time_average_examples():
    c = np.random.default_rng(2).normal(size=GRID.shape)
    assert np.allclose(time_average_control(ControlField.constant(c, 5)), c)
    alt = np.array([(-1) ** k * c for k in range(6)])
    assert np.allclose(time_average_control(alt), 0.0)
    w = np.random.default_rng(3).normal(size=(6, *GRID.shape))
    assert np.allclose(time_average_control(2 * alt + 3 * w),
                       2 * time_average_control(alt) + 3 * time_average_control(w))


@pytest.fixture(scope="module")
def small_run():
    cfg = SimConfig(**SMALL)
    return cfg, run_adjoint_oneshot(cfg)


def test_control_recomputable_from_stored_q(small_run):
    cfg, run = small_run
    grid = cfg.grid()
    for k in range(cfg.n_t + 1):
        assert np.array_equal(run.control.u[k], velocity_gradient(run.q_tilde[k], grid.dv) / cfg.nu)
    assert np.allclose(run.control.u_bar, run.control.u.mean(axis=0))


def test_particle_bookkeeping(small_run):
    cfg, run = small_run
    start = run.counts[cfg.n_t]
    grown = run.injected.sum() + run.reaction.sum()
    lost = run.stats.removed + run.stats.absorbed
    assert run.counts[0] == start + grown - lost
    assert (run.counts >= 0).all()


def test_huge_nu_injects_floor_of_theta():
    cfg = SimConfig(**SMALL, nu=1e12)
    run = run_adjoint_oneshot(cfg)
    th = theta_on_grid(0, cfg.objective(), cfg.orbit(), cfg.grid(), cfg.n_t)
    expected = np.floor(-th[1:-1, 1:-1]).sum()
    assert (run.injected[1:] == expected).all()


def test_transport_only_run_keeps_its_particles():
    cfg = SimConfig(**SMALL, c_theta=0.0, tau=1e9, alpha=1.0, max_substep=1e-2)
    run = run_adjoint_oneshot(cfg)
    assert run.injected.sum() == 0
    assert run.stats.absorbed == 0
    # dt * C0* is ~1e-10 here, so the reaction never fires and only collision removal counts
    assert cfg.dt * c_star_0(cfg.ks()) < 1e-9
    assert run.reaction.sum() == 0
    assert run.counts[0] == run.counts[cfg.n_t] - run.stats.removed


def test_collapse_and_overflow_are_reported():
    with pytest.raises(AdjointCollapse):
        run_adjoint_oneshot(SimConfig(**(SMALL | dict(n_q_terminal=1)), c_theta=0.0,
                                      alpha=0.0, tau=1e9, max_substep=1e-2,
                                      z_t=(9.9, 4.9), sigma_phi=(1e-10, 1e-10)))
    with pytest.raises(AdjointOverflow):
        run_adjoint_oneshot(SimConfig(**SMALL, max_adjoint_particles=60))


def test_serial_and_parallel_agree(small_run):
    cfg, run = small_run
    par = run_adjoint_oneshot(cfg, workers=3)
    assert np.array_equal(run.control.u, par.control.u)
    assert np.array_equal(run.counts, par.counts)
