import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinetic_feedback.domain import (ControlField, GridField, GridSpec, Particle,
                                     ParticleEnsemble, PhaseDomain, cell_center, cell_of,
                                     deposit, lookup)

TABLE1 = GridSpec(50, 50, 10.0, 5.0)


def test_cell_widths_table1():
    assert TABLE1.dx == pytest.approx(0.2)
    assert TABLE1.dv == pytest.approx(0.2)


@pytest.mark.parametrize("x, v, expected", [
    (0.1, -4.9, (1, 1)),
    (0.0, -5.0, (1, 1)),
    (5.03, 6.0, None),
    (10.0, 5.0, (50, 50)),       # outer edges go to the extremal cell
    (0.2, -4.8, (2, 2)),         # interior edge goes to the higher cell
    (-1e-9, 0.0, None),
])
def test_cell_of_examples(x, v, expected):
    assert cell_of(x, v, TABLE1) == expected


@pytest.mark.parametrize("i, j, expected", [
    (1, 1, (0.1, -4.9)),
    (50, 50, (9.9, 4.9)),
    (25, 25, (4.9, -0.1)),
])
def test_cell_center_examples(i, j, expected):
    assert cell_center(i, j, TABLE1) == pytest.approx(expected)


@pytest.mark.parametrize("i, j", [(0, 1), (1, 0), (51, 1), (1, 51)])
def test_cell_center_out_of_range(i, j):
    with pytest.raises(ValueError):
        cell_center(i, j, TABLE1)


@given(st.integers(2, 60), st.integers(2, 60), st.data())
def test_cell_of_inverts_cell_center(n_x, n_v, data):
    grid = GridSpec(n_x, n_v, 10.0, 5.0)
    i = data.draw(st.integers(1, n_x))
    j = data.draw(st.integers(1, n_v))
    assert cell_of(*cell_center(i, j, grid), grid) == (i, j)


def test_deposit_single_particle():
    ens = ParticleEnsemble.from_phase([0.1], [-4.9])
    f = deposit(ens, TABLE1)
    assert f.values[0, 0] == 1
    assert f.values.sum() == 1


def test_deposit_empty():
    f = deposit(ParticleEnsemble.empty(), TABLE1)
    assert f.values.shape == (50, 50)
    assert not f.values.any()


def test_deposit_many_in_window():
    rng = np.random.default_rng(1)
    ens = ParticleEnsemble.from_phase(rng.uniform(0, 10, 10_000), rng.uniform(-5, 5, 10_000))
    assert deposit(ens, TABLE1).values.sum() == 10_000


coords = st.tuples(st.floats(-2, 12, allow_nan=False), st.floats(-7, 7, allow_nan=False))


@given(st.lists(coords, max_size=200), st.randoms())
def test_deposit_total_and_permutation(points, rnd):
    x = np.array([p[0] for p in points], dtype=float)
    v = np.array([p[1] for p in points], dtype=float)
    grid = GridSpec(7, 9, 10.0, 5.0)
    f = deposit(ParticleEnsemble.from_phase(x, v), grid).values
    inside = (x >= 0) & (x <= 10) & (np.abs(v) <= 5)
    assert f.sum() == inside.sum()
    order = list(range(len(x)))
    rnd.shuffle(order)
    g = deposit(ParticleEnsemble.from_phase(x[order], v[order]), grid).values
    assert np.array_equal(f, g)


def test_lookup_zero_outside_window():
    values = np.ones(TABLE1.shape)
    out = lookup(values, np.array([5.0, 5.0, -0.1]), np.array([0.0, 5.1, 0.0]), TABLE1)
    assert out.tolist() == [1.0, 0.0, 0.0]


def test_invalid_domains():
    with pytest.raises(ValueError):
        PhaseDomain(0.0, 5.0)
    with pytest.raises(ValueError):
        PhaseDomain(10.0, 5.0, alpha=1.5)
    with pytest.raises(ValueError):
        GridSpec(1, 5, 10.0, 5.0)


def test_ensemble_helpers():
    ens = ParticleEnsemble.from_particles([Particle(1.0, 2.0, 0.01), Particle(3.0, -1.0)])
    assert len(ens) == 2
    assert ens.particle(0) == Particle(1.0, 2.0, 0.01)
    both = ens.extend(ens.select([1]))
    assert len(both) == 3
    assert both.next_id >= 2
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros(2), np.zeros(1), np.zeros(2), np.zeros(2), np.zeros(2),
                         np.arange(2))


def test_grid_field_check():
    GridField(np.zeros((50, 50))).check(TABLE1)
    with pytest.raises(ValueError):
        GridField(np.zeros((5, 5))).check(TABLE1)


def test_control_field_average_and_bounds():
    u = np.arange(3 * 2 * 2, dtype=float).reshape(3, 2, 2)
    c = ControlField(u)
    assert c.n_t == 2
    assert np.allclose(c.u_bar, u.mean(axis=0))
    with pytest.raises(ValueError):
        c.at(3)
    const = ControlField.constant(np.ones((2, 2)), 4)
    assert const.u.shape == (5, 2, 2)
    assert np.array_equal(const.u_bar, np.ones((2, 2)))
