import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinetic_feedback.config import (ConfigError, SimConfig, format_config, parse_config,
                                     parse_config_text)

TABLE = """\
# published parameter table
n_t = 100
dt = 0.025
n_x = 50
n_v = 50
v_max = 5
p_max = 10.0
dv = 0.2
dp = 0.2
n_f = 10000
gamma = 0.9999
alpha = 0.5
nu = 1
c_theta = 1e3
c_phi = 1e3
c_s = 0.5
n_q_terminal = 600
"""


def test_table_file_is_echoed(tmp_path):
    path = tmp_path / "table.cfg"
    path.write_text(TABLE, encoding="utf-8")
    cfg = parse_config(path)
    assert (cfg.n_t, cfg.dt, cfg.n_x, cfg.n_v, cfg.n_f, cfg.n_q_terminal) == \
        (100, 0.025, 50, 50, 10_000, 600)
    assert (cfg.v_max, cfg.p_max, cfg.gamma, cfg.alpha, cfg.nu) == (5.0, 10.0, 0.9999, 0.5, 1.0)
    assert (cfg.c_theta, cfg.c_phi, cfg.c_s) == (1e3, 1e3, 0.5)
    assert cfg.dx == pytest.approx(0.2) and cfg.dv == pytest.approx(0.2)
    assert cfg.T == pytest.approx(2.5)
    assert cfg == SimConfig()


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("", encoding="utf-8")
    cfg = parse_config(path)
    assert cfg == SimConfig()
    assert cfg.tau_eff == pytest.approx(0.0025)
    assert cfg.beta_eff == pytest.approx(1 / (2 * (1 - 0.9999 ** 2)))
    assert cfg.z_t_eff == pytest.approx((7.5, 0.0))


def test_out_of_range_alpha_names_its_line():
    with pytest.raises(ConfigError, match=r"x\.cfg:3: alpha"):
        parse_config_text("n_t = 10\n\nalpha = 1.5\n", "x.cfg")


@pytest.mark.parametrize("text, pattern", [
    ("bogus = 1\n", "unknown key"),
    ("n_t = 5\nn_t = 6\n", ":2: duplicate"),
    ("just words\n", ":1: expected"),
    ("n_t = 2.5\n", "integer"),
    ("sigma_theta = 1\n", "two numbers"),
    ("closure = maybe\n", "boolean"),
    ("dv = 0.3\n", "inconsistent"),
    ("T = 3.0\n", "inconsistent"),
    ("gamma = 1.0\n", "gamma"),
    ("adjoint_characteristics = sideways\n", "adjoint_characteristics"),
])
def test_rejections(text, pattern):
    with pytest.raises(ConfigError, match=pattern):
        parse_config_text(text)


def test_comments_and_optional_keys():
    cfg = parse_config_text("tau = auto  # derive\nz_t = 7.0, 0.5\nclosure = off\n")
    assert cfg.tau is None and cfg.z_t == (7.0, 0.5) and cfg.closure is False


def test_missing_file_raises():
    with pytest.raises(FileNotFoundError):
        parse_config("/nonexistent/run.cfg")


def effective(cfg):
    return (cfg.tau_eff, cfg.beta_eff, cfg.z_t_eff, cfg.dx, cfg.dv, cfg.T)


configs = st.builds(
    SimConfig,
    n_t=st.integers(1, 400),
    dt=st.floats(1e-4, 1.0),
    n_x=st.integers(2, 80),
    n_v=st.integers(2, 80),
    gamma=st.floats(0.01, 0.99999),
    alpha=st.floats(0.0, 1.0),
    nu=st.floats(1e-3, 1e3),
    sigma_theta=st.tuples(st.floats(0.1, 5), st.floats(0.1, 5)),
    seed=st.integers(0, 2 ** 31),
    closure=st.booleans(),
    adjoint_characteristics=st.sampled_from(["forward-stream", "reversed"]),
    max_substep=st.sampled_from([math.inf, 1e-3]),
)


@given(configs)
def test_round_trip_preserves_effective_values(cfg):
    back = parse_config_text(format_config(cfg))
    assert effective(back) == effective(cfg)
    # derived defaults come back as explicit values, everything else unchanged
    assert back.replace(tau=None, beta=None, z_t=None) == cfg.replace(tau=None, beta=None, z_t=None)
    assert format_config(back) == format_config(cfg)
