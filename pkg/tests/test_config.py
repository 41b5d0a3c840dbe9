import math

import pytest

from qwork.config import (
    R_QUANTUM,
    ConfigError,
    SweepConfig,
    config_echo,
    parse_config,
)

CLOSED = """
mode = closed-sweep
eps = 0.05
sweep_min = 50
sweep_max = 400
sweep_count = 40
"""

OPEN = """
mode = open-sweep
eps = 0.05
kappa = 0.05
r_env = 2.4341
sweep_axis = T_ramp
sweep_min = 50
sweep_max = 400
sweep_count = 8
"""

DISTRIBUTION = """
mode = distribution
eps = 0.05
t_ramp = 200
"""


def test_resistance_quantum_constant():
    assert R_QUANTUM == pytest.approx(4108.2358, abs=1e-3)


def test_closed_sweep_defaults():
    cfg = parse_config(CLOSED)
    assert cfg.mode == "closed-sweep"
    assert cfg.eps == 0.05
    assert cfg.sweep_axis == "T_ramp"
    assert (cfg.sweep_min, cfg.sweep_max, cfg.sweep_count) == (50.0, 400.0, 40)
    assert cfg.alpha == 1.0 and cfg.gamma == 0.0
    assert cfg.n_steps == 4000 and cfg.dt_max == 5e-4
    assert cfg.beta == math.inf


def test_comments_whitespace_and_mode_argument():
    text = "# a run\neps = 0.05  # inline\n\nsweep_min=50\nsweep_max =400\nsweep_count= 4\n"
    cfg = parse_config(text, mode="closed-sweep")
    assert cfg.eps == 0.05 and cfg.sweep_count == 4
    # mode in file alone is enough
    assert parse_config(CLOSED).mode == "closed-sweep"
    # conflicting modes rejected
    with pytest.raises(ConfigError, match="file says"):
        parse_config(CLOSED, mode="open-sweep")
    with pytest.raises(ConfigError, match="mode is missing"):
        parse_config("eps = 0.05\n")
    with pytest.raises(ConfigError, match="must be one of"):
        parse_config("mode = bogus\neps = 0.05\n")


def test_all_errors_reported_together():
    bad = """
mode = closed-sweep
eps = 0.5
sweep_min = -10
sweep_max = -20
typo_key = 1
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    msg = str(exc.value)
    assert "eps" in msg
    assert "sweep_min" in msg
    assert "sweep_max" in msg
    assert "typo_key" in msg
    assert "sweep_count" in msg  # missing required key also listed


def test_empty_config_lists_requirements():
    with pytest.raises(ConfigError) as exc:
        parse_config("", mode="closed-sweep")
    msg = str(exc.value)
    for key in ("eps", "sweep_min", "sweep_max", "sweep_count"):
        assert key in msg


def test_duplicate_and_malformed_lines():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("eps = 0.05\neps = 0.06\n", mode="distribution")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("eps 0.05\n", mode="distribution")
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config(CLOSED.replace("0.05", "zero"))


def test_keys_not_used_by_mode():
    with pytest.raises(ConfigError, match="not used by mode"):
        parse_config(CLOSED + "kappa = 0.1\n")
    with pytest.raises(ConfigError, match="not used by mode"):
        parse_config(DISTRIBUTION + "sweep_min = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(CLOSED + "epsilon = 0.05\n")


def test_lab_unit_resistance():
    cfg = parse_config(OPEN.replace("r_env = 2.4341", "r_ohm = 10000"))
    assert cfg.r_env == pytest.approx(2.4341, abs=1e-4)
    assert cfg.r_env == pytest.approx(10000.0 / R_QUANTUM, rel=1e-15)
    with pytest.raises(ConfigError, match="not both"):
        parse_config(OPEN + "r_ohm = 10000\n")


def test_lab_unit_temperature():
    cfg = parse_config(OPEN + "bath_temp_kelvin = 0.125\ne_c_kelvin = 1.0\n")
    assert cfg.beta == pytest.approx(8.0, rel=1e-15)
    assert cfg.e_c_kelvin == 1.0
    with pytest.raises(ConfigError, match="needs e_c_kelvin"):
        parse_config(OPEN + "bath_temp_kelvin = 0.125\n")
    with pytest.raises(ConfigError, match="not both"):
        parse_config(OPEN + "beta = 8\nbath_temp_kelvin = 0.125\ne_c_kelvin = 1.0\n")


def test_open_sweep_axis_rules():
    cfg = parse_config(OPEN)
    assert cfg.sweep_axis == "T_ramp"
    eps2 = OPEN.replace("sweep_axis = T_ramp", "sweep_axis = eps_squared").replace(
        "eps = 0.05", "t_ramp = 150"
    ).replace("sweep_min = 50", "sweep_min = 1e-4").replace(
        "sweep_max = 400", "sweep_max = 0.04"
    )
    cfg2 = parse_config(eps2)
    assert cfg2.t_ramp == 150.0 and cfg2.eps is None
    # the swept quantity cannot also be a fixed key
    with pytest.raises(ConfigError, match="drop the t_ramp"):
        parse_config(OPEN + "t_ramp = 100\n")
    with pytest.raises(ConfigError, match="drop the eps"):
        parse_config(eps2 + "eps = 0.05\n")
    # eps_squared sweeps must stay inside the two-level window
    with pytest.raises(ConfigError, match="0.04"):
        parse_config(eps2.replace("sweep_max = 0.04", "sweep_max = 0.05"))
    with pytest.raises(ConfigError, match="sweep_axis"):
        parse_config(OPEN.replace("T_ramp", "voltage"))


def test_range_checks():
    with pytest.raises(ConfigError, match="eps"):
        parse_config(CLOSED.replace("eps = 0.05", "eps = 0.3"))
    with pytest.raises(ConfigError, match="sweep_count"):
        parse_config(CLOSED.replace("sweep_count = 40", "sweep_count = 1"))
    with pytest.raises(ConfigError, match="n_steps"):
        parse_config(CLOSED + "n_steps = 100\n")
    with pytest.raises(ConfigError, match="n_quad"):
        parse_config(OPEN + "n_quad = 10\n")
    with pytest.raises(ConfigError, match="alpha"):
        parse_config(CLOSED + "alpha = 1.5\n")
    with pytest.raises(ConfigError, match="needs alpha"):
        parse_config(CLOSED + "gamma = 1.0\n")
    with pytest.raises(ConfigError, match="mix_ground"):
        parse_config(CLOSED + "alpha = 0.5\nmix_ground = 0.5\n")
    with pytest.raises(ConfigError, match="init_state"):
        parse_config(OPEN + "init_state = excited\n")


def test_distribution_mode_is_minimal():
    cfg = parse_config(DISTRIBUTION)
    assert cfg.eps == 0.05 and cfg.t_ramp == 200.0
    with pytest.raises(ConfigError, match="missing required keys"):
        parse_config("mode = distribution\neps = 0.05\n")


def test_echo_round_trips():
    samples = [
        parse_config(CLOSED),
        parse_config(CLOSED + "alpha = 0.7071067811865476\ngamma = 1.25\n"),
        parse_config(CLOSED + "mix_ground = 0.25\n"),
        parse_config(OPEN),
        parse_config(OPEN + "beta = 8\ninit_state = thermal\n"),
        parse_config(DISTRIBUTION),
        parse_config(
            "mode = lz-analytic\neps = 0.05\nsweep_min = 50\nsweep_max = 400\n"
            "sweep_count = 40\n"
        ),
    ]
    for cfg in samples:
        text = "\n".join(config_echo(cfg)) + "\n"
        assert parse_config(text) == cfg


def test_echo_is_mode_scoped():
    lines = config_echo(parse_config(DISTRIBUTION))
    joined = "\n".join(lines)
    assert "sweep" not in joined and "kappa" not in joined
    assert lines[0] == "mode = distribution"


def test_config_is_frozen():
    cfg = parse_config(DISTRIBUTION)
    with pytest.raises(AttributeError):
        cfg.eps = 0.1
    assert isinstance(cfg, SweepConfig)
