"""Flat key = value run configuration for the CLI.

One key per line, '#' starts a comment, values are plain floats/ints/words.
Parsing is strict: unknown keys, keys a mode does not use, missing keys and
bad values are all collected and reported together, so a typo cannot
silently fall back to a default.

Lab-unit conversions happen here and nowhere else: r_ohm is divided by the
resistance quantum hbar/e^2 and bath_temp_kelvin combines with e_c_kelvin
into the normalized inverse temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR = 1.054571817e-34        # J s
E_CHARGE = 1.602176634e-19    # C
R_QUANTUM = HBAR / E_CHARGE**2   # hbar/e^2 = 4108.2358 ohm

MODES = ("closed-sweep", "open-sweep", "lz-analytic", "distribution")

AXES = ("T_ramp", "eps_squared")

# every key any mode understands; used to tell typos from misplaced keys
_ALL_KEYS = {
    "mode", "eps", "t_ramp", "kappa", "r_env", "r_ohm", "beta",
    "bath_temp_kelvin", "e_c_kelvin", "alpha", "gamma", "mix_ground",
    "init_state", "sweep_axis", "sweep_min", "sweep_max", "sweep_count",
    "n_steps", "dt_max", "n_quad",
}

_MODE_KEYS = {
    "closed-sweep": {
        "mode", "eps", "sweep_axis", "sweep_min", "sweep_max", "sweep_count",
        "alpha", "gamma", "mix_ground", "n_steps", "dt_max",
    },
    "lz-analytic": {
        "mode", "eps", "sweep_axis", "sweep_min", "sweep_max", "sweep_count",
        "alpha", "gamma",
    },
    "open-sweep": {
        "mode", "eps", "t_ramp", "kappa", "r_env", "r_ohm", "beta",
        "bath_temp_kelvin", "e_c_kelvin", "init_state", "sweep_axis",
        "sweep_min", "sweep_max", "sweep_count", "n_steps", "dt_max", "n_quad",
    },
    "distribution": {"mode", "eps", "t_ramp"},
}


class ConfigError(ValueError):
    """One or more problems in a run configuration; message lists them all."""


@dataclass(frozen=True)
class SweepConfig:
    """Fully resolved, validated run configuration in normalized units."""

    mode: str
    eps: float | None = None
    t_ramp: float | None = None
    kappa: float = 0.0
    r_env: float = 0.0
    beta: float = math.inf
    e_c_kelvin: float | None = None
    alpha: float = 1.0
    gamma: float = 0.0
    mix_ground: float | None = None
    init_state: str = "ground"
    sweep_axis: str | None = None
    sweep_min: float | None = None
    sweep_max: float | None = None
    sweep_count: int | None = None
    n_steps: int = 4000
    dt_max: float = 5e-4
    n_quad: int = 2001


def _split_lines(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            errors.append(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            continue
        if key in raw:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        raw[key] = value
    if errors:
        raise ConfigError("; ".join(errors))
    return raw


def _get_float(raw, key, errors, allow_inf=False):
    if key not in raw:
        return None
    try:
        v = float(raw[key])
    except ValueError:
        errors.append(f"key '{key}': cannot parse {raw[key]!r} as a number")
        return None
    if not math.isfinite(v) and not (allow_inf and v == math.inf):
        errors.append(f"key '{key}': must be finite, got {raw[key]!r}")
        return None
    return v


def _get_int(raw, key, errors):
    if key not in raw:
        return None
    try:
        return int(raw[key])
    except ValueError:
        errors.append(f"key '{key}': cannot parse {raw[key]!r} as an integer")
        return None


def parse_config(text: str, mode: str | None = None) -> SweepConfig:
    """Parse and validate a configuration, resolving lab units.

    mode, when given (normally from the command line), must agree with any
    mode key inside the file. All problems are collected into one
    ConfigError so a bad file is diagnosed in a single pass.
    """
    raw = _split_lines(text)
    errors: list[str] = []

    file_mode = raw.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise ConfigError(f"key 'mode': must be one of {', '.join(MODES)}, got '{file_mode}'")
    if mode is not None and file_mode is not None and mode != file_mode:
        raise ConfigError(f"mode '{mode}' given but the file says '{file_mode}'")
    eff_mode = mode or file_mode
    if eff_mode is None:
        raise ConfigError("mode is missing (give it on the command line or in the file)")
    if eff_mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got '{eff_mode}'")

    allowed = _MODE_KEYS[eff_mode]
    for key in sorted(raw):
        if key not in _ALL_KEYS:
            errors.append(f"unknown key '{key}'")
        elif key not in allowed:
            errors.append(f"key '{key}' is not used by mode '{eff_mode}'")

    eps = _get_float(raw, "eps", errors)
    t_ramp = _get_float(raw, "t_ramp", errors)
    kappa = _get_float(raw, "kappa", errors)
    r_env = _get_float(raw, "r_env", errors)
    r_ohm = _get_float(raw, "r_ohm", errors)
    beta = _get_float(raw, "beta", errors, allow_inf=True)
    bath_temp = _get_float(raw, "bath_temp_kelvin", errors)
    e_c_kelvin = _get_float(raw, "e_c_kelvin", errors)
    alpha = _get_float(raw, "alpha", errors)
    gamma = _get_float(raw, "gamma", errors)
    mix_ground = _get_float(raw, "mix_ground", errors)
    sweep_min = _get_float(raw, "sweep_min", errors)
    sweep_max = _get_float(raw, "sweep_max", errors)
    sweep_count = _get_int(raw, "sweep_count", errors)
    n_steps = _get_int(raw, "n_steps", errors)
    dt_max = _get_float(raw, "dt_max", errors)
    n_quad = _get_int(raw, "n_quad", errors)
    init_state = raw.get("init_state")
    sweep_axis = raw.get("sweep_axis")

    is_sweep = eff_mode != "distribution"
    required = set()
    if eff_mode == "distribution":
        required = {"eps", "t_ramp"}
    elif eff_mode in ("closed-sweep", "lz-analytic"):
        required = {"eps", "sweep_min", "sweep_max", "sweep_count"}
        if sweep_axis is None:
            sweep_axis = "T_ramp"
        elif sweep_axis != "T_ramp":
            errors.append(f"mode '{eff_mode}' sweeps T_ramp only, got sweep_axis '{sweep_axis}'")
    else:  # open-sweep
        required = {"kappa", "sweep_axis", "sweep_min", "sweep_max", "sweep_count"}
        if sweep_axis is not None and sweep_axis not in AXES:
            errors.append(f"key 'sweep_axis': must be one of {', '.join(AXES)}, got '{sweep_axis}'")
        elif sweep_axis == "T_ramp":
            required.add("eps")
            if "t_ramp" in raw:
                errors.append("t_ramp is the sweep axis here; drop the t_ramp key")
        elif sweep_axis == "eps_squared":
            required.add("t_ramp")
            if "eps" in raw:
                errors.append("eps is set by the eps_squared sweep axis; drop the eps key")
        if r_env is None and r_ohm is None:
            errors.append("missing required key: r_env (or r_ohm)")
        if r_env is not None and r_ohm is not None:
            errors.append("give either r_env or r_ohm, not both")
        if beta is not None and bath_temp is not None:
            errors.append("give either beta or bath_temp_kelvin, not both")
        if bath_temp is not None and e_c_kelvin is None:
            errors.append("bath_temp_kelvin needs e_c_kelvin to fix the energy scale")
        if init_state is not None and init_state not in ("ground", "thermal"):
            errors.append(f"key 'init_state': must be 'ground' or 'thermal', got '{init_state}'")

    missing = sorted(k for k in required if k not in raw and k in allowed)
    if missing:
        errors.append("missing required keys: " + ", ".join(missing))

    # unit resolution
    if r_ohm is not None:
        if r_ohm < 0.0:
            errors.append("key 'r_ohm': must be >= 0")
        else:
            r_env = r_ohm / R_QUANTUM
    if bath_temp is not None and e_c_kelvin is not None:
        if bath_temp <= 0.0:
            errors.append("key 'bath_temp_kelvin': must be > 0")
        elif e_c_kelvin <= 0.0:
            errors.append("key 'e_c_kelvin': must be > 0")
        else:
            beta = e_c_kelvin / bath_temp

    # range checks on whatever parsed
    if eps is not None and not 0.0 < eps <= 0.2:
        errors.append(f"key 'eps': must lie in (0, 0.2], got {eps}")
    if t_ramp is not None and t_ramp <= 0.0:
        errors.append("key 't_ramp': must be > 0")
    if kappa is not None and kappa < 0.0:
        errors.append("key 'kappa': must be >= 0")
    if r_env is not None and r_env < 0.0:
        errors.append("key 'r_env': must be >= 0")
    if beta is not None and beta <= 0.0:
        errors.append("key 'beta': must be > 0 (inf allowed)")
    if alpha is not None and not 0.0 <= alpha <= 1.0:
        errors.append(f"key 'alpha': must lie in [0, 1], got {alpha}")
    if gamma is not None and "alpha" not in raw:
        errors.append("key 'gamma' needs alpha alongside it")
    if mix_ground is not None:
        if not 0.0 <= mix_ground <= 1.0:
            errors.append(f"key 'mix_ground': must lie in [0, 1], got {mix_ground}")
        if "alpha" in raw or "gamma" in raw:
            errors.append("mix_ground replaces alpha/gamma; give one or the other")
    if is_sweep and sweep_min is not None and sweep_max is not None:
        if sweep_min <= 0.0:
            errors.append("key 'sweep_min': must be > 0")
        if sweep_max <= sweep_min:
            errors.append("key 'sweep_max': must exceed sweep_min")
        if sweep_axis == "eps_squared" and sweep_max is not None and sweep_max > 0.04:
            errors.append("key 'sweep_max': eps_squared beyond 0.04 leaves the two-level regime")
    if sweep_count is not None and sweep_count < 2:
        errors.append("key 'sweep_count': need at least 2 points")
    if n_steps is not None and n_steps < 1000:
        errors.append("key 'n_steps': need at least 1000 stored steps")
    if dt_max is not None and dt_max <= 0.0:
        errors.append("key 'dt_max': must be > 0")
    if n_quad is not None and (n_quad < 3 or n_quad % 2 == 0):
        errors.append("key 'n_quad': must be odd and >= 3")

    if errors:
        raise ConfigError("; ".join(errors))

    return SweepConfig(
        mode=eff_mode,
        eps=eps,
        t_ramp=t_ramp,
        kappa=kappa if kappa is not None else 0.0,
        r_env=r_env if r_env is not None else 0.0,
        beta=beta if beta is not None else math.inf,
        e_c_kelvin=e_c_kelvin,
        alpha=alpha if alpha is not None else 1.0,
        gamma=gamma if gamma is not None else 0.0,
        mix_ground=mix_ground,
        init_state=init_state if init_state is not None else "ground",
        sweep_axis=sweep_axis,
        sweep_min=sweep_min,
        sweep_max=sweep_max,
        sweep_count=sweep_count,
        n_steps=n_steps if n_steps is not None else 4000,
        dt_max=dt_max if dt_max is not None else 5e-4,
        n_quad=n_quad if n_quad is not None else 2001,
    )


def config_echo(cfg: SweepConfig) -> list[str]:
    """Canonical 'key = value' lines; parse_config on them rebuilds cfg.

    Only keys meaningful for the mode are emitted, in a fixed order, with
    repr-exact floats, so echoed output is stable and re-runnable.
    """
    lines = [f"mode = {cfg.mode}"]

    def put(key: str, value) -> None:
        if value is not None:
            lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")

    if cfg.mode == "distribution":
        put("eps", cfg.eps)
        put("t_ramp", cfg.t_ramp)
        return lines

    if cfg.mode != "open-sweep" or cfg.sweep_axis == "T_ramp":
        put("eps", cfg.eps)
    else:
        put("t_ramp", cfg.t_ramp)
    put("sweep_axis", cfg.sweep_axis)
    put("sweep_min", cfg.sweep_min)
    put("sweep_max", cfg.sweep_max)
    put("sweep_count", cfg.sweep_count)

    if cfg.mode == "open-sweep":
        put("kappa", cfg.kappa)
        put("r_env", cfg.r_env)
        put("beta", cfg.beta if math.isfinite(cfg.beta) else "inf")
        put("e_c_kelvin", cfg.e_c_kelvin)
        put("init_state", cfg.init_state)
        put("n_steps", cfg.n_steps)
        put("dt_max", cfg.dt_max)
        put("n_quad", cfg.n_quad)
    else:
        if cfg.mix_ground is not None:
            put("mix_ground", cfg.mix_ground)
        else:
            put("alpha", cfg.alpha)
            if cfg.alpha < 1.0:
                put("gamma", cfg.gamma)
        if cfg.mode == "closed-sweep":
            put("n_steps", cfg.n_steps)
            put("dt_max", cfg.dt_max)
    return lines
