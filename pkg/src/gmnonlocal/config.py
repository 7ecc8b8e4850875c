"""Run configuration: a strict INI schema with a canonical rendering.

Every key is optional and defaults to the reference pattern-formation
setup, so the empty string parses to a complete, runnable configuration.
Unknown sections or keys are rejected rather than ignored.  Keys that
accept ``auto`` (dt, record_every, a, cutoff_radius, dir) are resolved to
concrete values at parse time, which makes ``render_config`` produce a
fully explicit manifest: rendering and re-parsing a configuration is a
fixed point.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass

from .core import ConfigError, Grid, InitialCondition, KernelError, ModelParams
from .diagnostics import (DiagnosticsConfig, FunctionalParams,
                          sylvester_threshold, validate_functional_params)
from .kernels import KernelSpec, discretize_kernel
from .stepper import StepperConfig, stability_hint

OUTPUT_DIR_ENV = "GM_OUTPUT_DIR"

VERSION = "0.1.0"


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "gm_runs"
    csv: bool = True
    snapshots: bool = True
    heatmaps: bool = True
    enabled: bool = True

    def __post_init__(self):
        if not self.dir:
            raise ConfigError("output dir must be a non-empty path")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    grid: Grid
    ic: InitialCondition
    stepper: StepperConfig
    kernel: KernelSpec | None
    diagnostics: DiagnosticsConfig
    outputs: OutputConfig

    def __post_init__(self):
        wants_kernel = self.stepper.operator_kind == "nonlocal"
        if wants_kernel and self.kernel is None:
            raise ConfigError("nonlocal operator requires a kernel")
        if not wants_kernel and self.kernel is not None:
            raise ConfigError("a kernel is only meaningful with the nonlocal operator")


_MODEL_KEYS = ("p", "q", "r", "s", "b1", "b2", "sigma1", "sigma2", "d1", "d2")
_GRID_KEYS = ("nx", "ny", "lx", "ly")
_IC_KEYS = ("base_u", "base_v", "noise_amp", "rng_seed")
_STEPPER_KEYS = ("operator_kind", "dt", "t_end", "record_every",
                 "positivity_floor", "positivity_policy", "blowup_cap")
_KERNEL_KEYS = ("family", "sigma", "cutoff_radius", "j")
_DIAG_KEYS = ("alpha", "beta", "b", "a", "lb_set")
_OUTPUT_KEYS = ("dir", "csv", "snapshots", "heatmaps", "enabled")
_SECTIONS = ("model", "grid", "ic", "stepper", "kernel", "diagnostics", "outputs")


def _is_auto(raw: str) -> bool:
    return raw.strip().lower() == "auto"


def _to_float(section: str, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: expected a finite number, got {raw!r}")
    return value


def _to_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None


def _to_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low not in ("true", "false"):
        raise ConfigError(f"[{section}] {key}: expected true or false, got {raw!r}")
    return low == "true"


def _check_keys(section: str, raw: dict, allowed: tuple[str, ...]):
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]")


def _wrap(section: str, builder, **kwargs):
    try:
        return builder(**kwargs)
    except (ValueError, KernelError) as err:
        raise ConfigError(f"[{section}] {err}") from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#",),
                                       inline_comment_prefixes=None, strict=True,
                                       empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"malformed configuration: {err}") from None
    if parser.defaults():
        keys = ", ".join(sorted(parser.defaults()))
        raise ConfigError(f"keys outside any section: {keys}")
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section {name!r}")

    def section(name: str) -> dict:
        return dict(parser[name]) if parser.has_section(name) else {}

    raw = section("model")
    _check_keys("model", raw, _MODEL_KEYS)
    model = _wrap("model", ModelParams,
                  **{k: _to_float("model", k, v) for k, v in raw.items()})

    raw = section("grid")
    _check_keys("grid", raw, _GRID_KEYS)
    gvals = {"nx": 100, "ny": 100, "lx": 100.0, "ly": 100.0}
    for key, text_val in raw.items():
        conv = _to_int if key in ("nx", "ny") else _to_float
        gvals[key] = conv("grid", key, text_val)
    # A single-row grid is one dimensional; unit transverse extent keeps
    # the cell weight equal to hx unless ly is set explicitly.
    if gvals["ny"] == 1 and "ly" not in raw:
        gvals["ly"] = 1.0
    grid = _wrap("grid", Grid, **gvals)

    raw = section("ic")
    _check_keys("ic", raw, _IC_KEYS)
    ivals = {}
    for key, text_val in raw.items():
        conv = _to_int if key == "rng_seed" else _to_float
        ivals[key] = conv("ic", key, text_val)
    ic = _wrap("ic", InitialCondition, **ivals)

    raw = section("kernel")
    _check_keys("kernel", raw, _KERNEL_KEYS)
    kernel = None
    if raw:
        family = raw.pop("family", None)
        if family is None:
            raise ConfigError("[kernel] family is required")
        if family == "gaussian":
            if "j" in raw:
                raise ConfigError("[kernel] j is only meaningful for family = rescaled_bump")
            sigma = _to_float("kernel", "sigma", raw.get("sigma", "0.6"))
            cutoff_raw = raw.get("cutoff_radius", "auto")
            cutoff = None if _is_auto(cutoff_raw) else _to_float("kernel", "cutoff_radius", cutoff_raw)
            kernel = _wrap("kernel", KernelSpec, family="gaussian", sigma=sigma,
                           cutoff_radius=cutoff)
        elif family == "rescaled_bump":
            for key in ("sigma", "cutoff_radius"):
                if key in raw:
                    raise ConfigError(f"[kernel] {key} is only meaningful for family = gaussian")
            if "j" not in raw:
                raise ConfigError("[kernel] j is required for family = rescaled_bump")
            kernel = _wrap("kernel", KernelSpec, family="rescaled_bump",
                           j=_to_int("kernel", "j", raw["j"]))
        else:
            raise ConfigError(f"[kernel] family must be gaussian or rescaled_bump, got {family!r}")

    raw = section("stepper")
    _check_keys("stepper", raw, _STEPPER_KEYS)
    operator_kind = raw.get("operator_kind", "local")
    if operator_kind not in ("local", "nonlocal"):
        raise ConfigError(f"[stepper] operator_kind must be local or nonlocal, "
                          f"got {operator_kind!r}")
    if operator_kind == "nonlocal" and kernel is None:
        raise ConfigError("operator_kind = nonlocal requires a [kernel] section")
    if operator_kind == "local" and kernel is not None:
        raise ConfigError("a [kernel] section is only meaningful with "
                          "operator_kind = nonlocal")
    t_end = _to_float("stepper", "t_end", raw.get("t_end", "200.0"))
    dt_raw = raw.get("dt", "auto")
    if _is_auto(dt_raw):
        discrete = None
        if kernel is not None:
            try:
                discrete = discretize_kernel(kernel, grid)
            except KernelError as err:
                raise ConfigError(f"[kernel] {err}") from None
        dt = stability_hint(model, grid, kernel=discrete, t_end=t_end)
    else:
        dt = _to_float("stepper", "dt", dt_raw)
    rec_raw = raw.get("record_every", "auto")
    if _is_auto(rec_raw):
        n_steps = max(1, math.ceil(t_end / dt - 1e-9))
        record_every = max(1, n_steps // 200)
    else:
        record_every = _to_int("stepper", "record_every", rec_raw)
    policy = raw.get("positivity_policy", "strict")
    stepper = _wrap("stepper", StepperConfig, dt=dt, t_end=t_end,
                    operator_kind=operator_kind, record_every=record_every,
                    positivity_floor=_to_float("stepper", "positivity_floor",
                                               raw.get("positivity_floor", "1e-12")),
                    positivity_policy=policy,
                    blowup_cap=_to_float("stepper", "blowup_cap",
                                         raw.get("blowup_cap", "1e6")))

    raw = section("diagnostics")
    _check_keys("diagnostics", raw, _DIAG_KEYS)
    a_raw = raw.get("a", "auto")
    if _is_auto(a_raw):
        a = 1.05 * sylvester_threshold(model.d1, model.d2)
    else:
        a = _to_float("diagnostics", "a", a_raw)
    beta = _to_float("diagnostics", "beta", raw.get("beta", "1.0"))
    alpha_raw = raw.get("alpha", "auto")
    if _is_auto(alpha_raw):
        alpha = max(2.0, 1.05 * model.b2 * beta / model.b1)
    else:
        alpha = _to_float("diagnostics", "alpha", alpha_raw)
    functional = _wrap("diagnostics", FunctionalParams, alpha=alpha, beta=beta,
                       b=_to_int("diagnostics", "b", raw.get("b", "2")), a=a)
    functional, violations = validate_functional_params(functional, model)
    if violations:
        raise ConfigError("[diagnostics] " + "; ".join(violations))
    lb_raw = raw.get("lb_set", "2, 4")
    try:
        lb_set = tuple(sorted({int(tok) for tok in lb_raw.split(",") if tok.strip()}))
    except ValueError:
        raise ConfigError(f"[diagnostics] lb_set: expected comma-separated "
                          f"integers, got {lb_raw!r}") from None
    diagnostics = _wrap("diagnostics", DiagnosticsConfig, functional=functional,
                        lb_set=lb_set)

    raw = section("outputs")
    _check_keys("outputs", raw, _OUTPUT_KEYS)
    dir_raw = raw.get("dir", "auto")
    out_dir = os.environ.get(OUTPUT_DIR_ENV, "gm_runs") if _is_auto(dir_raw) else dir_raw
    outputs = _wrap("outputs", OutputConfig, dir=out_dir,
                    csv=_to_bool("outputs", "csv", raw.get("csv", "true")),
                    snapshots=_to_bool("outputs", "snapshots", raw.get("snapshots", "true")),
                    heatmaps=_to_bool("outputs", "heatmaps", raw.get("heatmaps", "true")),
                    enabled=_to_bool("outputs", "enabled", raw.get("enabled", "true")))
    if outputs.enabled and outputs.csv and not {2, 4} <= set(diagnostics.lb_set):
        raise ConfigError("[diagnostics] lb_set must include 2 and 4 when csv "
                          "output is enabled (the csv schema has l2 and l4 columns)")

    return RunConfig(model=model, grid=grid, ic=ic, stepper=stepper,
                     kernel=kernel, diagnostics=diagnostics, outputs=outputs)


def parse_config_file(path: str) -> RunConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read configuration {path!r}: {err}") from None
    return parse_config(text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Render a configuration in canonical, fully resolved form."""
    lines = ["# run configuration, canonical form",
             f"# generated by gmnonlocal {VERSION}", ""]

    def emit(section: str, pairs):
        lines.append(f"[{section}]")
        for key, value in pairs:
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")

    m = cfg.model
    emit("model", [(k, getattr(m, k)) for k in _MODEL_KEYS])
    g = cfg.grid
    emit("grid", [(k, getattr(g, k)) for k in _GRID_KEYS])
    ic = cfg.ic
    emit("ic", [(k, getattr(ic, k)) for k in _IC_KEYS])
    s = cfg.stepper
    emit("stepper", [("operator_kind", s.operator_kind), ("dt", s.dt),
                     ("t_end", s.t_end), ("record_every", s.record_every),
                     ("positivity_floor", s.positivity_floor),
                     ("positivity_policy", s.positivity_policy),
                     ("blowup_cap", s.blowup_cap)])
    if cfg.kernel is not None:
        k = cfg.kernel
        if k.family == "gaussian":
            emit("kernel", [("family", k.family), ("sigma", k.sigma),
                            ("cutoff_radius", k.cutoff_radius)])
        else:
            emit("kernel", [("family", k.family), ("j", k.j)])
    fp = cfg.diagnostics.functional
    emit("diagnostics", [("alpha", fp.alpha), ("beta", fp.beta), ("b", fp.b),
                         ("a", fp.a),
                         ("lb_set", ", ".join(str(v) for v in cfg.diagnostics.lb_set))])
    o = cfg.outputs
    emit("outputs", [("dir", o.dir), ("csv", o.csv), ("snapshots", o.snapshots),
                     ("heatmaps", o.heatmaps), ("enabled", o.enabled)])
    return "\n".join(lines)
