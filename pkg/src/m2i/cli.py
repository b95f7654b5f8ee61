"""Command-line front end: one scenario file in, one CSV/JSON table out.

Exit codes: 0 success, 2 invalid configuration, 3 solver trouble (rows are
still written, with ``flag = 1`` on the affected points).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import Any

import numpy as np
import yaml

from . import __version__
from .errors import DomainError, M2IError, SchemaError, UnitError, UnknownPreset
from .fieldsolver import FieldPoint, ShellDesign, field_magnitude, incident_field_at
from .fieldsolver import solve_receiver, solve_transmitter
from .inductance import analyze, resonant_thickness
from .linkmodel import (
    ChannelState,
    bandwidth_3db,
    frequency_response,
    link_metrics,
    pathloss_p2p,
    pathloss_waveguide,
)
from .media import (
    DRUDE_DAMPING,
    PRESETS,
    SHELL_LOSS,
    DrudeParams,
    LayerStack,
    Medium,
    angular,
    preset_medium,
)
from .optimizer import METRICS, VARIABLES, recommend_design, sweep, sweep_gain
from .results import SweepResult

__all__ = [
    "ScenarioConfig",
    "parse_config",
    "config_to_dict",
    "run_scenario",
    "emit",
    "main",
    "COMMANDS",
    "EXIT_OK",
    "EXIT_SCHEMA",
    "EXIT_SOLVER",
]

COMMANDS = ("field", "pathloss", "response", "capacity", "waveguide", "optimize")
EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER = 0, 2, 3
SCHEMA_VERSION = 1
LOSS_LEVELS = ("no", "low", "high")


def _grid(start: float, stop: float, points: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(start, stop, points))


# ---------------------------------------------------------------- schema


@dataclass(frozen=True)
class MediumSpec:
    preset: str | None = "soil"
    rel_permittivity: float | None = None
    rel_permeability: float | None = None
    conductivity: float | None = None


@dataclass(frozen=True)
class ShellSpec:
    # "auto": static mu2 for single-frequency commands, Drude for frequency sweeps
    model: str = "auto"
    loss: str = "no"
    rel_permeability: complex | None = None
    plasma_freq: float = 8.89e7
    damping: float | None = None
    rel_permittivity: float = 1.0


@dataclass(frozen=True)
class DesignSpec:
    coil_radius: float = 0.015
    wire_radius: float = 0.5e-3
    inner_radius: float = 0.025
    outer_radius: float = 0.05
    coil_resistance: float = 0.047
    drive_current: float = 1.0


@dataclass(frozen=True)
class LinkSpec:
    distance: float = 5.0
    distances: tuple = _grid(1.0, 30.0, 30)
    interval: float = 1.0


@dataclass(frozen=True)
class FrequencySpec:
    f0: float = 10e6
    span: float | None = None
    points: int = 401


@dataclass(frozen=True)
class PowerSpec:
    ptb_dbm: float = 10.0
    nnb_dbm: float = -100.0
    transmit_w: float = 1.0


@dataclass(frozen=True)
class OptimizeSpec:
    variable: str = "r1"
    metric: str = "gain"
    grid: tuple = _grid(0.02, 0.045, 26)
    margin: float = 1e-3


@dataclass(frozen=True)
class FieldSpec:
    radii: tuple = _grid(0.06, 1.0, 48)


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    medium: MediumSpec = MediumSpec()
    infill: MediumSpec = MediumSpec(None, 1.0, 5.0, 0.0)
    shell: ShellSpec = ShellSpec()
    design: DesignSpec = DesignSpec()
    link: LinkSpec = LinkSpec()
    frequency: FrequencySpec = FrequencySpec()
    power: PowerSpec = PowerSpec()
    matching: str = "ideal"
    optimize: OptimizeSpec = OptimizeSpec()
    field: FieldSpec = FieldSpec()
    output: OutputSpec = OutputSpec()

    # -- physics objects

    def surrounding(self) -> Medium:
        m = self.medium
        return Medium(m.rel_permittivity, m.rel_permeability, m.conductivity)

    def infill_medium(self) -> Medium:
        m = self.infill
        return Medium(m.rel_permittivity, m.rel_permeability, m.conductivity)

    def stack(self, dispersive: bool = False, loss: str | None = None) -> LayerStack:
        s = self.shell
        use_drude = s.model == "drude" or (s.model == "auto" and dispersive)
        if use_drude:
            damping = s.damping if loss is None else DRUDE_DAMPING[loss]
            shell = DrudeParams(s.plasma_freq, damping, s.rel_permittivity)
        else:
            mu2 = s.rel_permeability if loss is None else SHELL_LOSS[loss]
            shell = Medium(s.rel_permittivity, mu2, 0.0)
        return LayerStack(self.infill_medium(), shell, self.surrounding())

    def shell_design(self) -> ShellDesign:
        return ShellDesign(**asdict(self.design))


_SECTIONS = {f.name: f for f in fields(ScenarioConfig)}
_CHOICES = {
    ("shell", "model"): ("auto", "static", "drude"),
    ("shell", "loss"): LOSS_LEVELS,
    ("optimize", "variable"): VARIABLES,
    ("optimize", "metric"): METRICS,
    ("output", "format"): ("csv", "json"),
    ("matching",): ("ideal", "capacitor_only"),
}


def _number(value, path: str, kind: type):
    if isinstance(value, bool):
        raise SchemaError(path, "expected a number, got a boolean")
    if isinstance(value, str):  # YAML 1.1 reads "1e7" as a string
        try:
            value = float(value)
        except ValueError:
            raise SchemaError(path, f"expected a number, got {value!r}") from None
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise SchemaError(path, f"expected an integer, got {value!r}")
        return value
    if kind is complex:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise SchemaError(path, "complex values are written [real, imag]")
            return complex(_number(value[0], path, float), _number(value[1], path, float))
        return complex(_number(value, path, float))
    if not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _grid_value(value, path: str) -> tuple:
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "points"}
        if extra:
            raise SchemaError(f"{path}.{sorted(extra)[0]}", "unknown key")
        try:
            start, stop = value["start"], value["stop"]
            points = value.get("points", 2)
        except KeyError as exc:
            raise SchemaError(f"{path}.{exc.args[0]}", "missing") from None
        n = _number(points, f"{path}.points", int)
        if n < 1:
            raise UnitError(f"{path}.points", "need at least one point")
        lo, hi = _number(start, f"{path}.start", float), _number(stop, f"{path}.stop", float)
        return _grid(lo, hi, n) if n > 1 else (lo,)
    if isinstance(value, (int, float, str)) and not isinstance(value, bool):
        return (_number(value, path, float),)
    if isinstance(value, (list, tuple)):
        vals = tuple(_number(v, f"{path}[{i}]", float) for i, v in enumerate(value))
        if not vals:
            raise UnitError(path, "empty grid")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise UnitError(path, "grid must be strictly increasing")
        return vals
    raise SchemaError(path, "expected a list or {start, stop, points}")


def _build(default, tree, path: str):
    """Overlay ``tree`` onto the section instance ``default``."""
    if not isinstance(tree, dict):
        raise SchemaError(path, f"expected a mapping, got {type(tree).__name__}")
    known = {f.name: f for f in fields(default)}
    for key in tree:
        if key not in known:
            raise SchemaError(f"{path}.{key}", "unknown key")
    kw = {}
    for name, f in known.items():
        if name not in tree:
            continue
        value, sub = tree[name], f"{path}.{name}"
        fdef = f.default
        if value is None:
            if fdef is not None and not (isinstance(f.type, str) and "None" in f.type):
                raise SchemaError(sub, "may not be null")
            kw[name] = None
        elif isinstance(fdef, tuple):
            kw[name] = _grid_value(value, sub)
        elif "complex" in str(f.type):
            kw[name] = _number(value, sub, complex)
        elif "int" in str(f.type):
            kw[name] = _number(value, sub, int)
        elif "float" in str(f.type):
            kw[name] = _number(value, sub, float)
        else:
            if isinstance(value, bool):  # YAML 1.1 reads bare no/yes as booleans
                raise SchemaError(sub, f"expected a string, got {value!r} (quote it in YAML)")
            if not isinstance(value, str):
                raise SchemaError(sub, f"expected a string, got {type(value).__name__}")
            kw[name] = value
    return replace(default, **kw)


def _check_choice(key: tuple, value, path: str) -> None:
    allowed = _CHOICES[key]
    if value not in allowed:
        raise SchemaError(path, f"{value!r} is not one of {list(allowed)}")


def _materialize_medium(spec: MediumSpec, path: str) -> MediumSpec:
    base = Medium()
    if spec.preset is not None:
        try:
            base = preset_medium(spec.preset)
        except UnknownPreset:
            raise SchemaError(f"{path}.preset", f"unknown preset; choose from {sorted(PRESETS)}") from None
    eps = spec.rel_permittivity if spec.rel_permittivity is not None else base.rel_permittivity
    mu = spec.rel_permeability if spec.rel_permeability is not None else complex(base.rel_permeability).real
    sigma = spec.conductivity if spec.conductivity is not None else base.conductivity
    if sigma < 0:
        raise UnitError(f"{path}.conductivity", "conductivity (S/m) must be non-negative")
    if eps <= 0:
        raise UnitError(f"{path}.rel_permittivity", "relative permittivity must be positive")
    if mu <= 0:
        raise UnitError(f"{path}.rel_permeability", "relative permeability must be positive")
    return MediumSpec(spec.preset, float(eps), float(mu), float(sigma))


def parse_config(doc) -> ScenarioConfig:
    """Validate a config tree (or JSON/YAML text) and fill in defaults.

    Unknown keys raise :class:`SchemaError`; physically invalid values
    raise :class:`UnitError`.  Both carry the dotted path of the field.
    """
    if isinstance(doc, (str, bytes)):
        text = doc.decode() if isinstance(doc, bytes) else doc
        try:
            doc = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError:
            try:
                doc = yaml.safe_load(text)
            except yaml.YAMLError as exc:
                raise SchemaError("$", f"not valid JSON or YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be a mapping")
    for key in doc:
        if key not in _SECTIONS:
            raise SchemaError(key, "unknown key")

    kw: dict[str, Any] = {}
    for name, f in _SECTIONS.items():
        if name not in doc:
            continue
        value = doc[name]
        if name == "matching":
            kw[name] = value
            continue
        if name in ("medium", "infill") and isinstance(value, str):
            value = {"preset": value}
        kw[name] = _build(f.default, value, name)
    cfg = ScenarioConfig(**kw)

    _check_choice(("matching",), cfg.matching, "matching")
    _check_choice(("shell", "model"), cfg.shell.model, "shell.model")
    _check_choice(("shell", "loss"), cfg.shell.loss, "shell.loss")
    _check_choice(("optimize", "variable"), cfg.optimize.variable, "optimize.variable")
    _check_choice(("optimize", "metric"), cfg.optimize.metric, "optimize.metric")
    _check_choice(("output", "format"), cfg.output.format, "output.format")

    medium = _materialize_medium(cfg.medium, "medium")
    infill = _materialize_medium(cfg.infill, "infill")
    s = cfg.shell
    shell = replace(
        s,
        rel_permeability=s.rel_permeability if s.rel_permeability is not None else SHELL_LOSS[s.loss],
        damping=s.damping if s.damping is not None else DRUDE_DAMPING[s.loss],
    )
    if shell.rel_permeability.imag > 0:
        raise UnitError("shell.rel_permeability", "imaginary part must be <= 0 (passive)")
    if shell.plasma_freq <= 0:
        raise UnitError("shell.plasma_freq", "must be positive (rad/s)")
    if shell.damping < 0:
        raise UnitError("shell.damping", "must be non-negative (rad/s)")
    if shell.rel_permittivity <= 0:
        raise UnitError("shell.rel_permittivity", "must be positive")
    cfg = replace(cfg, medium=medium, infill=infill, shell=shell)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            design = cfg.shell_design()
    except DomainError as exc:
        raise UnitError("design", str(exc)) from None
    link = cfg.link
    if link.distance <= 2 * design.outer_radius:
        raise UnitError("link.distance", "devices overlap (need distance > 2 r2)")
    if link.distances[0] <= 2 * design.outer_radius:
        raise UnitError("link.distances", "devices overlap (need distance > 2 r2)")
    if link.interval <= 2 * design.outer_radius:
        raise UnitError("link.interval", "relays overlap (need interval > 2 r2)")
    fr = cfg.frequency
    if fr.f0 <= 0:
        raise UnitError("frequency.f0", "must be positive (Hz)")
    if fr.span is not None and not 0 <= fr.span < 2 * fr.f0:
        raise UnitError("frequency.span", "must lie in [0, 2 f0) Hz")
    if fr.points < 1:
        raise UnitError("frequency.points", "need at least one point")
    if cfg.power.transmit_w <= 0:
        raise UnitError("power.transmit_w", "must be positive (W)")
    if cfg.optimize.margin < 0:
        raise UnitError("optimize.margin", "must be non-negative (m)")
    if cfg.field.radii[0] <= 0:
        raise UnitError("field.radii", "radii must be positive (m)")
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """JSON-ready tree of the effective config; re-parses to ``cfg``."""

    def conv(x):
        if isinstance(x, complex):
            return [x.real, x.imag]
        if isinstance(x, tuple):
            return [conv(v) for v in x]
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        return x

    return conv(asdict(cfg))


# ---------------------------------------------------------------- commands


def _override_grid(cfg: ScenarioConfig, command: str, spec: str) -> ScenarioConfig:
    """Apply ``--grid start:stop:points`` (or ``a,b,c``) to the command's axis."""
    try:
        if ":" in spec:
            start, stop, points = spec.split(":")
            grid = _grid_value({"start": start, "stop": stop, "points": points}, "--grid")
        else:
            grid = _grid_value([s for s in spec.split(",") if s], "--grid")
    except ValueError:
        raise SchemaError("--grid", f"cannot parse {spec!r}") from None
    axis = {"pathloss": ("link", "distances"), "capacity": ("link", "distances"),
            "waveguide": ("link", "distances"), "optimize": ("optimize", "grid"),
            "field": ("field", "radii")}
    if command not in axis:
        raise SchemaError("--grid", f"the {command} command has no grid axis")
    section, key = axis[command]
    tree = config_to_dict(cfg)
    tree[section][key] = list(grid)
    return parse_config(tree)


def _equal_power_current(R_in: float, p_w: float) -> float:
    return math.sqrt(p_w / R_in)


def _run_field(cfg: ScenarioConfig) -> SweepResult:
    """|h| along the axis near the transmitter and the receiver, M2I vs bare.

    Both transmitters are driven with the same input power; the receivers
    sit ``link.distance`` away from their own transmitter.
    """
    w = angular(cfg.frequency.f0)
    stack, design = cfg.stack(), cfg.shell_design()
    bare_stack, bare = stack.uniform(), design.bare()
    d = cfg.link.distance
    out = SweepResult(["r_m", "h_tx_a_per_m", "h_tx_bare_a_per_m", "h_rx_a_per_m",
                       "h_rx_bare_a_per_m", "flag"],
                      meta={"command": "field", "distance_m": d, "transmit_w": cfg.power.transmit_w})
    runs = []
    for st, des in ((stack, design), (bare_stack, bare)):
        tx = solve_transmitter(st, des, w)
        res = analyze(st, des, w)
        I = _equal_power_current(des.coil_resistance + w * res.L_i, cfg.power.transmit_w)
        h = incident_field_at(tx, d)
        rx = solve_receiver(st, des, w, h)
        runs.append((tx, rx, I / des.drive_current, tx.flagged or rx.flagged))
    flagged = any(r[3] for r in runs)
    for r in cfg.field.radii:
        vals = []
        for tx, rx, scale, _ in runs:
            p = FieldPoint(r, 0.0)
            vals.append((field_magnitude(tx, p) * scale, field_magnitude(rx, p) * scale))
        out.append(r, vals[0][0], vals[1][0], vals[0][1], vals[1][1], int(flagged))
    return out


def _state(stack: LayerStack, design: ShellDesign, d: float, w: float):
    res = analyze(stack, design, w, d)
    return ChannelState(L=res.L, M=res.M, R_c=design.coil_resistance, omega=w), res.flagged


def _run_pathloss(cfg: ScenarioConfig) -> SweepResult:
    w = angular(cfg.frequency.f0)
    design = cfg.shell_design()
    stacks = [cfg.stack()] + [cfg.stack(loss=lv) for lv in LOSS_LEVELS]
    bare_stack, bare = cfg.stack().uniform(), design.bare()
    out = SweepResult(["distance_m", "pathloss_db", "pathloss_no_loss_db", "pathloss_low_loss_db",
                       "pathloss_high_loss_db", "pathloss_bare_db", "flag"],
                      meta={"command": "pathloss", "frequency_hz": cfg.frequency.f0,
                            "sign": "positive dB = loss"})
    for d in cfg.link.distances:
        row, flag = [d], 0
        for st, des in [(s, design) for s in stacks] + [(bare_stack, bare)]:
            try:
                state, f = _state(st, des, d, w)
                row.append(pathloss_p2p(state))
                flag |= int(f)
            except (M2IError, ArithmeticError):
                row.append(math.nan)
                flag = 1
        out.append(*row, flag)
    return out


def _run_response(cfg: ScenarioConfig) -> SweepResult:
    fr = cfg.frequency
    stack, design = cfg.stack(dispersive=True), cfg.shell_design()
    span = fr.span
    if span is None:
        span = link_metrics(stack, design, cfg.link.distance, fr.f0, points=fr.points,
                            matching=cfg.matching).bandwidth_hz * 6
    out = frequency_response(stack, design, cfg.link.distance, fr.f0, span, fr.points,
                             matching=cfg.matching)
    out.meta["command"] = "response"
    if len(out) > 1:
        band = bandwidth_3db(out)
        out.meta.update(bandwidth_hz=band.width, crossed=band.crossed, peak_hz=band.f_peak)
    return out


def _run_capacity(cfg: ScenarioConfig, waveguide: bool = False) -> SweepResult:
    fr, pw = cfg.frequency, cfg.power
    stack, design = cfg.stack(dispersive=True), cfg.shell_design()
    bare_stack, bare = stack.uniform(), design.bare()
    cols = ["distance_m", "pathloss_db", "bandwidth_hz", "capacity_bps", "bare_pathloss_db",
            "bare_bandwidth_hz", "bare_capacity_bps", "flag"]
    if waveguide:
        cols.insert(1, "n_coils")
    out = SweepResult(cols, meta={"command": "waveguide" if waveguide else "capacity",
                                  "f0_hz": fr.f0, "ptb_dbm": pw.ptb_dbm, "nnb_dbm": pw.nnb_dbm})
    if waveguide:
        out.meta["interval_m"] = cfg.link.interval
    for d in cfg.link.distances:
        row, flag = [d], 0
        n, hop = None, d
        if waveguide:
            n = max(2, int(round(d / cfg.link.interval)) + 1)
            hop = d / (n - 1)
            if hop <= 2 * design.outer_radius:
                raise UnitError("link.distances", f"{d} m is too short for the relay interval")
            row.append(n)
        for st, des in ((stack, design), (bare_stack, bare)):
            try:
                m = link_metrics(st, des, hop, fr.f0, n=n, ptb_dbm=pw.ptb_dbm,
                                 nnb_dbm=pw.nnb_dbm, points=fr.points, matching=cfg.matching)
                row += [m.pathloss_db, m.bandwidth_hz, m.capacity_bps]
            except (M2IError, ArithmeticError):
                row += [math.nan] * 3
                flag = 1
        out.append(*row, flag)
    return out


def _run_optimize(cfg: ScenarioConfig) -> SweepResult:
    op = cfg.optimize
    stack, design = cfg.stack(), cfg.shell_design()
    w = angular(cfg.frequency.f0)
    if op.variable == "r1" and op.metric == "gain":
        res = sweep_gain(stack, design, cfg.link.distance, op.grid, cfg.matching, cfg.frequency.f0)
    else:
        res = sweep(stack, design, op.variable, op.grid, op.metric, cfg.link.distance,
                    cfg.frequency.f0, cfg.power.ptb_dbm, cfg.power.nnb_dbm)
    out = res.rows
    out.meta["command"] = "optimize"
    try:
        out.meta["resonant_r1_m"] = resonant_thickness(*stack.mus(w), design.outer_radius)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rec = recommend_design(stack, design.outer_radius, op.margin, design, cfg.frequency.f0)
        out.meta["recommended"] = asdict(rec)
    except M2IError as exc:
        out.meta["resonant_r1_m"] = None
        out.meta["note"] = str(exc)
    return out


def run_scenario(cfg: ScenarioConfig, command: str) -> tuple[SweepResult, int]:
    """Run one command; returns the table and the exit code (0 or 3)."""
    runners = {
        "field": _run_field,
        "pathloss": _run_pathloss,
        "response": _run_response,
        "capacity": _run_capacity,
        "waveguide": lambda c: _run_capacity(c, waveguide=True),
        "optimize": _run_optimize,
    }
    if command not in runners:
        raise SchemaError("--command", f"{command!r} is not one of {list(COMMANDS)}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = runners[command](cfg)
    result.meta["config"] = config_to_dict(cfg)
    result.meta["version"] = __version__
    result.meta["schema_version"] = SCHEMA_VERSION
    return result, EXIT_SOLVER if result.flagged else EXIT_OK


def emit(result: SweepResult, fmt: str = "csv") -> str:
    if fmt == "csv":
        return result.to_csv()
    if fmt == "json":
        return result.to_json()
    raise ValueError(f"unknown format {fmt!r}")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="m2i", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="scenario file (JSON or YAML); defaults if omitted")
    p.add_argument("--command", choices=COMMANDS, default="pathloss")
    p.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
    p.add_argument("--out", help="output file (default: output.path, else stdout)")
    p.add_argument("--grid", help="sweep axis override, start:stop:points or a,b,c")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text)
        if args.grid:
            cfg = _override_grid(cfg, args.command, args.grid)
        result, code = run_scenario(cfg, args.command)
    except SchemaError as exc:
        print(f"m2i: config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"m2i: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (M2IError, ArithmeticError) as exc:
        print(f"m2i: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    doc = emit(result, args.format or cfg.output.format)
    path = args.out or cfg.output.path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    if code == EXIT_SOLVER:
        print("m2i: some points were flagged by the solver (see flag column)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
