"""Command-line front end: protocol traces, cycles, optimization, sweeps and figure data.

Exit codes: 0 success, 1 invalid input, 2 valid input but no engine operation,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import protocols as P
from .cycle import FAMILIES, MODES, make_cycle_spec, run_cycle
from .ermakov import accidental_q_closed, solve_ermakov, sta_gamma, sta_times
from .errors import InfeasibleProtocolError, IntegrationError, NoCrossingError, NonOperatingError, OttoError
from .medium import Medium, Reservoirs
from .optimize import SWEEP_FIELDS, efficiency_at_max_power_sweep, optimize_x

EXIT_OK, EXIT_INVALID, EXIT_NON_OPERATING, EXIT_NUMERICAL = 0, 1, 2, 3

COMMANDS = ("protocol", "cycle", "optimize", "sweep", "sta-times", "figure")
PRESETS = ("q-vs-t", "q-vs-tau", "eff-vs-a", "eff-vs-tau")
PROTOCOL_KINDS = ("constant", "accidental", "poly_omega", "poly_b", "sine_b", "lcd")
FORMATS = ("csv", "json")
AXES = {
    "a": "temperature_ratio_a",
    "tau": "stroke_time_tau",
    "lambda": "lambda",
    "n": "n_particles",
}
AXES.update({v: v for v in list(AXES.values())})

DEFAULT_GRIDS = {
    "temperature_ratio_a": "0.02:0.98:49",
    "stroke_time_tau": "0.05:5:100",
    "lambda": "0:2:21",
    "n_particles": "10:500:50",
}
PRESET_GRIDS = {
    "q-vs-t": None,
    "q-vs-tau": "0.01:10:1000",
    "eff-vs-a": "0.02:0.98:49",
    "eff-vs-tau": "0.05:5:100",
}
FIGURE_LAMBDAS = (0.0, 1.0, 2.0)
TRACE_SAMPLES = 501


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    command: str
    omega1: float = 1.0
    omega2: float | None = None
    x: float | None = None
    tau: float = 1.5
    n_particles: int = 500
    lam: float = 0.0
    beta_c: float | None = None
    sigma_c: float | None = None
    a: float = 0.3
    protocol: str = "accidental"
    mode: str = "numeric"
    preset: str | None = None
    grid: str | None = None
    axis: str = "tau"
    n_max: int = 3
    isochore_overhead: float = 0.0
    format: str = "csv"
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.x is not None and self.omega2 is not None:
            raise ConfigError("x and omega2 are mutually exclusive")
        if self.beta_c is not None and self.sigma_c is not None:
            raise ConfigError("beta_c and sigma_c are mutually exclusive")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.protocol not in PROTOCOL_KINDS + FAMILIES:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {sorted(AXES)}")
        if self.grid is not None:
            parse_grid(self.grid)
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ConfigError(f"n_particles must be a positive integer, got {self.n_particles!r}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigError(f"n_max must be a positive integer, got {self.n_max!r}")
        for name in ("omega1", "tau", "a"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.ratio < 1:
            raise ConfigError(f"need 0 < x = omega1/omega2 < 1, got x={self.ratio!r}")

    @property
    def ratio(self):
        if self.omega2 is not None:
            return self.omega1 / self.omega2
        return 0.3 if self.x is None else self.x

    @property
    def omega2_value(self):
        return self.omega1 / self.ratio

    @property
    def cold_beta(self):
        if self.beta_c is not None:
            return self.beta_c
        sigma = 1.0 if self.sigma_c is None else self.sigma_c
        return sigma / (self.n_particles * self.omega1)

    def medium(self, lam=None):
        return Medium(self.n_particles, self.lam if lam is None else lam)

    def reservoirs(self, a=None):
        return Reservoirs.from_ratio(self.cold_beta, self.a if a is None else a)

    def to_dict(self):
        """Flat mapping with external key names; unset optional keys omitted."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            out["lambda" if f.name == "lam" else f.name] = value
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = sorted(set(data) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        return cls(**data)


CONFIG_KEYS = {"lambda" if f.name == "lam" else f.name for f in dataclasses.fields(RunConfig)}


def layer(defaults, config_file, flags):
    """Merge key maps with flags over config-file keys over defaults.

    The x/omega2 and beta_c/sigma_c pairs are resolved per layer: a higher
    layer that sets one member of a pair drops the other from lower layers.
    """
    merged = dict(defaults)
    for source in (config_file, flags):
        for pair in (("x", "omega2"), ("beta_c", "sigma_c")):
            if all(k in source for k in pair):
                raise ConfigError(f"{pair[0]} and {pair[1]} are mutually exclusive")
            for k, other in (pair, pair[::-1]):
                if k in source:
                    merged.pop(other, None)
        merged.update(source)
    return merged


def parse_grid(spec):
    """'start:stop:count' to a uniform grid."""
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:count, got {spec!r}") from None
    if count < 1 or (count > 1 and not stop > start):
        raise ConfigError(f"grid needs count >= 1 and stop > start, got {spec!r}")
    return np.linspace(start, stop, count)


def serialize_config(cfg):
    return json.dumps(cfg.to_dict(), sort_keys=True)


def parse_config(text):
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------------------
# output


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    return str(v)


def json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else float(format(v, ".9g"))
    return v


def render(rows, fmt, header_comment=None, footer_comment=None, single=False):
    """CSV (header row, LF) or JSON (object if ``single``, else array) text."""
    if fmt == "json":
        objs = [{k: json_value(v) for k, v in row.items()} for row in rows]
        return json.dumps(objs[0] if single else objs, indent=1) + "\n"
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([format_value(v) for v in row.values()])
    if footer_comment:
        buf.write(f"# {footer_comment}\n")
    return buf.getvalue()


def metadata_line(pairs):
    return " ".join(f"{k}={format_value(v)}" for k, v in pairs.items())


def emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def build_protocol(cfg):
    w1, w2, tau = cfg.omega1, cfg.omega2_value, cfg.tau
    kind = cfg.protocol
    if kind == "constant":
        return P.constant_protocol(w1, tau)
    if kind == "accidental":
        return P.accidental_protocol(w1, w2, tau, "compression")
    if kind in ("poly_omega", "cd", "adiabatic"):
        return P.poly_omega(w1, w2, tau)
    if kind == "poly_b":
        return P.poly_b_protocol(w1, w2, tau)
    if kind == "sine_b":
        return P.sine_b_protocol(w1, w2, tau / (2.0 * math.pi), 1)
    if kind == "lcd":
        return P.lcd_protocol(P.poly_omega(w1, w2, tau))
    raise ConfigError(f"protocol kind {kind!r} has no finite-time trajectory")


def cmd_protocol(cfg):
    proto = build_protocol(cfg)
    traj = solve_ermakov(proto, n_samples=TRACE_SAMPLES)
    cols = traj.columns()
    if isinstance(proto, P.LCDProtocol):
        cols["omega_lcd"] = np.sqrt(np.maximum(proto.omega_squared(traj.times), 0.0))
        cols["q_lcd"] = P.lcd_q_factor(proto.base, traj.times)
    rows = [dict(zip(cols, vals)) for vals in zip(*cols.values())]
    return render(rows, cfg.format), EXIT_OK


def _family(cfg):
    return "poly_omega" if cfg.protocol in ("constant", "sine_b") else cfg.protocol


def cmd_cycle(cfg):
    spec = make_cycle_spec(cfg.medium(), cfg.reservoirs(), cfg.ratio, cfg.tau, _family(cfg), cfg.omega1,
                           isochore_overhead=cfg.isochore_overhead)
    result = run_cycle(spec, cfg.mode)
    code = EXIT_OK if result.operating else EXIT_NON_OPERATING
    return render([result.to_record()], cfg.format, single=True), code


def cmd_optimize(cfg):
    res = optimize_x(cfg.medium(), cfg.reservoirs(), cfg.tau, mode=cfg.mode, family=_family(cfg),
                     omega1=cfg.omega1, isochore_overhead=cfg.isochore_overhead)
    return render([res.to_record()], cfg.format, single=True), EXIT_OK


def _sweep_rows(grid, extra=None):
    rows = []
    for rec in grid.records():
        row = dict(extra or {})
        row.update((k, rec[k]) for k in SWEEP_FIELDS)
        rows.append(row)
    return rows


def _sweep_meta(cfg, axis, **more):
    meta = {"axis": axis, "n_particles": cfg.n_particles, "lambda": cfg.lam, "beta_c": cfg.cold_beta,
            "a": cfg.a, "tau": cfg.tau, "omega1": cfg.omega1, "family": _family(cfg)}
    meta.update(more)
    return meta


def cmd_sweep(cfg):
    axis = AXES[cfg.axis]
    values = parse_grid(cfg.grid or DEFAULT_GRIDS[axis])
    curves = (_family(cfg), "sudden", "adiabatic")
    grid = efficiency_at_max_power_sweep(axis, values, cfg.medium(), cfg.reservoirs(), cfg.tau,
                                         family=_family(cfg), omega1=cfg.omega1, curves=curves)
    rows = _sweep_rows(grid)
    return render(rows, cfg.format, header_comment=metadata_line(_sweep_meta(cfg, axis))), EXIT_OK


def cmd_sta_times(cfg):
    x = cfg.ratio
    rows = [{"n": n, "tau_n": sta_times(x, cfg.omega1, n), "gamma_n": sta_gamma(x, n)} for n in range(1, cfg.n_max + 1)]
    tau1 = rows[0]["tau_n"]
    ok = 0.5 / cfg.omega1 <= tau1 <= math.pi / cfg.omega1
    footer = f"tau1 bounds 1/(2 omega1) <= tau1 <= pi/omega1: {'ok' if ok else 'VIOLATED'}"
    if cfg.format == "json":
        for row in rows:
            row["tau1_bounds_ok"] = ok
    text = render(rows, cfg.format, footer_comment=footer)
    return text, EXIT_OK if ok else EXIT_NUMERICAL


def _figure_q_vs_t(cfg):
    w1, w2, tau = cfg.omega1, cfg.omega2_value, cfg.tau
    acc = solve_ermakov(P.accidental_protocol(w1, w2, tau), n_samples=TRACE_SAMPLES)
    base = P.poly_omega(w1, w2, tau)
    q_lcd = P.lcd_q_factor(base, acc.times)
    rows = [
        {"t": t, "q_acc": qa, "q_cd": 1.0, "q_lcd": ql}
        for t, qa, ql in zip(acc.times, acc.q, q_lcd)
    ]
    return rows, {"preset": "q-vs-t", "x": cfg.ratio, "omega1": w1, "tau": tau}


def _figure_q_vs_tau(cfg):
    taus = parse_grid(cfg.grid or PRESET_GRIDS["q-vs-tau"])
    x = cfg.ratio
    rows = []
    for tau in taus:
        qa = accidental_q_closed(x, P.gamma_of(cfg.omega1, tau, x))
        q_lcd = float(P.lcd_q_factor(P.poly_omega(cfg.omega1, cfg.omega2_value, tau), tau))
        rows.append({"tau": tau, "q_acc": qa, "q_cd": 1.0, "q_lcd": q_lcd})
    return rows, {"preset": "q-vs-tau", "x": x, "omega1": cfg.omega1}


def _figure_eff(cfg, axis):
    values = parse_grid(cfg.grid or PRESET_GRIDS["eff-vs-a" if axis == "temperature_ratio_a" else "eff-vs-tau"])
    rows = []
    for lam in FIGURE_LAMBDAS:
        grid = efficiency_at_max_power_sweep(axis, values, cfg.medium(lam), cfg.reservoirs(), cfg.tau,
                                             omega1=cfg.omega1)
        rows.extend(_sweep_rows(grid, {"lambda": lam}))
    meta = _sweep_meta(cfg, axis, preset="eff-vs-a" if axis == "temperature_ratio_a" else "eff-vs-tau")
    meta.pop("lambda")
    return rows, meta


def cmd_figure(cfg):
    if cfg.preset is None:
        raise ConfigError(f"figure needs --preset, one of {PRESETS}")
    if cfg.preset == "q-vs-t":
        rows, meta = _figure_q_vs_t(cfg)
    elif cfg.preset == "q-vs-tau":
        rows, meta = _figure_q_vs_tau(cfg)
    elif cfg.preset == "eff-vs-a":
        rows, meta = _figure_eff(cfg, "temperature_ratio_a")
    else:
        rows, meta = _figure_eff(cfg, "stroke_time_tau")
    return render(rows, cfg.format, header_comment=metadata_line(meta)), EXIT_OK


HANDLERS = {
    "protocol": cmd_protocol,
    "cycle": cmd_cycle,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "sta-times": cmd_sta_times,
    "figure": cmd_figure,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors become ``ConfigError`` so they map to the invalid-input exit code."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _flag_parser():
    p = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    add = p.add_argument
    add("--x", type=float, dest="x", help="compression ratio omega1/omega2 (default 0.3)")
    add("--omega1", type=float, help="low trap frequency (default 1)")
    add("--omega2", type=float, help="high trap frequency; excludes --x")
    add("--tau", type=float, help="stroke duration (default 1.5)")
    add("--n", type=int, dest="n_particles", help="particle number N (default 500)")
    add("--lambda", type=float, dest="lambda", help="interaction strength (default 0)")
    add("--beta-c", type=float, dest="beta_c", help="cold inverse temperature")
    add("--sigma-c", type=float, dest="sigma_c", help="N beta_c omega1 (default 1); excludes --beta-c")
    add("--a", type=float, dest="a", help="beta_h / beta_c (default 0.3)")
    add("--protocol", help=f"one of {', '.join(PROTOCOL_KINDS)}")
    add("--mode", help=f"one of {', '.join(MODES)}")
    add("--preset", help=f"figure preset, one of {', '.join(PRESETS)}")
    add("--grid", help="sweep grid start:stop:count")
    add("--axis", help="sweep axis: a, tau, lambda or n")
    add("--n-max", type=int, dest="n_max", help="number of shortcut times (default 3)")
    add("--overhead", type=float, dest="isochore_overhead", help="isochore time added to the cycle")
    add("--format", help="csv or json")
    add("--out", help="output path (default stdout)")
    add("--config", dest="_config", help="JSON file of defaults")
    return p


def build_parser():
    parent = _flag_parser()
    parser = _Parser(prog="ottosta", description="Finite-time quantum Otto cycles with scaling dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "protocol": "trace b, bdot and Q* along one stroke",
        "cycle": "one Otto cycle",
        "optimize": "maximize power over x",
        "sweep": "efficiency at maximum power along an axis",
        "sta-times": "shortcut times of the accidental protocol",
        "figure": "data behind a reference figure panel",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[parent], help=helps[name],
                       argument_default=argparse.SUPPRESS)
    return parser


def config_from_args(argv):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    file_keys = {}
    path = args.pop("_config", None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                file_keys = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(file_keys, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(file_keys) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        file_keys.pop("command", None)
    merged = layer({"command": command}, file_keys, args)
    return RunConfig.from_dict(merged)


def main(argv=None):
    try:
        cfg = config_from_args(argv)
        text, code = HANDLERS[cfg.command](cfg)
    except (InfeasibleProtocolError, ConfigError, ValueError) as exc:
        print(f"ottosta: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonOperatingError as exc:
        print(f"ottosta: not an engine: {exc}", file=sys.stderr)
        return EXIT_NON_OPERATING
    except (IntegrationError, NoCrossingError, OttoError, ArithmeticError) as exc:
        print(f"ottosta: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    emit(text, cfg)
    if code == EXIT_NON_OPERATING:
        print("ottosta: operating point takes no heat or gives no work; efficiency undefined", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
