"""Command-line front end.

Commands::

    mcfreq bode CONFIG OUT.csv
    mcfreq cutoff CONFIG --system {channel,diffusion,boundary,transmission,flux-feedback}
    mcfreq design --mu MU --omega-b OMEGA_B
    mcfreq simulate CONFIG --input {step,sine,impulse} [--omega W] --out OUT.csv
    mcfreq validate CONFIG --omegas W1 W2 ...

Exit codes: 0 ok, 2 configuration/argument error, 3 singular evaluation,
4 no cut-off crossing, 5 simulation instability, 6 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

from .boundary import PassiveMembrane, eval_channel, eval_GD_receiver, eval_GFF, eval_GB, eval_rational
from .errors import (
    ChannelError,
    CutoffError,
    DomainError,
    InstabilityError,
    SimulationConfigError,
    SingularityError,
)
from .pde import Impulse, SimConfig, Sine, Step, simulate, validate_against_analytic
from .response import (
    bode_sweep,
    classify_limiting_subsystem,
    diffusion_cutoff,
    gain_db,
    general_cutoff,
    max_distance,
)
from .xfer import DiffusionChannel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_NO_CROSSING = 4
EXIT_UNSTABLE = 5
EXIT_VALIDATION = 6

DEFAULT_SWEEP = {"wmin": 1e-4, "wmax": 1e1, "points": 400}
SWEEP_HEADER = (
    "omega_rad_s",
    "gain_db_channel",
    "gain_db_g1",
    "gain_db_gff",
    "gain_db_gd",
    "phase_deg_channel",
)

_TOP_KEYS = {"mu_um2_per_s", "L_um", "k_per_s", "mu_hat_um_per_s", "sweep", "sim"}
_SWEEP_KEYS = {"wmin", "wmax", "points"}
_SIM_KEYS = {"nx", "dt", "t_end"}


class ConfigError(ChannelError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    mu: float
    L: float
    k: float
    mu_hat: float
    wmin: float
    wmax: float
    points: int
    sim: Optional[dict] = None

    @property
    def chan(self) -> DiffusionChannel:
        return DiffusionChannel(self.mu, self.L)

    @property
    def mem(self) -> PassiveMembrane:
        return PassiveMembrane(self.k, self.mu_hat)


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _line_of(text: str, key: str) -> int:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return 1


def _number(obj, key, text, positive=True, allow_zero=False):
    if key not in obj:
        raise ConfigError(f"line 1: missing required field '{key}'")
    val = obj[key]
    line = _line_of(text, key)
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"line {line}: field '{key}' must be a finite number, got {val!r}")
    if positive and not (val > 0 or (allow_zero and val == 0)):
        need = "non-negative" if allow_zero else "positive"
        raise ConfigError(f"line {line}: field '{key}' must be {need}, got {val!r}")
    return float(val)


def _check_keys(obj, allowed, text, where):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"line {_line_of(text, key)}: unknown field '{key}' in {where}")


def parse_config(text: str) -> ChannelConfig:
    """Parse and validate a channel configuration document (JSON)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError("line 1: configuration must be a JSON object")
    _check_keys(obj, _TOP_KEYS, text, "configuration")
    mu = _number(obj, "mu_um2_per_s", text)
    L = _number(obj, "L_um", text)
    k = _number(obj, "k_per_s", text)
    mu_hat = _number(obj, "mu_hat_um_per_s", text, allow_zero=True)

    sweep = dict(DEFAULT_SWEEP)
    if "sweep" in obj:
        block = obj["sweep"]
        if not isinstance(block, dict):
            raise ConfigError(f"line {_line_of(text, 'sweep')}: 'sweep' must be an object")
        _check_keys(block, _SWEEP_KEYS, text, "sweep")
        for key in block:
            sweep[key] = _number(block, key, text)
        if sweep["wmin"] >= sweep["wmax"]:
            raise ConfigError(f"line {_line_of(text, 'wmin')}: sweep requires wmin < wmax")
        if sweep["points"] != int(sweep["points"]) or sweep["points"] < 2:
            raise ConfigError(f"line {_line_of(text, 'points')}: sweep points must be an integer >= 2")

    sim = None
    if "sim" in obj:
        block = obj["sim"]
        if not isinstance(block, dict):
            raise ConfigError(f"line {_line_of(text, 'sim')}: 'sim' must be an object")
        _check_keys(block, _SIM_KEYS, text, "sim")
        sim = {}
        for key in ("nx", "t_end"):
            sim[key] = _number(block, key, text)
        if sim["nx"] != int(sim["nx"]):
            raise ConfigError(f"line {_line_of(text, 'nx')}: sim nx must be an integer")
        sim["nx"] = int(sim["nx"])
        sim["dt"] = _number(block, "dt", text) if "dt" in block else None

    return ChannelConfig(mu, L, k, mu_hat, sweep["wmin"], sweep["wmax"], int(sweep["points"]), sim)


def load_config(path: str) -> ChannelConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text)


def sweep_rows(cfg: ChannelConfig) -> list[tuple]:
    """One row per frequency: channel/G1/G_FF/G_D gains in dB, channel phase."""
    chan, bl = cfg.chan, cfg.mem.boundary_layer()
    points = bode_sweep(lambda w: eval_channel(bl, chan, 1j * w), cfg.wmin, cfg.wmax, cfg.points)
    rows = []
    for p in points:
        s = 1j * p.omega
        g1 = gain_db(eval_rational(bl.g1, s))
        gff = gain_db(eval_GFF(bl, chan, s))
        gd = gain_db(eval_GD_receiver(chan, s))
        rows.append((p.omega, p.gain_db, g1, gff, gd, p.phase_deg))
    return rows


def _write_csv(out: str, header, rows):
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def cmd_bode(args) -> int:
    cfg = load_config(args.config)
    _write_csv(args.out, SWEEP_HEADER, sweep_rows(cfg))
    return EXIT_OK


_SYSTEMS = ("channel", "diffusion", "boundary", "transmission", "flux-feedback")


def cmd_cutoff(args) -> int:
    cfg = load_config(args.config)
    chan, bl = cfg.chan, cfg.mem.boundary_layer()
    system = args.system
    if system == "diffusion":
        omega_c = diffusion_cutoff(chan).omega_c
    else:
        evaluators = {
            "channel": lambda w: eval_channel(bl, chan, 1j * w),
            "boundary": lambda w: eval_GB(bl, chan, 1j * w),
            "transmission": lambda w: eval_rational(bl.g1, 1j * w),
            "flux-feedback": lambda w: eval_GFF(bl, chan, 1j * w),
        }
        omega_c = general_cutoff(evaluators[system]).omega_c
    print(f"{system} cutoff: {omega_c:.6g} rad/s")
    if system == "channel":
        c = classify_limiting_subsystem(chan, bl)
        print(
            f"verdict: {c.verdict} (omega_D={c.omega_D:.6g} rad/s, "
            f"omega_B={c.omega_B:.6g} rad/s, L_max={c.max_distance:.6g} um)"
        )
    return EXIT_OK


def cmd_design(args) -> int:
    if not (args.mu > 0 and math.isfinite(args.mu)):
        raise ConfigError("--mu must be positive")
    if not (args.omega_b > 0 and math.isfinite(args.omega_b)):
        raise ConfigError("--omega-b must be positive")
    print(f"max distance: {max_distance(args.mu, args.omega_b):.6g} um")
    return EXIT_OK


def _input_from_args(args):
    if args.input == "step":
        return Step(args.amplitude)
    if args.input == "sine":
        if args.omega is None or not args.omega > 0:
            raise ConfigError("--input sine requires a positive --omega")
        return Sine(args.amplitude, args.omega)
    return Impulse(args.area, args.width)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.sim is None:
        raise ConfigError("line 1: simulate requires a 'sim' block in the configuration")
    if args.stride < 1:
        raise ConfigError("--stride must be >= 1")
    sim_cfg = SimConfig(
        cfg.chan,
        cfg.mem,
        nx=cfg.sim["nx"],
        t_end=cfg.sim["t_end"],
        dt=cfg.sim["dt"],
        input=_input_from_args(args),
        record_every=args.stride,
    )
    res = simulate(sim_cfg)
    _write_csv(args.out, ("t_s", "v", "u_L"), zip(res.times, res.v_series, res.uL_series))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_against_analytic(cfg.chan, cfg.mem, args.omegas, workers=args.workers)
    print("omega_rad_s,nx,analytic_gain,sim_gain,gain_err_rel,analytic_phase_deg,sim_phase_deg,phase_err_deg,status")
    for e in report.entries:
        status = "ok" if e.ok else e.error.replace(",", ";")
        print(
            ",".join(
                [fmt(e.omega), str(e.nx), fmt(e.analytic_gain), fmt(e.sim_gain), fmt(e.gain_error),
                 fmt(e.analytic_phase_deg), fmt(e.sim_phase_deg), fmt(e.phase_error_deg), status]
            )
        )
    print(
        f"# max gain error {report.max_gain_error:.3g} (mean {report.mean_gain_error:.3g}), "
        f"max phase error {report.max_phase_error:.3g} deg (mean {report.mean_phase_error:.3g}), "
        f"failures {report.failures}"
    )
    return EXIT_OK if report.passed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcfreq",
        description="Frequency response of bounded molecular-communication channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bode", help="write a gain/phase sweep CSV")
    p.add_argument("config")
    p.add_argument("out")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("cutoff", help="print a -6 dB cut-off frequency")
    p.add_argument("config")
    p.add_argument("--system", choices=_SYSTEMS, default="channel")
    p.set_defaults(func=cmd_cutoff)

    p = sub.add_parser("design", help="longest distance not limited by diffusion")
    p.add_argument("--mu", type=float, required=True, help="diffusion coefficient [um^2/s]")
    p.add_argument("--omega-b", type=float, required=True, help="boundary cut-off [rad/s]")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="finite-difference time series CSV")
    p.add_argument("config")
    p.add_argument("--input", choices=("step", "sine", "impulse"), default="step")
    p.add_argument("--omega", type=float, help="sine frequency [rad/s]")
    p.add_argument("--amplitude", type=float, default=1.0, help="step/sine amplitude")
    p.add_argument("--area", type=float, default=1.0, help="impulse area")
    p.add_argument("--width", type=float, default=None, help="impulse width [s] (default 10 dt)")
    p.add_argument("--stride", type=int, default=1, help="write every N-th time step")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="compare simulation against analytic response")
    p.add_argument("config")
    p.add_argument("--omegas", type=float, nargs="*", default=[])
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SimulationConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except CutoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
