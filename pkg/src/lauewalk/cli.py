"""``lauewalk`` command-line front end.

Each subcommand runs one experiment and writes a CSV, JSON or SVG table.
Parameter precedence is: command-line flag, then ``--config`` file
(``key=value`` lines, ``#`` comments), then the per-command default.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .crystal import (
    BladeSpec,
    borrmann_profile,
    default_theta_grid,
    integrated_intensities,
    pendellosung_scan,
    thickness_scan,
)
from .ddref import DDParams, dd_amplitudes, dd_blade_angles, qi_dd_crosscheck
from .emit import FORMATS, ResultEnvelope, render, write
from .interferometer import (
    InterferometerSpec,
    UndefinedContrastError,
    blade_output_profiles,
    contrast,
    contrast_vs_planes,
    fringe_scan,
)
from .lattice import InvalidParameterError, SplitterParams, derive_coefficients

COMMANDS = (
    "splitter",
    "borrmann",
    "pendellosung",
    "integrated",
    "thickness-scan",
    "interferometer",
    "contrast-sweep",
    "ddref",
    "crosscheck",
)

# key -> (type, converted by --degrees)
PARAMETERS = {
    "planes": (int, False),
    "theta": (float, True),
    "xi": (float, True),
    "zeta": (float, True),
    "node": (float, False),
    "node_axis": (str, False),
    "theta_points": (int, False),
    "chi_min": (float, True),
    "chi_max": (float, True),
    "chi_points": (int, False),
    "n_min": (int, False),
    "n_max": (int, False),
    "A": (float, False),
    "eta": (float, False),
    "eta_min": (float, False),
    "eta_max": (float, False),
    "eta_points": (int, False),
    "z_over_d": (float, False),
    "blades": (int, False),
    "profiles": (bool, False),
    "format": (str, False),
    "output": (str, False),
    "degrees": (bool, False),
}

COMMON_DEFAULTS = {
    "xi": 0.0,
    "zeta": 0.0,
    "format": "csv",
    "output": "-",
    "degrees": False,
}

COMMAND_DEFAULTS = {
    "splitter": {"theta": math.pi / 4},
    "borrmann": {"planes": 150, "theta": math.pi / 4},
    "pendellosung": {"planes": 50, "node": 25.0, "node_axis": "exit", "theta_points": 500},
    "integrated": {"planes": 150, "theta": math.pi / 4},
    "thickness-scan": {"theta": math.pi / 8, "n_min": 1, "n_max": 60},
    "interferometer": {
        "planes": 100,
        "theta": math.pi / 4,
        "blades": 3,
        "chi_min": 0.0,
        "chi_max": 2 * math.pi,
        "chi_points": 128,
        "profiles": False,
    },
    "contrast-sweep": {"theta": 17 * math.pi / 36, "n_min": 50, "n_max": 300, "chi_points": 128, "blades": 3},
    "ddref": {"A": math.pi / 3, "eta": 0.0, "eta_points": 1, "z_over_d": 1.0},
    "crosscheck": {"planes": 1, "theta": math.pi / 3, "A": math.pi / 3, "eta": 0.0, "z_over_d": 1.0, "chi_points": 128},
}


class UsageError(Exception):
    """Invalid arguments or config (exit status 2)."""


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)


def _truthy(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """Parse a flat ``key=value`` file; keys may use ``-`` or ``_``."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in PARAMETERS or key == "config":
            raise UsageError(f"{path}:{number}: unknown key {key!r}")
        kind = PARAMETERS[key][0]
        try:
            values[key] = _truthy(value) if kind is bool else kind(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{number}: bad value for {key}: {value!r}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--planes", type=int, default=S, help="planes per blade (N)")
    common.add_argument("--theta", type=float, default=S, help="node splitting angle")
    common.add_argument("--xi", type=float, default=S, help="transmission phase")
    common.add_argument("--zeta", type=float, default=S, help="reflection phase")
    common.add_argument("--node", type=float, default=S, help="post-selected exit node")
    common.add_argument("--node-axis", dest="node_axis", choices=("exit", "lattice"), default=S)
    common.add_argument("--theta-points", dest="theta_points", type=int, default=S)
    common.add_argument("--chi-min", dest="chi_min", type=float, default=S)
    common.add_argument("--chi-max", dest="chi_max", type=float, default=S, help="exclusive upper end")
    common.add_argument("--chi-points", dest="chi_points", type=int, default=S)
    common.add_argument("--n-min", dest="n_min", type=int, default=S)
    common.add_argument("--n-max", dest="n_max", type=int, default=S)
    common.add_argument("--A", dest="A", type=float, default=S, help="dimensionless thickness")
    common.add_argument("--eta", type=float, default=S, help="Bragg deviation")
    common.add_argument("--eta-min", dest="eta_min", type=float, default=S)
    common.add_argument("--eta-max", dest="eta_max", type=float, default=S)
    common.add_argument("--eta-points", dest="eta_points", type=int, default=S)
    common.add_argument("--z-over-d", dest="z_over_d", type=float, default=S)
    common.add_argument("--blades", type=int, default=S)
    common.add_argument("--profiles", action="store_true", default=S, help="emit per-beam profiles")
    common.add_argument("--format", choices=FORMATS, default=S)
    common.add_argument("--output", default=S, help="output path ('-' for stdout)")
    common.add_argument("--config", default=S, help="key=value config file")
    common.add_argument("--degrees", action="store_true", default=S, help="angles given in degrees")

    parser = argparse.ArgumentParser(prog="lauewalk", description="Beam-splitter lattice model of Laue diffraction.")
    parser.add_argument("--version", action="version", version=f"lauewalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _validate(command: str, p: dict) -> None:
    def need(cond, message):
        if not cond:
            raise UsageError(message)

    for key in ("planes", "blades"):
        if key in p:
            need(p[key] >= 1, f"--{key} must be >= 1")
    for key in ("theta_points", "chi_points", "eta_points"):
        if key in p:
            need(p[key] >= 1, f"--{key.replace('_', '-')} must be >= 1")
    if "n_min" in p and "n_max" in p:
        need(1 <= p["n_min"] <= p["n_max"], "--n-min/--n-max must satisfy 1 <= n-min <= n-max")
    if command == "interferometer":
        need(p["blades"] >= 2, "--blades must be >= 2 for an interferometer")
        need(p["chi_max"] > p["chi_min"], "--chi-max must exceed --chi-min")
    if command == "contrast-sweep":
        need(p["chi_points"] >= 8, "--chi-points must be >= 8 for contrast")
    if "A" in p:
        need(p["A"] >= 0, "--A must be >= 0")
    if "z_over_d" in p:
        need(0 <= p["z_over_d"] <= 1, "--z-over-d must lie in [0, 1]")
    if command == "ddref" and p.get("eta_points", 1) > 1:
        need("eta_min" in p and "eta_max" in p, "--eta-points > 1 needs --eta-min and --eta-max")
    for key, value in p.items():
        if isinstance(value, float):
            need(math.isfinite(value), f"--{key} must be finite")


def parse_args(argv=None) -> RunConfig:
    """Resolve flags, config file and defaults into a :class:`RunConfig`.

    Raises :class:`UsageError` on invalid input (argparse itself exits with 2).
    """
    args = vars(_build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    given = read_config(config_path) if config_path is not None else {}
    given.update(args)
    # only user-supplied angles are converted; built-in defaults are radians
    if given.pop("degrees", False):
        for key, (_kind, angular) in PARAMETERS.items():
            if angular and key in given:
                given[key] = math.radians(given[key])
    resolved = dict(COMMON_DEFAULTS)
    resolved.update(COMMAND_DEFAULTS[command])
    resolved.update(given)
    resolved.pop("degrees", None)
    _validate(command, resolved)
    return RunConfig(command, resolved)


def _params(p: dict) -> SplitterParams:
    return SplitterParams(p["xi"], p["theta"], p["zeta"])


def _meta(config: RunConfig, **extra) -> dict:
    meta = {
        "command": config.command,
        "parameters": {k: v for k, v in sorted(config.parameters.items()) if k not in ("output", "format")},
        "version": __version__,
    }
    meta.update(extra)
    return meta


def _splitter(config, p):
    params = _params(p)
    c = derive_coefficients(params)
    rows = [(name, v.real, v.imag, abs(v) ** 2) for name, v in
            (("t_a", c.t_a), ("t_b", c.t_b), ("r_a", c.r_a), ("r_b", c.r_b))]
    meta = _meta(config, splitter=params.as_dict(), unitarity_defects=list(c.unitarity_defects()))
    return meta, ("coefficient", "real", "imag", "abs2"), rows


def _borrmann(config, p):
    params = _params(p)
    prof = borrmann_profile(BladeSpec(p["planes"], params))
    return _meta(config, splitter=params.as_dict(), total=prof.total()), ("j", "intensity_T", "intensity_R"), prof.rows


def _pendellosung(config, p):
    grid = default_theta_grid(p["theta_points"])
    scan = pendellosung_scan(p["planes"], p["node"], grid, p["xi"], p["zeta"], axis=p["node_axis"])
    return _meta(config, lattice_index=scan.notes["lattice_index"]), scan.columns, scan.rows


def _integrated(config, p):
    params = _params(p)
    i_t, i_r = integrated_intensities(BladeSpec(p["planes"], params))
    return _meta(config, splitter=params.as_dict()), ("N", "I_T", "I_R"), [(p["planes"], i_t, i_r)]


def _thickness(config, p):
    params = _params(p)
    scan = thickness_scan(params, p["n_min"], p["n_max"])
    return _meta(config, splitter=params.as_dict()), scan.columns, scan.rows


def _interferometer(config, p):
    params = _params(p)
    spec = InterferometerSpec.identical(p["planes"], params, p["blades"])
    if p["profiles"]:
        profiles = blade_output_profiles(spec, chi=p["chi_min"])
        rows = [(label, j, t, r) for label, prof in profiles.items() for j, t, r in prof.rows]
        return _meta(config, device=spec.describe()), ("beam", "j", "intensity_T", "intensity_R"), rows
    chi = p["chi_min"] + (p["chi_max"] - p["chi_min"]) * np.arange(p["chi_points"]) / p["chi_points"]
    series = fringe_scan(spec, chi)
    extra = {"device": spec.describe()}
    try:
        c = contrast(series)
        extra["contrast"] = {
            "coeff_A": c.coeff_A,
            "coeff_B": c.coeff_B,
            "contrast_O": c.contrast_O,
            "contrast_H": c.contrast_H,
            "phase_O": c.phase_O,
            "phase_H": c.phase_H,
        }
    except (UndefinedContrastError, InvalidParameterError) as exc:
        extra["contrast"] = f"undefined: {exc}"
    rows = list(zip(series.chi.tolist(), series.I_O.tolist(), series.I_H.tolist(), series.I_discarded.tolist()))
    return _meta(config, **extra), ("chi", "I_O", "I_H", "I_discarded"), rows


def _contrast_sweep(config, p):
    params = _params(p)
    scan = contrast_vs_planes(params, p["n_min"], p["n_max"], p["chi_points"], p["blades"])
    undefined = scan.notes["undefined"]
    if len(undefined) == len(scan.rows):
        raise UndefinedContrastError("contrast is undefined for every plane count in the range")
    return _meta(config, splitter=params.as_dict(), undefined_N=undefined), scan.columns, scan.rows


def _ddref(config, p):
    if p.get("eta_points", 1) > 1:
        etas = np.linspace(p["eta_min"], p["eta_max"], p["eta_points"]).tolist()
    else:
        etas = [p["eta"]]
    rows = []
    for eta in etas:
        dd = DDParams(p["A"], eta, p["z_over_d"])
        amps = dd_amplitudes(dd)
        ang = dd_blade_angles(dd)
        rows.append((eta, abs(amps.t), abs(amps.r), amps.T, amps.R, ang.phi, ang.rho, ang.vartheta))
    return _meta(config), ("eta", "abs_t", "abs_r", "T", "R", "phi", "rho", "vartheta"), rows


def _crosscheck(config, p):
    report = qi_dd_crosscheck(
        BladeSpec(p["planes"], _params(p)), DDParams(p["A"], p["eta"], p["z_over_d"]), p["chi_points"]
    )
    return _meta(config), ("quantity", "value"), list(report.items())


HANDLERS = {
    "splitter": _splitter,
    "borrmann": _borrmann,
    "pendellosung": _pendellosung,
    "integrated": _integrated,
    "thickness-scan": _thickness,
    "interferometer": _interferometer,
    "contrast-sweep": _contrast_sweep,
    "ddref": _ddref,
    "crosscheck": _crosscheck,
}


def run(config: RunConfig) -> ResultEnvelope:
    start = time.perf_counter()
    meta, columns, rows = HANDLERS[config.command](config, config.parameters)
    return ResultEnvelope(meta, tuple(columns), [tuple(r) for r in rows], time.perf_counter() - start)


def emit(envelope: ResultEnvelope, fmt: str = "csv", sink=None) -> None:
    write(render(envelope, fmt), sink)


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except UsageError as exc:
        print(f"lauewalk: error: {exc}", file=sys.stderr)
        return 2
    try:
        envelope = run(config)
    except (UndefinedContrastError, InvalidParameterError, ArithmeticError) as exc:
        print(f"lauewalk: {exc}", file=sys.stderr)
        return 1
    try:
        emit(envelope, config.parameters["format"], config.parameters["output"])
    except OSError as exc:
        print(f"lauewalk: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
