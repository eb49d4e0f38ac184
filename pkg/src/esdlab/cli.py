"""``esdlab`` command line: evolve one state, scan a grid, run the oracle suite, list families.

Every run is described by one flat JSON object (``--config FILE``).  Any key
can also be given as a flag of the same name (``--t_max 4``), and flags win
over the document.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from .dynamics import (
    InvariantViolated,
    SecularPreconditionViolated,
    StepTooLarge,
    SystemParams,
    integrate,
    rhs_secular,
    rotating_frame_generator,
    secular_generator,
    thermal_generator,
)
from .entanglement import concurrence, concurrence_general, concurrence_x, f_function, g_function
from .qmatrix import NotHermitian, NotPositive
from .scan import MODELS, ScanConfig, Status, canonical_model, effective_dt, run_scan
from .xstate import (
    FAMILIES,
    XState,
    closed_form,
    evolve_kinetic,
    family_from_name,
    kinetic_matrix,
    kinetic_rhs,
    make_initial,
    random_xstate,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TRACE_COLUMNS = ("t", "a", "b", "c", "d", "re_w", "im_w", "re_z", "im_z", "F", "G", "concurrence")
SCAN_COLUMNS = ("param", "omega_c", "t_esd", "revivals", "status")
PARAM_ALIASES = {cls.param_name: kind for kind, cls in FAMILIES.items()}
NUMERIC_ERRORS = (InvariantViolated, StepTooLarge, NotPositive, NotHermitian, FloatingPointError)


class ConfigError(Exception):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


# --- schema ------------------------------------------------------------------


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: Any = None
    help: str = ""


def _common_keys() -> list[Key]:
    return [
        Key("model", str, "kinetic", f"one of {', '.join(MODELS)}"),
        Key("gamma", float, 1.0, "decay rate of both qubits"),
        Key("rabi", float, 25.0, "Rabi frequency of both drives (rotating-frame model)"),
        Key("nbar", float, 0.0, "thermal occupation of both reservoirs (thermal-undriven model)"),
        Key("t_max", float, 10.0, "horizon"),
        Key("dt", float, 1e-3, "time step; replaced by the automatic step only if unstable"),
        Key("epsilon", float, 1e-6, "death threshold on the concurrence"),
        Key("output", str, "-", "output path, '-' for stdout"),
    ]


EVOLVE_KEYS = [
    Key("family", str, None, "werner, ye, egge or eegg"),
    Key("param", float, None, "family parameter (alias: f, alpha, p, s)"),
    *[Key(name, float, None, f"{kind} parameter") for name, kind in PARAM_ALIASES.items()],
    Key("omega_c", float, 0.0, "dipole coupling omega_xx + omega_yy"),
    *[Key(name, float, None, "per-qubit / per-axis override") for name in (
        "gamma1", "gamma2", "rabi1", "rabi2", "detuning1", "detuning2", "omega_xx", "omega_yy", "nbar1", "nbar2")],
    *_common_keys(),
    Key("format", str, "csv", "csv or json"),
]

SCAN_KEYS = [
    Key("family", str, None, "werner, ye, egge or eegg"),
    Key("param_min", float, None, "lower end of the family parameter axis (default: family bound)"),
    Key("param_max", float, None, "upper end of the family parameter axis (default: family bound)"),
    Key("param_steps", int, 101, "family parameter samples"),
    Key("omega_c_min", float, 0.0, "lower end of the coupling axis"),
    Key("omega_c_max", float, 20.0, "upper end of the coupling axis"),
    Key("omega_c_steps", int, 101, "coupling samples"),
    *_common_keys(),
]

VALIDATE_KEYS = [
    Key("seed", int, 0, "random seed of the oracle draws"),
    Key("draws", int, 20, "random parameter draws per family"),
    Key("samples", int, 200, "random X states for the concurrence oracle"),
    Key("dt_scale", float, 1.0, "factor applied to the automatic RK4 step of the closed-form check"),
]


def _coerce(key: Key, value: Any) -> Any:
    if value is None:
        return None
    if key.kind is str:
        if not isinstance(value, str):
            raise ConfigError(key.name, f"expected a string, got {value!r}")
        return value
    if isinstance(value, bool):
        raise ConfigError(key.name, f"expected a number, got {value!r}")
    if key.kind is int:
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ConfigError(key.name, f"expected an integer, got {value!r}") from None
        if not as_float.is_integer():
            raise ConfigError(key.name, f"expected an integer, got {value!r}")
        return int(as_float)
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key.name, f"expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(key.name, f"must be finite, got {value!r}")
    return out


def load_document(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config", "the document must be a JSON object")
    return doc


def resolve(keys: list[Key], document: dict, overrides: dict) -> dict:
    """Merge document and flag values over the defaults, checking names and types."""
    table = {k.name: k for k in keys}
    for name in document:
        if name not in table:
            raise ConfigError(name, "unknown key")
    out = {k.name: k.default for k in keys}
    for name, value in document.items():
        out[name] = _coerce(table[name], value)
    for name, value in overrides.items():
        if value is not None:
            out[name] = _coerce(table[name], value)
    return out


def _require(cfg: dict, name: str):
    if cfg.get(name) is None:
        raise ConfigError(name, "required")
    return cfg[name]


def _check_common(cfg: dict) -> None:
    try:
        cfg["model"] = canonical_model(cfg["model"])
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    for name in ("t_max", "dt"):
        if not cfg[name] > 0:
            raise ConfigError(name, f"must be > 0, got {cfg[name]!r}")
    for name in ("gamma", "rabi", "nbar", "epsilon"):
        if cfg[name] < 0:
            raise ConfigError(name, f"must be >= 0, got {cfg[name]!r}")
    if cfg["nbar"] > 0 and cfg["model"] != "thermal-undriven":
        raise ConfigError("nbar", "a thermal occupation needs model=thermal-undriven")


def _check_family(cfg: dict) -> type:
    family = _require(cfg, "family").lower()
    if family not in FAMILIES:
        raise ConfigError("family", f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    cfg["family"] = family
    return FAMILIES[family]


def evolve_config(document: dict, overrides: dict) -> dict:
    cfg = resolve(EVOLVE_KEYS, document, overrides)
    cls = _check_family(cfg)
    for alias, kind in PARAM_ALIASES.items():
        if cfg.get(alias) is not None:
            if kind != cfg["family"]:
                raise ConfigError(alias, f"parameter of family {kind!r}, not {cfg['family']!r}")
            if cfg["param"] is not None and cfg["param"] != cfg[alias]:
                raise ConfigError(alias, "conflicts with 'param'")
            cfg["param"] = cfg[alias]
    value = _require(cfg, "param")
    lo, hi = cls.bounds
    if not lo <= value <= hi:
        raise ConfigError(cls.param_name if cfg.get(cls.param_name) is not None else "param",
                          f"must lie in [{lo}, {hi}] for {cfg['family']}, got {value!r}")
    _check_common(cfg)
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format", f"expected 'csv' or 'json', got {cfg['format']!r}")
    cfg["params"] = system_params(cfg)
    return cfg


def system_params(cfg: dict) -> SystemParams:
    """Symmetric parameters from the shorthand keys, then per-qubit overrides."""
    params = SystemParams.symmetric(gamma=cfg["gamma"], rabi=cfg["rabi"], omega_c=cfg["omega_c"], nbar=cfg["nbar"])
    explicit = {name: cfg[name] for name in ("gamma1", "gamma2", "rabi1", "rabi2", "detuning1", "detuning2",
                                             "omega_xx", "omega_yy", "nbar1", "nbar2") if cfg.get(name) is not None}
    if ("omega_xx" in explicit or "omega_yy" in explicit) and "omega_xx" not in explicit:
        explicit["omega_xx"] = 0.0
    for name, value in explicit.items():
        if name.startswith(("gamma", "nbar")) and value < 0:
            raise ConfigError(name, f"must be >= 0, got {value!r}")
    model = cfg["model"]
    if model in ("kinetic", "closed-form", "secular"):
        for name in ("gamma2", "detuning1", "detuning2", "rabi1", "rabi2", "nbar1", "nbar2"):
            if name in explicit and explicit[name] != getattr(params, name):
                raise ConfigError(name, f"model={model} needs identical, resonant qubits at zero temperature")
    if model != "thermal-undriven":
        for name in ("nbar1", "nbar2"):
            if explicit.get(name, 0.0) > 0:
                raise ConfigError(name, "a thermal occupation needs model=thermal-undriven")
    return params.replace(**explicit)


def scan_config(document: dict, overrides: dict) -> ScanConfig:
    cfg = resolve(SCAN_KEYS, document, overrides)
    cls = _check_family(cfg)
    _check_common(cfg)
    lo, hi = cls.bounds
    cfg["param_min"] = lo if cfg["param_min"] is None else cfg["param_min"]
    cfg["param_max"] = hi if cfg["param_max"] is None else cfg["param_max"]
    for name in ("param_min", "param_max"):
        if not lo <= cfg[name] <= hi:
            raise ConfigError(name, f"must lie in [{lo}, {hi}] for {cfg['family']}, got {cfg[name]!r}")
    if cfg["param_min"] > cfg["param_max"]:
        raise ConfigError("param_max", "must not be below param_min")
    if cfg["omega_c_min"] > cfg["omega_c_max"]:
        raise ConfigError("omega_c_max", "must not be below omega_c_min")
    for name in ("param_steps", "omega_c_steps"):
        if cfg[name] < 2:
            raise ConfigError(name, f"must be >= 2, got {cfg[name]!r}")
    fields = {k: cfg[k] for k in ScanConfig.__dataclass_fields__}
    return ScanConfig(**fields), cfg["output"]


# --- serialization -----------------------------------------------------------


def format_float(x) -> str:
    """Shortest decimal that round-trips, ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_float(v) if isinstance(v, float) else v for v in row])


def _open_output(path: str):
    if path == "-":
        return _StdoutBuffer()
    return open(path, "w", encoding="utf-8", newline="")


class _StdoutBuffer(io.StringIO):
    def close(self):
        sys.stdout.write(self.getvalue())
        sys.stdout.flush()
        super().close()


# --- evolve ------------------------------------------------------------------


def evolve_columns(cfg: dict) -> dict[str, np.ndarray]:
    """Trace columns of a single run, keyed by ``TRACE_COLUMNS``."""
    spec = family_from_name(cfg["family"], cfg["param"])
    params: SystemParams = cfg["params"]
    model = cfg["model"]
    gamma, omega_c, t_max, dt = params.gamma1, params.omega_c, cfg["t_max"], cfg["dt"]
    if model == "kinetic":
        norm = float(np.linalg.norm(kinetic_matrix(gamma, omega_c), 2))
        step = effective_dt(norm, params, dt)
        traj = evolve_kinetic(spec, gamma, omega_c, t_max, step)
        times, x = traj.times, traj.states
        conc = concurrence_x(x)
    elif model == "closed-form":
        n = int(math.floor(t_max / dt + 1e-9))
        times = dt * np.arange(n + 1)
        x = closed_form(spec, gamma, omega_c, times)
        conc = concurrence_x(x)
    else:
        try:
            generator = {"secular": secular_generator, "rotating-frame": rotating_frame_generator,
                         "thermal-undriven": thermal_generator}[model](params)
        except SecularPreconditionViolated as exc:
            raise ConfigError("model", str(exc)) from None
        step = effective_dt(generator.norm(), params, dt)
        traj = integrate(generator, make_initial(spec).to_matrix(), t_max, step)
        times = traj.times
        x = XState.from_matrix(traj.states)
        conc = concurrence(traj.states)
    w, z = np.asarray(x.w), np.asarray(x.z)
    values = (times, x.a, x.b, x.c, x.d, w.real, w.imag, z.real, z.imag, f_function(x), g_function(x), conc)
    return {name: np.asarray(v, dtype=float) for name, v in zip(TRACE_COLUMNS, values)}


def cmd_evolve(cfg: dict) -> int:
    cols = evolve_columns(cfg)
    with _open_output(cfg["output"]) as out:
        if cfg["format"] == "json":
            doc = {"family": cfg["family"], "param": cfg["param"], "model": cfg["model"],
                   "columns": {k: v.tolist() for k, v in cols.items()}}
            json.dump(doc, out, allow_nan=False)
            out.write("\n")
        else:
            write_csv(out, TRACE_COLUMNS, zip(*(v.tolist() for v in cols.values())))
    return EXIT_OK


# --- scan --------------------------------------------------------------------


def scan_rows(result):
    for param, omega_c, cell in result.rows():
        yield param, omega_c, cell.t_esd, cell.revivals, cell.status.value


def cmd_scan(config: ScanConfig, output: str) -> int:
    result = run_scan(config)
    with _open_output(output) as out:
        write_csv(out, SCAN_COLUMNS, scan_rows(result))
    failures = [f"param={p!r} omega_c={w!r}: {c.message}" for p, w, c in result.rows()
                if c.status is Status.NUMERIC_FAILURE]
    for line in failures:
        print(f"numeric failure: {line}", file=sys.stderr)
    return EXIT_NUMERIC if failures else EXIT_OK


def read_scan_csv(text: str) -> list[tuple]:
    """Parse a scan file back into ``(param, omega_c, t_esd, revivals, status)`` tuples."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != SCAN_COLUMNS:
        raise ValueError(f"unexpected header {header!r}")
    return [(float(p), float(w), float(t), int(r), s) for p, w, t, r, s in reader]


# --- validate ----------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


def _state_deviation(x: XState, y: XState) -> float:
    return float(np.max(np.abs(x.to_real() - y.to_real())))


def run_validation(*, seed: int = 0, draws: int = 20, samples: int = 200, dt_scale: float = 1.0,
                   rhs: Callable = kinetic_rhs) -> list[Check]:
    """Oracle cross-checks; ``rhs`` replaces the kinetic equations under test.

    ``dt_scale`` multiplies the automatic step ``min(1e-3, 0.01/omega_c)``
    of the RK4 integrations, so halving it shows the fourth-order shrinkage.
    """
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for kind, cls in FAMILIES.items():
        lo, hi = cls.bounds
        for _ in range(draws):
            spec = cls(float(rng.uniform(lo, hi)))
            omega_c = float(rng.uniform(0.0, 20.0))
            dt = dt_scale * min(1e-3, 0.01 / omega_c if omega_c else 1.0)
            traj = evolve_kinetic(spec, 1.0, omega_c, 10.0, dt, rhs=rhs, check=False)
            exact = closed_form(spec, 1.0, omega_c, traj.times)
            worst = max(worst, _state_deviation(traj.states, exact))
    checks.append(Check("closed form vs RK4 kinetic", worst, 1e-6))

    worst = 0.0
    for _ in range(samples):
        x = random_xstate(rng)
        gamma = float(rng.uniform(0.1, 2.0))
        omega_c = float(rng.uniform(0.0, 20.0))
        full = rhs_secular(SystemParams.symmetric(gamma=gamma, omega_c=omega_c), x.to_matrix())
        off_x = np.abs(full * (1 - _X_MASK)).max()
        worst = max(worst, _state_deviation(rhs(x, gamma, omega_c), XState.from_matrix(full)), off_x)
    checks.append(Check("kinetic rhs vs secular master equation", worst, 1e-12))

    x = random_xstate(rng, samples)
    wootters = concurrence_general(x.to_matrix())
    checks.append(Check("concurrence_x vs Wootters", float(np.max(np.abs(concurrence_x(x) - wootters))), 1e-8))
    return checks


_X_MASK = np.eye(4) + np.fliplr(np.eye(4))


def cmd_validate(cfg: dict, rhs: Callable = kinetic_rhs) -> int:
    for name in ("draws", "samples"):
        if cfg[name] < 1:
            raise ConfigError(name, f"must be >= 1, got {cfg[name]!r}")
    if not 0 < cfg["dt_scale"] <= 1:
        raise ConfigError("dt_scale", f"must lie in (0, 1], got {cfg['dt_scale']!r}")
    checks = run_validation(seed=cfg["seed"], draws=cfg["draws"], samples=cfg["samples"],
                            dt_scale=cfg["dt_scale"], rhs=rhs)
    width = max(len(c.name) for c in checks)
    for c in checks:
        verdict = "PASS" if c.passed else "FAIL"
        print(f"{verdict}  {c.name:<{width}}  max deviation {c.deviation:.3e}  (tolerance {c.tolerance:.0e})")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


# --- families ----------------------------------------------------------------


def cmd_families() -> int:
    for kind, cls in FAMILIES.items():
        lo, hi = cls.bounds
        print(f"{kind:<6} {cls.param_name}={lo:g}..{hi:g}  {cls.description}")
    return EXIT_OK


# --- entry point -------------------------------------------------------------


def _add_keys(parser: argparse.ArgumentParser, keys: list[Key]) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat JSON document of keys below")
    for key in keys:
        default = "" if key.default is None else f" [default: {key.default}]"
        parser.add_argument(f"--{key.name}", dest=key.name, metavar=key.kind.__name__.upper(),
                            help=f"{key.help}{default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esdlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_keys(sub.add_parser("evolve", help="concurrence trace of one initial state"), EVOLVE_KEYS)
    _add_keys(sub.add_parser("scan", help="sudden-death time over a (parameter, omega_c) grid"), SCAN_KEYS)
    _add_keys(sub.add_parser("validate", help="closed-form and Wootters oracle checks"), VALIDATE_KEYS)
    sub.add_parser("families", help="list initial-state families and parameter ranges")
    return parser


def main(argv: list[str] | None = None, *, kinetic: Callable = kinetic_rhs) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "families":
        return cmd_families()
    keys = {"evolve": EVOLVE_KEYS, "scan": SCAN_KEYS, "validate": VALIDATE_KEYS}[args.command]
    overrides = {k.name: getattr(args, k.name) for k in keys}
    try:
        document = load_document(args.config)
        if args.command == "evolve":
            return cmd_evolve(evolve_config(document, overrides))
        if args.command == "scan":
            return cmd_scan(*scan_config(document, overrides))
        return cmd_validate(resolve(VALIDATE_KEYS, document, overrides), rhs=kinetic)
    except ConfigError as exc:
        print(f"config error: {exc.key}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        where = f" at t={exc.time!r}" if getattr(exc, "time", None) is not None else ""
        print(f"numeric failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def run() -> None:
    """Console entry point; a reader closing the pipe early is not an error."""
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    run()
