"""Command-line front end.

Subcommands: ``solve``, ``compare``, ``transform``, ``sweep`` and ``series``.
Configuration is read from an INI-style file (``--config``) with sections
``[flow]``, ``[run]``, ``[transform]`` and ``[sweep]``; every key can be
overridden by a flag of the same name.

Exit codes: 0 ok, 2 invalid configuration, 3 saturation, 4 malformed input
file, 5 invalid density.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import itertools
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .core import DomainError, DomainSpec, FlowParams, ParameterError, nonlinear_factor
from .dorodnitzyn import (
    EXPONENT_CHOICES,
    DensityError,
    DensityField,
    MalformedDensityFile,
    build_mesh,
    check_diffeomorphism,
)
from .exact_solver import BeyondSaturation, StepSizeUnderflow, exact_profile
from .report import compare, quartic_summary
from .series import binomial_coeffs, explog_coeffs, paper_literal_coeffs

log = logging.getLogger("compressible_bl")

EXIT_OK, EXIT_CONFIG, EXIT_SATURATION, EXIT_MALFORMED, EXIT_DENSITY = 0, 2, 3, 4, 5

FLOW_KEYS = ("U", "i0", "c", "delta", "b", "p0", "T0")
RUN_INT_KEYS = ("grid", "series_order", "workers")
SWEEP_KEYS = FLOW_KEYS + ("grid", "series_order")
TRANSFORM_FLOAT_KEYS = ("L", "h")
TRANSFORM_INT_KEYS = ("nx", "ny")
MAX_SWEEP = 10**6
PRESETS = {
    "unit": lambda x, y: np.ones_like(np.asarray(y, dtype=float)),
    "linear": lambda x, y: 1.0 + np.asarray(y, dtype=float),
}
PARAM_COLUMNS = FLOW_KEYS + ("grid", "series_order")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    U: float = 0.1
    i0: float = 0.5
    c: float = 1.0
    delta: float = 0.5
    b: float = 1.405
    p0: float = 1.0
    T0: float = 1.0
    grid: int = 201
    series_order: int = 2
    format: str = "csv"
    output: str | None = None
    workers: int = 1
    c1_exponent: str = "grouped"
    L: float | None = None
    h: float | None = None
    nx: int | None = None
    ny: int = 11
    density: str | None = None
    density_preset: str | None = None
    sweep: dict = field(default_factory=dict)

    def validate(self) -> RunConfig:
        if self.grid < 5:
            raise ConfigError(f"grid={self.grid} must be at least 5")
        if not 0 <= self.series_order <= 16:
            raise ConfigError(f"series_order={self.series_order} must lie in [0, 16]")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.c1_exponent not in EXPONENT_CHOICES:
            raise ConfigError(f"c1_exponent must be one of {EXPONENT_CHOICES}")
        if self.density_preset is not None and self.density_preset not in PRESETS:
            raise ConfigError(f"density_preset must be one of {sorted(PRESETS)}")
        for key, values in self.sweep.items():
            if key not in SWEEP_KEYS:
                raise ConfigError(f"cannot sweep over {key!r}")
            if not values:
                raise ConfigError(f"sweep list for {key!r} is empty")
        size = 1
        for values in self.sweep.values():
            size *= len(values)
        if size > MAX_SWEEP:
            raise ConfigError(f"sweep has {size} tuples, limit is {MAX_SWEEP}")
        return self

    def flow_params(self) -> FlowParams:
        return FlowParams(**{k: getattr(self, k) for k in FLOW_KEYS})

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sweep"] = {k: list(v) for k, v in self.sweep.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        d = dict(d)
        d["sweep"] = {k: tuple(v) for k, v in d.get("sweep", {}).items()}
        return cls(**d)


def _convert(key: str, text: str):
    text = text.strip()
    if key in FLOW_KEYS or key in TRANSFORM_FLOAT_KEYS:
        return float(text)
    if key in RUN_INT_KEYS or key in TRANSFORM_INT_KEYS:
        return int(text)
    return text


SECTIONS = {
    "flow": set(FLOW_KEYS),
    "run": {"grid", "series_order", "format", "output", "workers"},
    "transform": {"c1_exponent", "L", "h", "nx", "ny", "density", "density_preset"},
}


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` text with section headers on top of ``base``."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    cfg = dataclasses.replace(base or RunConfig())
    cfg.sweep = dict(cfg.sweep)
    for section in parser.sections():
        items = parser.items(section)
        if section == "sweep":
            for key, value in items:
                if key not in SWEEP_KEYS:
                    raise ConfigError(f"cannot sweep over {key!r}")
                try:
                    cfg.sweep[key] = tuple(_convert(key, v) for v in value.split(",") if v.strip())
                except ValueError:
                    raise ConfigError(f"bad sweep value for {key!r}: {value!r}") from None
            continue
        allowed = SECTIONS.get(section)
        if allowed is None:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in items:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                setattr(cfg, key, _convert(key, value))
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    return cfg


def fmt(value) -> str:
    """Shortest round-trip text for numbers; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def emit(text: str, path: str | None) -> None:
    """Write ``text`` to ``path`` atomically, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metadata() -> dict:
    return {"package": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def cmd_solve(cfg: RunConfig) -> int:
    p = cfg.flow_params()
    z = np.linspace(0.0, 1.0, cfg.grid)
    prof = exact_profile(z, p)
    # du/ds from the first-order equation itself
    du_ds = p.c * nonlinear_factor(prof.u, p)
    if cfg.format == "json":
        text = json_text(
            {
                "config": cfg.to_dict(),
                "metadata": _metadata(),
                "columns": ["s", "z", "u", "du_ds"],
                "rows": [[float(a), float(b), float(c), float(d)]
                         for a, b, c, d in zip(prof.s, prof.z, prof.u, du_ds)],
            }
        )
    else:
        text = csv_text(["s", "z", "u", "du_ds"], zip(prof.s, prof.z, prof.u, du_ds))
    emit(text, cfg.output)
    return EXIT_OK


def _param_values(cfg: RunConfig) -> list:
    return [getattr(cfg, k) for k in PARAM_COLUMNS]


PROFILE_SHORT = {
    "exact": "exact",
    "quartic": "quartic",
    "theorem1-literal": "thm1_literal",
    "theorem1-recomputed": "thm1_recomputed",
    "series-truncated": "series",
}
WIDE_METRICS = ("rank", "sup_err", "rms_err", "residual_sup", "wall_slope")
REPORT_HEADER = (
    list(PARAM_COLUMNS)
    + [f"{m}_{short}" for short in PROFILE_SHORT.values() for m in WIDE_METRICS]
    + ["low_confidence", "note", "error"]
)


def report_row(cfg: RunConfig, result=None, error: Exception | None = None) -> list:
    """One report row per parameter tuple: every kind's metrics side by side."""
    row = _param_values(cfg)
    if result is None:
        blanks = len(REPORT_HEADER) - len(row) - 1
        return row + [None] * blanks + [f"{type(error).__name__}: {error}"]
    notes = []
    for kind in PROFILE_SHORT:
        m = result.metric(kind)
        row += [getattr(m, name) for name in WIDE_METRICS]
        if m.note:
            notes.append(f"{PROFILE_SHORT[kind]}: {m.note}")
    low = any(m.low_confidence for m in result.metrics)
    return row + [low, "; ".join(notes), None]


def compare_row(cfg: RunConfig) -> list:
    """Report row for one tuple; a failure becomes a row with only the error filled."""
    try:
        result = compare(cfg.flow_params(), cfg.grid, cfg.series_order)
    except (ParameterError, BeyondSaturation, StepSizeUnderflow, ValueError) as exc:
        return report_row(cfg, error=exc)
    return report_row(cfg, result)


def profile_csv(result) -> str:
    exact = result.profiles["exact"]
    header = ["z", "s"] + [f"u_{PROFILE_SHORT[k]}" for k in PROFILE_SHORT]
    approx = [k for k in PROFILE_SHORT if k != "exact"]
    header += [f"abs_err_{PROFILE_SHORT[k]}" for k in approx]
    cols = [exact.z, exact.s] + [result.profiles[k].u for k in PROFILE_SHORT]
    cols += [np.abs(result.profiles[k].u - exact.u) for k in approx]
    return csv_text(header, zip(*cols))


def cmd_compare(cfg: RunConfig, profiles_path: str | None = None) -> int:
    p = cfg.flow_params()
    result = compare(p, cfg.grid, cfg.series_order)
    if cfg.format == "json":
        text = json_text(
            {
                "config": cfg.to_dict(),
                "metadata": _metadata(),
                "quartic": quartic_summary(p),
                "ranking": result.ranking,
                "metrics": [m.as_row() for m in result.metrics],
            }
        )
    else:
        text = csv_text(REPORT_HEADER, [report_row(cfg, result)])
    emit(text, cfg.output)
    if profiles_path:
        emit(profile_csv(result), profiles_path)
    return EXIT_OK


def sweep_configs(cfg: RunConfig) -> list[RunConfig]:
    """Cross product of the sweep lists, lexicographic in key and list order."""
    keys = [k for k in SWEEP_KEYS if k in cfg.sweep]
    out = []
    for combo in itertools.product(*(cfg.sweep[k] for k in keys)):
        sub = dataclasses.replace(cfg, sweep={})
        for k, v in zip(keys, combo):
            setattr(sub, k, int(v) if k in RUN_INT_KEYS else float(v))
        out.append(sub)
    return out


def _sweep_task(cfg_dict: dict) -> list:
    return compare_row(RunConfig.from_dict(cfg_dict))


def cmd_sweep(cfg: RunConfig) -> int:
    tuples = sweep_configs(cfg)
    payload = [t.to_dict() for t in tuples]
    if cfg.workers > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_task, payload))
    else:
        rows = [_sweep_task(d) for d in payload]
    failed = sum(1 for row in rows if row[-1] is not None)
    if cfg.format == "json":
        text = json_text(
            {
                "config": cfg.to_dict(),
                "metadata": _metadata(),
                "columns": REPORT_HEADER,
                "rows": [[fmt(v) for v in row] for row in rows],
            }
        )
    else:
        text = csv_text(REPORT_HEADER, rows)
    emit(text, cfg.output)
    if failed:
        log.warning("%d of %d sweep tuples failed", failed, len(rows))
    return EXIT_OK if failed < len(rows) else EXIT_CONFIG


def cmd_series(cfg: RunConfig) -> int:
    n = cfg.series_order
    tables = [binomial_coeffs(n), explog_coeffs(n), paper_literal_coeffs()]
    rows = []
    for table in tables:
        for k, ck in enumerate(table.coeffs):
            exact = str(ck) if isinstance(ck, Fraction) else ""
            rows.append([k, float(ck), exact, table.source])
    if cfg.format == "json":
        text = json_text(
            [dict(zip(["order", "coefficient", "exact", "source"], r)) for r in rows]
        )
    else:
        text = csv_text(["order", "coefficient", "exact", "source"], rows)
    emit(text, cfg.output)
    return EXIT_OK


def _density_and_domain(cfg: RunConfig):
    if cfg.density is not None:
        rho = DensityField.from_csv(cfg.density)
        x_nodes = rho.x_nodes
        L = cfg.L if cfg.L is not None else float(x_nodes[-1])
        h = cfg.h if cfg.h is not None else rho.y_max
        if h > rho.y_max * (1 + 1e-12) or L > float(x_nodes[-1]) * (1 + 1e-12):
            raise ConfigError("domain extends beyond the density table")
        nx_default = x_nodes if cfg.L is None or cfg.L == float(x_nodes[-1]) else None
    elif cfg.density_preset is not None:
        L = cfg.L if cfg.L is not None else 20.0
        h = cfg.h if cfg.h is not None else 1.0
        rho = DensityField.analytic(PRESETS[cfg.density_preset], L, h)
        nx_default = None
    else:
        raise ConfigError("transform needs --density PATH or --density-preset NAME")
    dom = DomainSpec.constant(L, h)
    x_nodes = None
    if cfg.nx is not None:
        x_nodes = np.linspace(0.0, L, cfg.nx)
    elif nx_default is not None:
        x_nodes = nx_default
    return rho, dom, x_nodes


def cmd_transform(cfg: RunConfig, delta_path: str | None = None) -> int:
    p = cfg.flow_params()
    rho, dom, x_nodes = _density_and_domain(cfg)
    mesh = build_mesh(
        rho, dom, p, nx=11, ny=cfg.ny, x_nodes=x_nodes, exponent_choice=cfg.c1_exponent
    )
    check = check_diffeomorphism(mesh)
    delta_rows = list(zip(mesh.x, mesh.delta))
    if cfg.format == "json":
        text = json_text(
            {
                "config": cfg.to_dict(),
                "metadata": _metadata(),
                "check": {
                    "passed": check.passed,
                    "margin": check.margin,
                    "ell_margin": check.ell_margin,
                    "failures": list(check.failures),
                },
                "mesh": {
                    "columns": ["x", "yhat", "ell", "s"],
                    "rows": [[float(v) for v in r] for r in mesh.rows()],
                },
                "delta": [[float(a), float(b)] for a, b in delta_rows],
            }
        )
    else:
        text = f"# {check.summary()}\n" + csv_text(["x", "yhat", "ell", "s"], mesh.rows())
    emit(text, cfg.output)
    if cfg.format == "csv":
        if delta_path is None and cfg.output is not None:
            out = Path(cfg.output)
            delta_path = str(out.with_name(out.stem + "_delta.csv"))
        if delta_path is not None:
            emit(csv_text(["x", "delta"], delta_rows), delta_path)
    if not check.passed:
        log.warning("diffeomorphism check failed: %s", "; ".join(check.failures))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", dest="output", metavar="PATH")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--grid", type=int)
    common.add_argument("--series-order", "--series_order", dest="series_order", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--quiet", action="store_true")
    for key in FLOW_KEYS:
        common.add_argument(f"--{key}", dest=key, type=float)
    common.add_argument("--c1-exponent", "--c1_exponent", dest="c1_exponent")
    common.add_argument("--L", dest="L", type=float)
    common.add_argument("--h", dest="h", type=float)
    common.add_argument("--nx", type=int)
    common.add_argument("--ny", type=int)
    common.add_argument("--density", metavar="PATH")
    common.add_argument("--density-preset", "--density_preset", dest="density_preset")

    parser = argparse.ArgumentParser(
        prog="compressible-bl",
        description="Exact and approximate velocity profiles of a compressible boundary layer.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="exact profile on the grid")
    cmp_ = sub.add_parser("compare", parents=[common], help="rank all profile forms")
    cmp_.add_argument("--profiles", metavar="PATH", help="also write the sampled profiles")
    tr = sub.add_parser("transform", parents=[common], help="Dorodnitzyn mesh from a density")
    tr.add_argument("--delta-out", metavar="PATH")
    sub.add_parser("sweep", parents=[common], help="compare over a parameter cross product")
    sub.add_parser("series", parents=[common], help="coefficient tables of the factor series")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config_text(text, cfg)
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None and f.name != "sweep":
            setattr(cfg, f.name, value)
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    started = time.perf_counter()
    try:
        cfg = load_config(args)
        if args.command != "sweep":
            cfg.flow_params()
        if args.command == "solve":
            code = cmd_solve(cfg)
        elif args.command == "compare":
            code = cmd_compare(cfg, args.profiles)
        elif args.command == "transform":
            code = cmd_transform(cfg, args.delta_out)
        elif args.command == "sweep":
            code = cmd_sweep(cfg)
        else:
            code = cmd_series(cfg)
    except (ConfigError, ParameterError, DomainError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BeyondSaturation, StepSizeUnderflow) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SATURATION
    except MalformedDensityFile as exc:
        print(f"error: malformed density file: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except DensityError as exc:
        print(f"error: invalid density: {exc}", file=sys.stderr)
        return EXIT_DENSITY
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - started)
    return code


if __name__ == "__main__":
    sys.exit(main())
