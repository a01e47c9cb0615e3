"""Command-line front end.

Subcommands:

  spectrum    strong-coupling eigenvalues, numeric vs predicted
  darkstates  dark-state residuals, subspace angles, bright-form overlaps
  protocol    run one protocol and emit a JSON result
  sweep       scan one or two parameter axes into a CSV table
  compare     full vs effective fidelity over a grid of pulse durations

Parameters resolve in three layers: built-in defaults, then an optional INI
config file (``--config``, section ``[params]`` plus one section per protocol
name), then explicit flags.  Tables are CSV with 12-significant-digit floats,
single results are JSON, and every file write is atomic (temp file in the
destination directory, then rename).  Sweep rows are evaluated in row-major
axis order and formatted in the parent process, so output bytes do not depend
on ``--workers``.

Exit codes: 0 success, 2 usage or configuration error, 1 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .dynamics import (
    HALF_PI,
    compare_full_vs_effective,
    solve_timing,
    zeno_ratio,
)
from .model import (
    Branch,
    ClosureOverflowError,
    UniformParams,
    build_branch_model,
)
from .protocols import Engine, Protocol, default_params, default_spec, run
from .zeno import (
    ClusterAmbiguityError,
    DegenerateStructureError,
    analytic_dark_bright,
    bright_comparison,
    decompose,
    predicted_strong_spectrum,
    principal_angles,
)


class CliError(ValueError):
    """Bad flags or config content; maps to exit code 2."""


_PARAM_KEYS = ("g", "lam", "omega1", "omega2", "omega3")
_SPEC_KEYS = ("branch", "k", "engine", "interpretation", "outcome", "convention")
_AXIS_NAMES = _PARAM_KEYS + ("g_over_lam", "omega1_over_g")

_NUMERIC_ERRORS = (
    ClusterAmbiguityError,
    DegenerateStructureError,
    ClosureOverflowError,
    np.linalg.LinAlgError,
    FloatingPointError,
)


# ---------------------------------------------------------------------------
# rendering and atomic output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    return "%.12g" % float(value)


def _atomic_write(path: str, text: str) -> None:
    # temp file in the same directory so os.replace stays a rename
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".zenocavity-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(out_path, text: str) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out_path, text)


# ---------------------------------------------------------------------------
# config file and parameter resolution
# ---------------------------------------------------------------------------

def _load_config(path):
    if path is None:
        return None
    parser = configparser.ConfigParser()
    try:
        loaded = parser.read(path)
    except configparser.Error as exc:
        raise CliError(f"could not parse config {path}: {exc}") from exc
    if not loaded:
        raise CliError(f"config file not found: {path}")
    return parser


def _section_items(config, section: str, allowed) -> dict:
    items = dict(config.items(section))
    unknown = sorted(set(items) - set(allowed))
    if unknown:
        raise CliError(
            f"unknown key(s) {', '.join(unknown)} in config section [{section}]"
        )
    return items


def _as_float(name: str, raw) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise CliError(f"{name} must be a number, got {raw!r}") from None


def _as_int(name: str, raw) -> int:
    try:
        return int(str(raw), 10)
    except ValueError:
        raise CliError(f"{name} must be an integer, got {raw!r}") from None


def _resolve_params(args, config, base: UniformParams, section=None) -> UniformParams:
    values = {key: getattr(base, key) for key in _PARAM_KEYS}
    if config is not None:
        sections = ["params"] + ([section] if section else [])
        allowed = {"params": _PARAM_KEYS}
        if section:
            allowed[section] = _PARAM_KEYS + _SPEC_KEYS
        for name in sections:
            if not config.has_section(name):
                continue
            items = _section_items(config, name, allowed[name])
            for key in _PARAM_KEYS:
                if key in items:
                    values[key] = _as_float(key, items[key])
    for key in _PARAM_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    try:
        return UniformParams(**values)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _resolve_spec(args, config):
    try:
        protocol = Protocol(args.name)
    except ValueError:
        names = ", ".join(p.value for p in Protocol)
        raise CliError(f"unknown protocol {args.name!r}; pick one of {names}") from None

    overrides = {}
    if config is not None and config.has_section(protocol.value):
        items = _section_items(config, protocol.value, _PARAM_KEYS + _SPEC_KEYS)
        for key in ("branch", "engine", "interpretation", "convention"):
            if key in items:
                overrides[key] = items[key]
        for key in ("k", "outcome"):
            if key in items:
                overrides[key] = _as_int(key, items[key])
    for key in _SPEC_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            overrides[key] = flag

    params = _resolve_params(args, config, default_params(protocol), protocol.value)
    try:
        return default_spec(protocol, params=params, **overrides)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _parse_grid(raw: str) -> np.ndarray:
    parts = raw.split(":")
    if len(parts) != 3:
        raise CliError(f"grid must look like start:stop:count, got {raw!r}")
    start = _as_float("grid start", parts[0])
    stop = _as_float("grid stop", parts[1])
    count = _as_int("grid count", parts[2])
    if count < 2:
        raise CliError(f"grid count must be at least 2, got {count}")
    return np.linspace(start, stop, count)


def _parse_axis(raw: str):
    parts = raw.split(":")
    if len(parts) != 5:
        raise CliError(f"axis must look like name:scale:start:stop:count, got {raw!r}")
    name, scale = parts[0], parts[1]
    if name not in _AXIS_NAMES:
        raise CliError(f"unknown axis {name!r}; pick one of {', '.join(_AXIS_NAMES)}")
    if scale not in ("lin", "log"):
        raise CliError(f"axis scale must be lin or log, got {scale!r}")
    start = _as_float("axis start", parts[2])
    stop = _as_float("axis stop", parts[3])
    count = _as_int("axis count", parts[4])
    if count < 2:
        raise CliError(f"axis count must be at least 2, got {count}")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise CliError("log axis endpoints must be positive")
        grid = np.geomspace(start, stop, count)
    else:
        grid = np.linspace(start, stop, count)
    return name, [float(v) for v in grid]


def _apply_axis(params: UniformParams, name: str, value: float) -> UniformParams:
    if name == "g_over_lam":
        return replace(params, g=value * params.lam)
    if name == "omega1_over_g":
        return replace(params, omega1=value * params.g)
    return replace(params, **{name: value})


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> int:
    config = _load_config(args.config)
    params = _resolve_params(args, config, UniformParams(g=1.0, lam=1.0))
    branch = Branch(args.branch)
    model = build_branch_model(params, branch)
    numeric = np.linalg.eigvalsh(model.strong)
    predicted = predicted_strong_spectrum(params, branch)
    rows = [
        (str(i), _fmt(n), _fmt(p), _fmt(abs(n - p)))
        for i, (n, p) in enumerate(zip(numeric, predicted))
    ]
    _emit(args.out, _csv_text(("index", "numeric", "predicted", "residual"), rows))
    return 0


def _cmd_darkstates(args) -> int:
    config = _load_config(args.config)
    params = _resolve_params(args, config, UniformParams(g=1.0, lam=1.0))
    branch = Branch(args.branch)
    model = build_branch_model(params, branch)
    basis = analytic_dark_bright(model)

    rows = []
    for j in range(basis.dark.shape[1]):
        residual = float(np.linalg.norm(model.strong @ basis.dark[:, j]))
        rows.append(("dark_residual", f"D{j}", _fmt(residual)))

    zero_projector = decompose(model.strong).projector_near(0.0)
    angles = principal_angles(basis.dark, zero_projector)
    for j, angle in enumerate(angles):
        rows.append(("principal_angle", f"angle{j}", _fmt(angle)))

    sectors = (Branch.LEFT, Branch.RIGHT) if branch == Branch.COMBINED else (branch,)
    for sector in sectors:
        for energy, overlap in bright_comparison(model, sector):
            label = f"{sector.value}:E={_fmt(energy)}"
            rows.append(("bright_overlap", label, _fmt(overlap)))

    _emit(args.out, _csv_text(("quantity", "label", "value"), rows))
    return 0


def _cmd_protocol(args) -> int:
    config = _load_config(args.config)
    spec = _resolve_spec(args, config)
    result = run(spec)
    text = json.dumps(result.to_dict(), indent=2) + "\n"
    _emit(args.out, text)
    return 0


def _sweep_eval(task):
    spec, names, values = task
    params = spec.params
    for name, value in zip(names, values):
        params = _apply_axis(params, name, value)
    point = replace(spec, params=params)
    model = build_branch_model(point.params, point.branch)
    primary = run(point, model)
    other = Engine.EFFECTIVE if point.engine == Engine.FULL else Engine.FULL
    secondary = run(replace(point, engine=other), model)
    gap = abs(primary.fidelity - secondary.fidelity)
    return (
        values,
        primary.fidelity,
        primary.negativity,
        primary.success_probability,
        primary.tau,
        gap,
    )


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    spec = _resolve_spec(args, config)
    if not args.axis:
        raise CliError("sweep needs at least one --axis")
    if len(args.axis) > 2:
        raise CliError(f"sweep supports at most two axes, got {len(args.axis)}")
    if args.workers < 1:
        raise CliError(f"--workers must be at least 1, got {args.workers}")

    axes = [_parse_axis(raw) for raw in args.axis]
    names = [name for name, _ in axes]
    if len(set(names)) != len(names):
        raise CliError("sweep axes must be distinct")
    grids = [grid for _, grid in axes]

    tasks = [(spec, names, list(point)) for point in itertools.product(*grids)]
    if args.workers == 1:
        results = [_sweep_eval(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_eval, tasks))

    header = tuple(names) + (
        "fidelity", "negativity", "success_probability", "tau", "engine_gap",
    )
    rows = []
    for values, fid, neg, prob, tau, gap in results:
        rows.append(
            tuple(_fmt(v) for v in values)
            + (_fmt(fid), _fmt(neg), _fmt(prob), _fmt(tau), _fmt(gap))
        )
    _emit(args.out, _csv_text(header, rows))
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args.config)
    params = _resolve_params(args, config, UniformParams(g=1.0, lam=1.0, omega1=0.01))
    branch = Branch(args.branch)
    model = build_branch_model(params, branch)
    if args.taus is not None:
        taus = _parse_grid(args.taus)
    else:
        try:
            taus = np.linspace(0.0, solve_timing(params, branch, HALF_PI), 21)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    rows = [(_fmt(row.tau), _fmt(row.fidelity))
            for row in compare_full_vs_effective(model, taus)]
    _emit(args.out, _csv_text(("tau", "fidelity"), rows))
    if args.out is not None:
        sys.stdout.write(f"zeno_ratio={_fmt(zeno_ratio(params))}\n")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="FILE", help="INI config file")
    for key in _PARAM_KEYS:
        shared.add_argument(f"--{key}", type=float, metavar="X")
    shared.add_argument("--out", metavar="FILE", help="write here instead of stdout")

    branchy = argparse.ArgumentParser(add_help=False)
    branchy.add_argument(
        "--branch", default="left", choices=[b.value for b in Branch],
    )

    specflags = argparse.ArgumentParser(add_help=False)
    specflags.add_argument("--name", required=True, metavar="PROTOCOL")
    specflags.add_argument("--branch", choices=[b.value for b in Branch])
    specflags.add_argument("--k", type=int, metavar="N")
    specflags.add_argument("--engine", choices=[e.value for e in Engine])
    specflags.add_argument("--interpretation", choices=["postselect", "trace"])
    specflags.add_argument("--outcome", type=int, choices=[0, 1])
    specflags.add_argument("--convention", choices=["unitary", "beamsplitter"])

    parser = argparse.ArgumentParser(
        prog="zenocavity",
        description=__doc__.splitlines()[0],
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[shared, branchy],
                       help="numeric vs predicted strong-coupling eigenvalues")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("darkstates", parents=[shared, branchy],
                       help="dark-state residuals and bright-form overlaps")
    p.set_defaults(func=_cmd_darkstates)

    p = sub.add_parser("protocol", parents=[shared, specflags],
                       help="run one protocol, emit JSON")
    p.set_defaults(func=_cmd_protocol)

    p = sub.add_parser("sweep", parents=[shared, specflags],
                       help="scan parameter axes into a CSV table")
    p.add_argument("--axis", action="append", metavar="NAME:SCALE:START:STOP:COUNT",
                   help="up to two of: " + ", ".join(_AXIS_NAMES))
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", parents=[shared, branchy],
                       help="full vs effective fidelity over pulse durations")
    p.add_argument("--taus", metavar="START:STOP:COUNT")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
