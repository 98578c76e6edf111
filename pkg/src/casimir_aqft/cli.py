"""Command-line front end: read a JSON config, run one command, write CSV (and SVG).

Exit status is 0 on success, 2 when a computation misses its accuracy target
and 1 when the configuration is invalid.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from ._numerics import AccuracyError, DomainError
from .algebra import PairingKind, ccr_causality_check
from .boundary import (BoundaryState, ImageSeriesConfig, boundary_kernel, image_series,
                       kms_condition_check, positivity_form, _mode_count)
from .fields import Geometry, TestFunction, make_bump
from .kernels import StateSpec
from .observables import density_profile

__all__ = ["COMMANDS", "RunConfig", "ConfigError", "load_config", "run", "main"]

COMMANDS = ("twopoint", "wick-square", "stress", "kms-check", "positivity", "convergence",
            "algebra-check")
PROFILE_COMMANDS = ("wick-square", "stress", "convergence")

DEFAULTS = {"d": 1.0, "xi": 1.0 / 6.0, "n_max": 200, "tail_tol": 1e-8}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _schema() -> dict:
    text = resources.files("casimir_aqft").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass
class RunConfig:
    geometry: Geometry
    state: StateSpec
    xi: float = DEFAULTS["xi"]
    n_max: int = DEFAULTS["n_max"]
    tail_tol: float = DEFAULTS["tail_tol"]
    normalization: str = "reference"
    eps: float = 1e-3
    z_grid: np.ndarray | None = None
    components: list = field(default_factory=lambda: [(0, 0), (1, 1), (2, 2), (3, 3)])
    points: list = field(default_factory=list)
    n_values: list | None = None
    test_functions: list = field(default_factory=list)
    pairs: list | None = None
    pairings: list | None = None
    outputs: dict = field(default_factory=dict)

    @property
    def boundary_state(self) -> BoundaryState:
        return BoundaryState(self.geometry, self.state,
                             ImageSeriesConfig(n_max=self.n_max, tail_tol=self.tail_tol))

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        try:
            jsonschema.validate(raw, _schema())
        except jsonschema.ValidationError as exc:
            raise ConfigError(_error_key(exc), exc.message) from None
        geo = raw.get("geometry", {"type": "slab"})
        if geo["type"] == "slab":
            geometry = Geometry.slab(float(geo.get("d", DEFAULTS["d"])))
        else:
            if "d" in geo:
                raise ConfigError("geometry.d", "the half-space has no width")
            geometry = Geometry.half_space()
        st = raw.get("state", {"type": "vacuum"})
        state = StateSpec.kms(float(st["beta"])) if st["type"] == "kms" else StateSpec.vacuum()
        cfg = cls(geometry, state)
        for key in ("xi", "n_max", "tail_tol", "normalization", "eps", "n_values", "pairs",
                    "pairings", "outputs"):
            if key in raw:
                setattr(cfg, key, raw[key])
        if "components" in raw:
            cfg.components = [tuple(c) for c in raw["components"]]
        if "z_grid" in raw:
            zg = raw["z_grid"]
            if isinstance(zg, dict):
                cfg.z_grid = np.linspace(zg["start"], zg["stop"], zg["num"])
            else:
                cfg.z_grid = np.asarray(zg, dtype=float)
        cfg.points = [(np.asarray(a, float), np.asarray(b, float)) for a, b in raw.get("points", [])]
        cfg.test_functions = [_test_function(i, tf) for i, tf in
                              enumerate(raw.get("test_functions", []))]
        if cfg.pairs is not None:
            for k, (i, j) in enumerate(cfg.pairs):
                if max(i, j) >= len(cfg.test_functions):
                    raise ConfigError(f"pairs.{k}", "index beyond test_functions")
        return cfg


def _error_key(exc: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in exc.absolute_path)
    if exc.validator == "additionalProperties":
        extra = sorted(set(exc.instance) - set(exc.schema.get("properties", {})))
        if extra:
            return ".".join(filter(None, [path, extra[0]]))
    if exc.validator == "required":
        missing = [k for k in exc.validator_value if k not in exc.instance]
        if missing:
            return ".".join(filter(None, [path, missing[0]]))
    return path or "<root>"


def _test_function(i: int, spec: dict) -> TestFunction:
    try:
        return make_bump(spec["center"], spec["radii"], spec.get("amplitude", 1.0))
    except ValueError as exc:
        raise ConfigError(f"test_functions.{i}", str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("--config", f"no such file {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# commands; each returns (header, rows, plot) with plot None or a callable


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(key, message)


def _z_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.z_grid is not None:
        return cfg.z_grid
    if cfg.geometry.is_slab:
        return np.linspace(0.1, 0.9, 9) * cfg.geometry.d
    return np.linspace(0.25, 2.0, 8)


def _cmd_twopoint(cfg: RunConfig):
    _require(bool(cfg.points), "points", "twopoint needs at least one point pair")
    K = boundary_kernel(cfg.boundary_state)
    rows = []
    for x, xp in cfg.points:
        v = complex(K.evaluator(x, xp, cfg.eps))
        err = 4.0 * np.finfo(float).eps * abs(v)
        if cfg.geometry.is_slab:
            s = image_series(cfg.boundary_state, x, xp, cfg.eps)
            err += abs(s.value - v) + s.err
        rows.append([*x, *xp, cfg.eps, v.real, v.imag, err])
    header = ["t", "x", "y", "z", "tp", "xp", "yp", "zp", "eps", "value_re", "value_im", "err"]
    return header, rows, None


def _cmd_density(cfg: RunConfig, kind: str):
    z = _z_grid(cfg)
    rows = []
    if kind == "wick":
        prof = density_profile(cfg.geometry, cfg.state, "wick", z,
                               normalization=cfg.normalization)
        rows = [[zi, v, e] for zi, v, e in zip(z, prof.values, prof.errors)]
        header = ["z", "value", "err"]
        series = {"wick square": (z, prof.values)}
    else:
        header = ["z", "mu", "nu", "value", "err"]
        series = {}
        for mu, nu in cfg.components:
            prof = density_profile(cfg.geometry, cfg.state, "stress", z, cfg.xi, mu, nu,
                                   cfg.normalization)
            rows += [[zi, mu, nu, v, e] for zi, v, e in zip(z, prof.values, prof.errors)]
            series[f"T{mu}{nu}"] = (z, prof.values)
    ylabel = "<phi^2>" if kind == "wick" else "<T_mu nu>"
    return header, rows, lambda path: _plot(path, series, "z", ylabel)


def _cmd_kms(cfg: RunConfig):
    _require(cfg.state.is_kms, "state.type", "kms-check needs a KMS state")
    tfs = cfg.test_functions
    _require(len(tfs) >= 2, "test_functions", "kms-check needs at least two test functions")
    pairs = cfg.pairs or [(0, 1)]
    rows = []
    for i, j in pairs:
        r = kms_condition_check(cfg.boundary_state, tfs[i], tfs[j])
        rows.append([i, j, r.value.real, r.value.imag, r.err])
    return ["f", "g", "value_re", "value_im", "err"], rows, None


def _cmd_positivity(cfg: RunConfig):
    _require(cfg.geometry.is_slab, "geometry.type", "positivity needs a slab geometry")
    _require(bool(cfg.test_functions), "test_functions", "positivity needs test functions")
    rows = []
    for i, f in enumerate(cfg.test_functions):
        N = _mode_count(f, cfg.geometry.d)
        v = positivity_form(cfg.boundary_state, f, N)
        fine = positivity_form(cfg.boundary_state, f, 2 * N)
        rows.append([i, fine, abs(fine - v) + 1e-15 * abs(fine)])
    return ["f", "value", "err"], rows, None


def _cmd_convergence(cfg: RunConfig):
    _require(cfg.geometry.is_slab and not cfg.state.is_kms, "geometry.type",
             "convergence compares against the vacuum slab closed form")
    points = cfg.points or [(np.array([0.3, 0.1, 0.0, 0.3]) * cfg.geometry.d,
                             np.array([0.0, 0.0, 0.2, 0.6]) * cfg.geometry.d)]
    n_values = cfg.n_values or sorted({int(v) for v in np.geomspace(1, cfg.n_max, 16)})
    _require(max(n_values) <= cfg.n_max, "n_values", "entries must not exceed n_max")
    K = boundary_kernel(cfg.boundary_state)
    rows, series = [], {}
    for p, (x, xp) in enumerate(points):
        closed = complex(K.evaluator(x, xp, cfg.eps))
        s = image_series(cfg.boundary_state, x, xp, cfg.eps)
        diffs = [abs(s.partial_sums[n] - closed) for n in n_values]
        rows += [[p, n, dv, 4.0 * np.finfo(float).eps * abs(closed)]
                 for n, dv in zip(n_values, diffs)]
        series[f"pair {p}"] = (np.array(n_values, float), np.array(diffs))
    return (["pair", "n", "value", "err"], rows,
            lambda path: _plot(path, series, "n", "|S_n - closed|", log=True))


def _cmd_algebra(cfg: RunConfig):
    tfs = cfg.test_functions
    _require(len(tfs) >= 2, "test_functions", "algebra-check needs at least two test functions")
    pairs = cfg.pairs or [(0, 1)]
    own = "slab" if cfg.geometry.is_slab else "half_space"
    names = cfg.pairings or ["minkowski", own, "deformed"]
    rows = []
    for name in names:
        if name == "slab":
            _require(cfg.geometry.is_slab, "pairings", "slab pairing needs a slab geometry")
            kind = PairingKind.slab(cfg.geometry.d)
        else:
            kind = getattr(PairingKind, name)()
        for i, j in pairs:
            r = ccr_causality_check(tfs[i], tfs[j], kind)
            rows.append([name, i, j, r.commutator_scalar.value.imag, r.commutator_scalar.err
                         + r.pairing_value.err, int(r.structure_ok), int(r.spacelike),
                         r.deviation])
    header = ["pairing", "f", "g", "value", "err", "structure_ok", "spacelike", "deviation"]
    return header, rows, None


_DISPATCH: dict[str, Callable[[RunConfig], Any]] = {
    "twopoint": _cmd_twopoint,
    "wick-square": lambda cfg: _cmd_density(cfg, "wick"),
    "stress": lambda cfg: _cmd_density(cfg, "stress"),
    "kms-check": _cmd_kms,
    "positivity": _cmd_positivity,
    "convergence": _cmd_convergence,
    "algebra-check": _cmd_algebra,
}


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v) + 0.0:.17g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _plot(path: Path, series: dict, xlabel: str, ylabel: str, log: bool = False) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "casimir-aqft", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, (x, y) in series.items():
            if log:
                ax.loglog(x, np.maximum(np.abs(y), 1e-300), marker="o", ms=3, label=label)
            else:
                ax.plot(x, y, marker="o", ms=3, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def run(command: str, config: RunConfig, out: str | Path = ".") -> int:
    """Execute one command; returns the exit status."""
    if command not in COMMANDS:
        print(f"error: --command: unknown command {command!r}", file=sys.stderr)
        return 1
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        header, rows, plot = _DISPATCH[command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 2
    csv_path = out / config.outputs.get("csv", f"{command}.csv")
    write_csv(csv_path, header, rows)
    written = [str(csv_path)]
    if plot is not None:
        svg_path = out / config.outputs.get("svg", f"{command}.svg")
        plot(svg_path)
        written.append(str(svg_path))
    errs = [row[header.index("err")] for row in rows]
    max_err = max(errs) if errs else 0.0
    print(f"{command}: {len(rows)} rows, max err {max_err:.3g}; wrote {', '.join(written)}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems count as invalid configuration
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = _Parser(prog="casimir-aqft", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--command", required=True, help=" | ".join(COMMANDS))
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
