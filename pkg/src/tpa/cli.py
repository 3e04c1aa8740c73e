"""Command line front end: parameter scans, figure data, self checks.

Three subcommands:

  tpa scan --config cfg.json [--out file.csv] [--workers N]
      Sweep one normalized parameter and tabulate an observable.
  tpa figure --fig N [--out file.csv] [--a-values 0,0.5,1]
      Reproduce one of the canned figure datasets (2, 3, 4, 5).
  tpa validate [--level fast|full]
      Run the cross-check suites and print a report.

Exit codes: 0 success, 1 failed validation, 2 usage or configuration error,
3 numerical failure (solver, quadrature, or locator did not converge).

Scan configs are JSON with normalized (gamma = 1) parameters:

    {
      "observable": "n2" | "n2+n3" | "width" | "stark" | "n2max" | "oracle_avg",
      "sweep": {"axis": "delta_tilde", "start": -6, "stop": 6, "count": 121},
      "fixed": {"x": 1e-3, "a_ratio": 1.0, "gamma_v_tilde": 2.0},
      "dist": {"kind": "lorentzian"},
      "quadrature": {"method": "adaptive_finite", "nodes": 32,
                     "domain_halfwidth": 10.0, "tol": 1e-6},
      "oracle": {"n_cap": 41, "refine_tol": 1e-14, "order": 3},
      "out": "scan.csv"
    }

Unknown keys are rejected everywhere. "quadrature" and "oracle" only apply
to the oracle_avg observable. CSV output starts with a '#'-prefixed JSON
metadata line and keeps 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytics, averaging
from ._version import __version__
from .analytics import LineshapeParams, LocatorError
from .averaging import QuadratureError, QuadratureSpec
from .core import NormalizedParams, ParameterError
from .oracle import DEFAULT_N_CAP, OracleError

__all__ = ["ScanConfig", "SpectrumScan", "parse_scan_config", "run_scan",
           "run_figure", "write_csv", "main"]

_OBSERVABLES = ("n2", "n2+n3", "width", "stark", "n2max", "oracle_avg")
_AXES = ("delta_tilde", "gamma_v_tilde", "a_ratio")
_FIXED_KEYS = {
    "n2": {"x", "mu", "delta_tilde", "gamma_v_tilde", "a_ratio"},
    "n2+n3": {"x", "mu", "delta_tilde", "gamma_v_tilde", "a_ratio"},
    "width": {"gamma_v_tilde", "a_ratio"},
    "stark": {"x", "mu", "gamma_v_tilde", "a_ratio"},
    "n2max": {"x", "mu", "gamma_v_tilde", "a_ratio"},
    "oracle_avg": {"delta_tilde", "gamma_v_tilde", "a_ratio", "mu",
                   "phi_tilde", "delta_big_tilde"},
}
_REQUIRED_FIXED = {
    "n2": {"x"}, "n2+n3": {"x"}, "stark": {"x"}, "n2max": {"x"},
    "width": set(), "oracle_avg": {"delta_big_tilde"},
}


@dataclass(frozen=True)
class ScanConfig:
    observable: str
    axis: str
    grid: np.ndarray
    fixed: dict
    kind: str
    quad: QuadratureSpec | None = None
    oracle_opts: dict = field(default_factory=dict)
    out: str | None = None
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumScan:
    """Tabulated sweep: the axis grid plus one or more value columns."""

    axis: str
    grid: np.ndarray
    columns: dict
    metadata: dict


def _float_item(doc: dict, key: str, where: str) -> float:
    try:
        value = float(doc[key])
    except (TypeError, ValueError):
        raise ParameterError(f"{where}.{key} must be a number, got {doc[key]!r}")
    return value


def _check_keys(doc: dict, allowed, required, where: str) -> None:
    if not isinstance(doc, dict):
        raise ParameterError(f"{where} must be a mapping")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ParameterError(f"unknown {where} keys: {sorted(unknown)}")
    missing = set(required) - set(doc)
    if missing:
        raise ParameterError(f"missing {where} keys: {sorted(missing)}")


def parse_scan_config(doc: dict) -> ScanConfig:
    """Validate a scan config document; any problem raises ParameterError."""
    _check_keys(doc, ("observable", "sweep", "fixed", "dist", "quadrature",
                      "oracle", "out"), ("observable", "sweep"), "config")
    obs = doc["observable"]
    if obs not in _OBSERVABLES:
        raise ParameterError(
            f"observable must be one of {_OBSERVABLES}, got {obs!r}")

    sweep = doc["sweep"]
    _check_keys(sweep, ("axis", "start", "stop", "count"),
                ("axis", "start", "stop", "count"), "sweep")
    axis = sweep["axis"]
    if axis not in _AXES:
        raise ParameterError(f"sweep.axis must be one of {_AXES}, got {axis!r}")
    start = _float_item(sweep, "start", "sweep")
    stop = _float_item(sweep, "stop", "sweep")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ParameterError("sweep.start and sweep.stop must be finite")
    count = sweep["count"]
    if not isinstance(count, int) or count < 2:
        raise ParameterError(f"sweep.count must be an integer >= 2, got {count!r}")
    grid = np.linspace(start, stop, count)

    fixed_doc = doc.get("fixed", {})
    allowed = _FIXED_KEYS[obs]
    _check_keys(fixed_doc, allowed, _REQUIRED_FIXED[obs], "fixed")
    fixed = {k: _float_item(fixed_doc, k, "fixed") for k in fixed_doc}
    if axis in fixed:
        raise ParameterError(f"sweep axis {axis!r} also appears in fixed")
    if axis not in allowed:
        raise ParameterError(
            f"axis {axis!r} does not apply to observable {obs!r}")

    gv_values = grid if axis == "gamma_v_tilde" else \
        np.array([fixed.get("gamma_v_tilde", 0.0)])
    if np.any(gv_values < 0.0):
        raise ParameterError("gamma_v_tilde values must be >= 0")

    dist_doc = doc.get("dist")
    if dist_doc is None:
        kind = "homogeneous" if np.all(gv_values == 0.0) else "lorentzian"
    else:
        _check_keys(dist_doc, ("kind",), ("kind",), "dist")
        kind = str(dist_doc["kind"]).lower()
        if kind not in ("homogeneous", "lorentzian", "gaussian"):
            raise ParameterError(f"unknown dist kind {kind!r}")
    if kind == "homogeneous" and np.any(gv_values != 0.0):
        raise ParameterError(
            "homogeneous profiles require gamma_v_tilde = 0 everywhere")
    if obs != "oracle_avg" and kind == "gaussian":
        raise ParameterError(
            f"observable {obs!r} closes only for lorentzian or homogeneous "
            "profiles; use oracle_avg or the library API for gaussian ones")
    if obs == "oracle_avg" and kind != "homogeneous" and np.any(gv_values == 0.0):
        raise ParameterError(
            f"{kind} profiles need gamma_v_tilde > 0 at every sweep point")

    quad = None
    if "quadrature" in doc:
        if obs != "oracle_avg":
            raise ParameterError("'quadrature' only applies to oracle_avg")
        qdoc = doc["quadrature"]
        _check_keys(qdoc, ("method", "nodes", "domain_halfwidth", "tol"),
                    (), "quadrature")
        kwargs = {}
        if "method" in qdoc:
            kwargs["method"] = str(qdoc["method"])
        if "nodes" in qdoc:
            if not isinstance(qdoc["nodes"], int):
                raise ParameterError("quadrature.nodes must be an integer")
            kwargs["nodes"] = qdoc["nodes"]
        if "domain_halfwidth" in qdoc:
            kwargs["domain_halfwidth"] = _float_item(qdoc, "domain_halfwidth",
                                                     "quadrature")
        if "tol" in qdoc:
            kwargs["tol"] = _float_item(qdoc, "tol", "quadrature")
        quad = QuadratureSpec(**kwargs)

    oracle_opts = {"n_cap": DEFAULT_N_CAP, "refine_tol": 1e-14, "order": 3}
    if "oracle" in doc:
        if obs != "oracle_avg":
            raise ParameterError("'oracle' options only apply to oracle_avg")
        odoc = doc["oracle"]
        _check_keys(odoc, ("n_cap", "refine_tol", "order"), (), "oracle")
        if "n_cap" in odoc:
            if not isinstance(odoc["n_cap"], int) or odoc["n_cap"] < 3:
                raise ParameterError("oracle.n_cap must be an integer >= 3")
            oracle_opts["n_cap"] = odoc["n_cap"]
        if "refine_tol" in odoc:
            oracle_opts["refine_tol"] = _float_item(odoc, "refine_tol", "oracle")
        if "order" in odoc:
            if odoc["order"] not in (2, 3):
                raise ParameterError("oracle.order must be 2 or 3")
            oracle_opts["order"] = odoc["order"]

    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ParameterError("out must be a string path")

    metadata = {
        "command": "scan",
        "version": __version__,
        "observable": obs,
        "sweep": {"axis": axis, "start": start, "stop": stop, "count": count},
        "fixed": fixed,
        "dist": {"kind": kind},
    }
    if quad is not None:
        metadata["quadrature"] = {
            "method": quad.method, "nodes": quad.nodes,
            "domain_halfwidth": (quad.domain_halfwidth
                                 if math.isfinite(quad.domain_halfwidth)
                                 else "inf"),
            "tol": quad.tol}
    if "oracle" in doc:
        metadata["oracle"] = dict(oracle_opts)
    return ScanConfig(observable=obs, axis=axis, grid=grid, fixed=fixed,
                      kind=kind, quad=quad, oracle_opts=oracle_opts, out=out,
                      metadata=metadata)


def _lineshape_at(vals: dict) -> LineshapeParams:
    return LineshapeParams(x=vals["x"], a_ratio=vals.get("a_ratio", 0.0),
                           gamma_v_tilde=vals.get("gamma_v_tilde", 0.0),
                           mu=vals.get("mu", 1.0))


def _closed_point(cfg: ScanConfig, value: float) -> float:
    vals = dict(cfg.fixed)
    vals[cfg.axis] = float(value)
    obs = cfg.observable
    if obs == "width":
        return analytics.width_fwhm(vals.get("a_ratio", 0.0),
                                    vals.get("gamma_v_tilde", 0.0))
    p = _lineshape_at(vals)
    if obs == "n2":
        return analytics.n2(p, vals.get("delta_tilde", 0.0))
    if obs == "n2+n3":
        d = vals.get("delta_tilde", 0.0)
        return analytics.n2(p, d) + analytics.n3(p, d)
    if obs == "stark":
        return analytics.stark_shift(p)
    return analytics.n2_max(p)


def _oracle_point(cfg: ScanConfig, value: float):
    vals = dict(cfg.fixed)
    vals[cfg.axis] = float(value)
    gv = vals.get("gamma_v_tilde", 0.0)
    params = NormalizedParams.build(
        delta_tilde=vals.get("delta_tilde", 0.0),
        gamma_v_tilde=gv,
        a_ratio=vals.get("a_ratio", 0.0),
        mu=vals.get("mu", 1.0),
        phi_tilde=vals.get("phi_tilde", 1.0),
        delta_big_tilde=vals["delta_big_tilde"],
        kind=cfg.kind if gv > 0.0 else "homogeneous")
    got, info = averaging.oracle_average(
        params, cfg.quad, order=cfg.oracle_opts["order"],
        n_cap=cfg.oracle_opts["n_cap"],
        refine_tol=cfg.oracle_opts["refine_tol"], return_info=True)
    return got, info["n_used"]


def run_scan(config: ScanConfig, workers: int = 1) -> SpectrumScan:
    """Evaluate the configured observable over the sweep grid."""
    if config.observable == "oracle_avg":
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda v: _oracle_point(config, v),
                                        config.grid))
        else:
            results = [_oracle_point(config, v) for v in config.grid]
        values = np.array([r[0] for r in results])
        n_used = np.array([float(r[1]) for r in results])
        columns = {"oracle_avg": values, "n_used": n_used}
    else:
        values = np.array([_closed_point(config, v) for v in config.grid])
        columns = {config.observable: values}
    return SpectrumScan(axis=config.axis, grid=config.grid, columns=columns,
                        metadata=config.metadata)


def _gaussian_width_curve(gv: float):
    base = NormalizedParams.build(a_ratio=1.0, gamma_v_tilde=gv, x=1e-3,
                                  phi_tilde=1.0,
                                  kind="gaussian" if gv > 0 else None)

    def curve(d: float) -> float:
        return averaging.averaged_population(base.with_delta(d), order=2)
    return curve


def _gaussian_peak_location(gv: float, a: float) -> float:
    base = NormalizedParams.build(a_ratio=a, gamma_v_tilde=gv, x=1e-3,
                                  phi_tilde=1.0, mu=math.sqrt(2.0),
                                  kind="gaussian" if gv > 0 else None)

    def curve(d: float) -> float:
        return averaging.averaged_population(base.with_delta(d), order=3)
    return analytics.numeric_peak(curve, bracket_halfwidth=4.0 * (1.0 + gv),
                                  tol=1e-9)


def run_figure(fig: int, a_values=None) -> SpectrumScan:
    """Build the dataset behind one of the canned figures.

    2: peak signal versus Doppler width for several beam ratios, all
       normalized to the homogeneous equal-wave value;
    3: closed-form half width Gamma/2 versus Doppler width;
    4: Gamma/2 for an equal standing wave, Lorentzian closed form against a
       Gaussian profile measured on the averaged order-2 line;
    5: ratio of standing-wave to running-wave peak displacement, Lorentzian
       closed form against Gaussian peak bracketing.
    """
    if fig == 2:
        avals = [0.0, 0.25, 0.5, 0.75, 1.0] if a_values is None else list(a_values)
        grid = np.linspace(0.0, 20.0, 81)
        ref = analytics.n2_max(LineshapeParams(x=1.0, a_ratio=1.0))
        columns = {}
        for a in avals:
            columns[f"a={a:g}"] = np.array(
                [analytics.n2_max(LineshapeParams(x=1.0, a_ratio=a,
                                                  gamma_v_tilde=gv)) / ref
                 for gv in grid])
        meta_a = avals
    elif fig == 3:
        avals = [0.5, 1.0] if a_values is None else list(a_values)
        grid = np.concatenate([[0.0], np.geomspace(0.01, 100.0, 48)])
        columns = {f"a={a:g}": np.array([0.5 * analytics.width_fwhm(a, gv)
                                         for gv in grid])
                   for a in avals}
        meta_a = avals
    elif fig == 4:
        if a_values is not None:
            raise ParameterError("figure 4 is defined for a_ratio = 1 only")
        grid = np.concatenate([[0.0], np.geomspace(0.05, 100.0, 23)])
        lorentz = np.array([0.5 * analytics.width_fwhm(1.0, gv) for gv in grid])
        gauss = np.array([0.5 * analytics.numeric_fwhm(_gaussian_width_curve(gv))
                          for gv in grid])
        columns = {"lorentzian": lorentz, "gaussian": gauss}
        meta_a = [1.0]
    elif fig == 5:
        if a_values is not None:
            raise ParameterError("figure 5 compares a_ratio 1 and 0 only")
        grid = np.concatenate([[0.0], np.geomspace(0.05, 100.0, 19)])
        mu = math.sqrt(2.0)
        lorentz = np.array(
            [analytics.stark_shift_sw(LineshapeParams(x=1e-3, a_ratio=1.0,
                                                      gamma_v_tilde=gv, mu=mu))
             / analytics.stark_shift_tw(LineshapeParams(x=1e-3, a_ratio=0.0,
                                                        gamma_v_tilde=gv, mu=mu))
             for gv in grid])
        gauss = np.array([_gaussian_peak_location(gv, 1.0)
                          / _gaussian_peak_location(gv, 0.0) for gv in grid])
        columns = {"lorentzian": lorentz, "gaussian": gauss}
        meta_a = [1.0, 0.0]
    else:
        raise ParameterError(f"figure must be 2, 3, 4, or 5, got {fig}")
    metadata = {"command": "figure", "version": __version__, "fig": fig,
                "a_values": meta_a, "axis": "gamma_v_tilde"}
    return SpectrumScan(axis="gamma_v_tilde", grid=grid, columns=columns,
                        metadata=metadata)


def write_csv(scan: SpectrumScan, target) -> None:
    """Write a scan as CSV: '#'-prefixed JSON metadata, then the table."""
    if isinstance(target, (str, bytes)):
        handle = open(target, "w", encoding="ascii", newline="\n")
        close = True
    else:
        handle = target
        close = False
    try:
        handle.write("# " + json.dumps(scan.metadata, sort_keys=True) + "\n")
        names = list(scan.columns)
        handle.write(",".join([scan.axis] + names) + "\n")
        for k, v in enumerate(scan.grid):
            row = [format(float(v), ".17g")]
            row.extend(format(float(scan.columns[name][k]), ".17g")
                       for name in names)
            handle.write(",".join(row) + "\n")
    finally:
        if close:
            handle.close()


def _default_workers() -> int:
    raw = os.environ.get("TPA_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ParameterError(f"TPA_WORKERS must be an integer, got {raw!r}")
    if workers < 1:
        raise ParameterError(f"TPA_WORKERS must be >= 1, got {workers}")
    return workers


def _parse_a_values(raw: str):
    try:
        values = [float(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise ParameterError(f"--a-values must be comma-separated numbers, "
                             f"got {raw!r}")
    if not values or any(v < 0.0 for v in values):
        raise ParameterError("--a-values must list one or more ratios >= 0")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tpa",
        description="Two-photon spectra of Doppler-broadened ladder atoms "
                    "in counterpropagating beams.")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="sweep a parameter and tabulate an "
                                       "observable")
    scan.add_argument("--config", required=True, help="JSON config path")
    scan.add_argument("--out", default=None, help="output CSV path "
                      "(default: config 'out' or stdout)")
    scan.add_argument("--workers", type=int, default=None,
                      help="parallel solver threads (default: TPA_WORKERS or 1)")

    figure = sub.add_parser("figure", help="write one of the canned figure "
                                           "datasets")
    figure.add_argument("--fig", type=int, required=True, choices=(2, 3, 4, 5))
    figure.add_argument("--out", default=None,
                        help="output CSV path (default: fig<N>.csv)")
    figure.add_argument("--a-values", default=None,
                        help="override beam ratios, comma separated "
                             "(figures 2 and 3)")

    validate = sub.add_parser("validate", help="run the self-check suites")
    validate.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "scan":
            try:
                with open(args.config, "r", encoding="utf-8") as handle:
                    doc = json.load(handle)
            except OSError as exc:
                raise ParameterError(f"cannot read config: {exc}")
            except json.JSONDecodeError as exc:
                raise ParameterError(f"config is not valid JSON: {exc}")
            config = parse_scan_config(doc)
            workers = args.workers if args.workers is not None \
                else _default_workers()
            if workers < 1:
                raise ParameterError(f"--workers must be >= 1, got {workers}")
            scan = run_scan(config, workers=workers)
            out = args.out if args.out is not None else config.out
            write_csv(scan, out if out is not None else sys.stdout)
            return 0
        if args.command == "figure":
            a_values = (None if args.a_values is None
                        else _parse_a_values(args.a_values))
            scan = run_figure(args.fig, a_values)
            write_csv(scan, args.out if args.out is not None
                      else f"fig{args.fig}.csv")
            return 0
        from .validation import run_validation
        report = run_validation(level=args.level)
        print(report.format_table())
        return 0 if report.passed else 1
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OracleError, QuadratureError, LocatorError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
