"""Command-line surface: simulate, sweep, fit and plot.

Config files are INI-style with sections [materials], [stack],
[emitter], [collection], [excitation] and [reference]; unknown sections
or keys are rejected.  Exit codes: 0 success, 1 usage error,
2 validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import tempfile
from importlib import resources

import numpy as np

from .config import RunConfig
from .dipole import EmitterSpec, ORIENTATIONS, QuadratureSpec
from .enhance import SpectrumWeight, pl_enhancement
from .fit import DecayTrace, FitError, fit_exp_decay, fit_odmr, odmr_model
from .materials import (Material, MaterialRangeError, NkParseError, builtin,
                        load_nk_table)
from .quadrature import QuadratureError
from .sweep import (BoundaryOptimumError, SweepSpec, evaluate_metric,
                    refine_optimum, run_sweep)
from .tmm import Layer, Stack

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Invalid run configuration file."""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------- config

_KNOWN_KEYS = {
    "materials": None,  # free-form names
    "stack": {"below", "above", "layers"},
    "emitter": {"host_layer", "depth_nm", "orientation", "eta0", "spectrum",
                "n_samples"},
    "collection": {"na"},
    "excitation": {"wavelength_nm"},
    "reference": {"below", "above", "layers", "host_layer", "depth_nm"},
}


def _parse_material(name: str, value: str, base_dir: str) -> Material:
    parts = value.split()
    try:
        if parts[0] == "constant" and len(parts) in (2, 3):
            k = float(parts[2]) if len(parts) == 3 else 0.0
            return Material.constant(name, float(parts[1]), k)
        if parts[0] == "builtin" and len(parts) == 2:
            mat = builtin(parts[1])
            return mat
        if parts[0] == "nkfile" and len(parts) == 2:
            path = os.path.join(base_dir, parts[1])
            if not os.path.exists(path):
                raise ConfigError(f"materials.{name}: nk file not found: {path}")
            with open(path, encoding="utf-8") as fh:
                return load_nk_table(fh, name=name)
    except (ValueError, KeyError, NkParseError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"materials.{name}: {exc}") from None
    raise ConfigError(
        f"materials.{name}: expected 'constant N [K]', 'builtin NAME' or "
        f"'nkfile PATH', got {value!r}"
    )


def _resolve_material(name: str, table: dict) -> Material:
    if name in table:
        return table[name]
    try:
        return builtin(name)
    except KeyError:
        raise ConfigError(f"unknown material {name!r}") from None


def _parse_layers(value: str, table: dict, where: str) -> tuple[Layer, ...]:
    layers = []
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"{where}: layer {item!r} must be 'material:thickness_nm'")
        mat_name, thick = item.rsplit(":", 1)
        try:
            d = float(thick)
        except ValueError:
            raise ConfigError(f"{where}: bad thickness {thick!r} in {item!r}") from None
        try:
            layers.append(Layer(_resolve_material(mat_name.strip(), table), d))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if not layers:
        raise ConfigError(f"{where}: no layers given")
    return tuple(layers)


def _parse_spectrum(value: str) -> SpectrumWeight:
    parts = value.split()
    try:
        if parts[0] == "gaussian" and len(parts) == 3:
            return SpectrumWeight.gaussian(float(parts[1]), float(parts[2]))
        if parts[0] == "flat" and len(parts) in (1, 3):
            if len(parts) == 1:
                return SpectrumWeight.flat()
            return SpectrumWeight.flat(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"emitter.spectrum: {exc}") from None
    raise ConfigError(
        f"emitter.spectrum: expected 'gaussian CENTER FWHM' or "
        f"'flat [MIN MAX]', got {value!r}"
    )


def _preset_path(name: str) -> str | None:
    fname = name if name.endswith(".cfg") else name + ".cfg"
    ref = resources.files("planaremit").joinpath("data", "presets", fname)
    return str(ref) if ref.is_file() else None


def load_config(path: str) -> RunConfig:
    """Load a RunConfig from a config file path or a bundled preset name."""
    if not os.path.exists(path):
        preset = _preset_path(os.path.basename(path))
        if preset is None:
            raise ConfigError(f"config file not found: {path}")
        path = preset
    base_dir = os.path.dirname(os.path.abspath(path))
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        allowed = _KNOWN_KEYS[section]
        if allowed is not None:
            for key in cp[section]:
                if key not in allowed:
                    raise ConfigError(f"{path}: unknown key {section}.{key}")
    for required in ("stack", "emitter", "reference"):
        if required not in cp:
            raise ConfigError(f"{path}: missing section [{required}]")

    table = {}
    if "materials" in cp:
        for name, value in cp["materials"].items():
            table[name] = _parse_material(name, value, base_dir)

    def get(section, key, default=None, cast=str):
        if key in cp[section]:
            raw = cp[section][key]
            try:
                return cast(raw)
            except ValueError:
                raise ConfigError(f"{path}: bad value for {section}.{key}: "
                                  f"{raw!r}") from None
        if default is None:
            raise ConfigError(f"{path}: missing key {section}.{key}")
        return default

    stack = Stack(
        below=_resolve_material(get("stack", "below"), table),
        layers=_parse_layers(get("stack", "layers"), table, "stack.layers"),
        above=_resolve_material(get("stack", "above"), table),
    )
    host = get("emitter", "host_layer", cast=int)
    depth = get("emitter", "depth_nm", cast=float)
    orientation = get("emitter", "orientation", default="in_plane_average")
    if orientation not in ORIENTATIONS:
        raise ConfigError(
            f"{path}: emitter.orientation must be one of {ORIENTATIONS}"
        )
    eta0 = get("emitter", "eta0", default=0.05, cast=float)
    try:
        emitter = EmitterSpec(host, depth, orientation, eta0)
    except ValueError as exc:
        raise ConfigError(f"{path}: emitter: {exc}") from None
    weight = (_parse_spectrum(cp["emitter"]["spectrum"])
              if "spectrum" in cp["emitter"] else SpectrumWeight.gaussian(810, 80))
    n_samples = get("emitter", "n_samples", default=31, cast=int)

    ref = cp["reference"]
    ref_stack = Stack(
        below=_resolve_material(ref.get("below", get("stack", "below")), table),
        layers=_parse_layers(get("reference", "layers"), table,
                             "reference.layers"),
        above=_resolve_material(ref.get("above", get("stack", "above")), table),
    )
    ref_host = get("reference", "host_layer", cast=int)
    ref_depth = get("reference", "depth_nm", default=depth, cast=float)
    try:
        ref_emitter = EmitterSpec(ref_host, ref_depth, orientation, eta0)
    except ValueError as exc:
        raise ConfigError(f"{path}: reference emitter: {exc}") from None

    na = get("collection", "na", default=0.9, cast=float) \
        if "collection" in cp else 0.9
    pump = get("excitation", "wavelength_nm", default=532.0, cast=float) \
        if "excitation" in cp else 532.0
    try:
        return RunConfig(stack=stack, ref_stack=ref_stack, emitter=emitter,
                         ref_emitter=ref_emitter, weight=weight, na=na,
                         pump_wavelength_nm=pump, n_samples=n_samples)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- output

def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _rows_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([("" if row.get(c) is None else repr(row[c])
                          if isinstance(row[c], float) else row[c])
                         for c in columns])
    return buf.getvalue()


# ------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    config = load_config(args.config)
    report = pl_enhancement(
        config.stack, config.ref_stack, config.emitter, config.weight,
        NA=config.na, ref_emitter=config.ref_emitter,
        pump_wavelength_nm=config.pump_wavelength_nm,
        n_samples=config.n_samples, quad=config.quad)
    _atomic_write(args.out, _json_text(report.to_dict()))
    if args.csv:
        rows = list(report.rows)
        columns = ["wavelength_nm"] + sorted(k for k in rows[0]
                                             if k != "wavelength_nm")
        _atomic_write(args.csv, _rows_csv(rows, columns))
    print(f"total_gain = {report.total_gain:.6g} -> {args.out}")
    return EXIT_OK


def _parse_sweep_values(args) -> tuple:
    if args.values:
        try:
            return tuple(float(v) for v in args.values.split(","))
        except ValueError:
            raise _UsageError(f"bad --values list: {args.values!r}") from None
    try:
        start, stop, step = (float(v) for v in args.range.split(":"))
    except ValueError:
        raise _UsageError(
            f"bad --range (expected start:stop:step): {args.range!r}"
        ) from None
    if step <= 0:
        raise _UsageError("--range step must be > 0")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(max(n, 1)))


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    values = _parse_sweep_values(args)
    try:
        spec = SweepSpec(args.param, values, args.metric)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = run_sweep(spec, config)
    refined = None
    if args.refine:
        refined = refine_optimum(
            result, lambda v: evaluate_metric(config, spec, v),
            tolerance=args.refine_tolerance)

    breakdown_keys = sorted({k for r in result.rows for k in r.breakdown
                             if k != spec.metric})
    columns = ["parameter_value", "metric_value"] + breakdown_keys + \
        ["failed", "error"]
    rows = []
    for r in result.rows:
        row = {"parameter_value": r.parameter_value,
               "metric_value": r.metric_value,
               "failed": int(r.failed), "error": r.error or ""}
        row.update({k: r.breakdown.get(k) for k in breakdown_keys})
        rows.append(row)
    _atomic_write(args.out, _rows_csv(rows, columns))

    msg = f"argmax {spec.metric} at {result.argmax_value}"
    if refined is not None:
        msg += f" (refined: {refined:.3f})"
    if result.failures:
        msg += f"; {len(result.failures)} point(s) failed"
    print(msg + f" -> {args.out}")
    return EXIT_OK


def _read_fit_csv(path: str, mode: str):
    if not os.path.exists(path):
        raise ConfigError(f"data file not found: {path}")
    expected = ("t_ns", "counts") if mode == "lifetime" else ("freq_ghz", "pl")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV") from None
        cols = [c.strip().lower() for c in header]
        if cols[:2] != list(expected):
            raise ConfigError(
                f"{path}: expected header '{expected[0]},{expected[1]}', "
                f"got {','.join(header)!r}"
            )
        data = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                data.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                raise ConfigError(
                    f"{path}: line {lineno}: bad data row {row!r}"
                ) from None
    if not data:
        raise ConfigError(f"{path}: no data rows")
    return np.asarray(data, dtype=float)


def cmd_fit(args) -> int:
    data = _read_fit_csv(args.data, args.mode)
    if args.mode == "lifetime":
        try:
            trace = DecayTrace(data[:, 0], data[:, 1])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        result = fit_exp_decay(trace)
        curve = result.model(data[:, 0])
        report = {
            "mode": "lifetime",
            "params": {"a": result.a, "b": result.b, "tau_ns": result.tau_ns,
                       "c": result.c},
            "residual_rms": result.residual_rms,
            "data": {"x": data[:, 0].tolist(), "y": data[:, 1].tolist(),
                     "x_label": "t_ns", "y_label": "counts"},
            "fit_curve": curve.tolist(),
        }
        summary = f"tau = {result.tau_ns:.6g} ns"
    else:
        try:
            params = fit_odmr(data)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        curve = odmr_model(params, data[:, 0])
        report = {
            "mode": "odmr",
            "params": {"D_GHz": params.D_GHz, "E_GHz": params.E_GHz,
                       "contrast_minus": params.contrast_minus,
                       "contrast_plus": params.contrast_plus,
                       "width_GHz": params.width_GHz,
                       "baseline": params.baseline},
            "single_dip_warning": params.single_dip_warning,
            "data": {"x": data[:, 0].tolist(), "y": data[:, 1].tolist(),
                     "x_label": "freq_GHz", "y_label": "pl"},
            "fit_curve": curve.tolist(),
        }
        summary = f"D = {params.D_GHz:.6g} GHz, E = {params.E_GHz:.6g} GHz"
    _atomic_write(args.out, _json_text(report))
    print(f"{summary} -> {args.out}")
    return EXIT_OK


def _plot_csv(path: str, ax):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ConfigError(f"{path}: need a header row with >= 2 columns")
        xs, ys = [], []
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except (ValueError, IndexError):
                continue
    if not xs:
        raise ConfigError(f"{path}: no plottable numeric rows")
    ax.plot(xs, ys, "o-", ms=3)
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])


def _plot_json(path: str, ax):
    with open(path, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    data = report.get("data")
    if not data or "x" not in data or "y" not in data:
        raise ConfigError(f"{path}: JSON report has no plottable 'data' block")
    ax.plot(data["x"], data["y"], "o", ms=3, label="data")
    if "fit_curve" in report:
        ax.plot(data["x"], report["fit_curve"], "-", label="fit")
        ax.legend()
    ax.set_xlabel(data.get("x_label", "x"))
    ax.set_ylabel(data.get("y_label", "y"))


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    if args.input.lower().endswith(".json"):
        _plot_json(args.input, ax)
    else:
        _plot_csv(args.input, ax)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, format="svg")
    plt.close(fig)
    print(f"wrote {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------- main

def _build_parser() -> _Parser:
    parser = _Parser(prog="planaremit",
                     description="Planar-stack emitter enhancement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="PL enhancement report for a config")
    p.add_argument("config", help="config file path or bundled preset name")
    p.add_argument("-o", "--out", required=True, help="output JSON path")
    p.add_argument("--csv", help="also write the per-wavelength CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="scan a stack parameter over a metric")
    p.add_argument("config")
    p.add_argument("--param", required=True,
                   help="parameter path, e.g. layers[3].thickness_nm")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--values", help="comma-separated values")
    g.add_argument("--range", help="start:stop:step")
    p.add_argument("--metric", required=True,
                   choices=["band_avg_purcell", "total_gain", "collection",
                            "excitation_gain"])
    p.add_argument("-o", "--out", required=True, help="output CSV path")
    p.add_argument("--refine", action="store_true",
                   help="golden-section refinement of the optimum")
    p.add_argument("--refine-tolerance", type=float, default=0.5)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit a lifetime trace or ODMR spectrum")
    p.add_argument("--mode", required=True, choices=["lifetime", "odmr"])
    p.add_argument("data", help="input CSV (t_ns,counts or freq_GHz,pl)")
    p.add_argument("-o", "--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot", help="render a CSV/JSON result as SVG")
    p.add_argument("input", help="sweep CSV, per-wavelength CSV or fit JSON")
    p.add_argument("-o", "--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, MaterialRangeError, NkParseError, ValueError,
            BoundaryOptimumError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QuadratureError, FitError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
