"""Command-line entry point: ``qdcoupling <subcommand> --config run.json``.

Every run is described by one JSON document. Quantities are either plain
numbers in the canonical unit (ueV, K, aF, mV, nm) or objects
``{"value": 5.8, "unit": "GHz"}``. Outputs are written under ``--out`` and a
short JSON summary goes to stdout.

Exit codes: 0 success, 2 bad config or input, 3 I/O failure, 4 numerical
failure.
"""
import argparse
import json
import math
from pathlib import Path
import sys
import warnings

import numpy as np

from . import __version__, capnet, diagram, fitters, geometry
from .units import H_UEV_PER_GHZ, to_canonical

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    """A config field is missing or invalid; the message names the field."""


# ------------------------------------------------------------- config access


def quantity(cfg, key, kind, default=None, prefix=""):
    """Read ``cfg[key]`` as a number in the canonical unit of ``kind``."""
    name = f"{prefix}{key}"
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing field {name!r}")
        return default
    raw = cfg[key]
    try:
        if isinstance(raw, dict):
            value = to_canonical(float(raw["value"]), raw.get("unit", ""), kind)
        else:
            value = float(raw)
    except KeyError as exc:
        raise ConfigError(f"field {name!r}: {exc.args[0]}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"field {name!r} must be a number or {{value, unit}}") from None
    if not math.isfinite(value):
        raise ConfigError(f"field {name!r} must be finite")
    return value


def numbers(cfg, key, n=None, prefix="", default=None):
    name = f"{prefix}{key}"
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing field {name!r}")
        return default
    try:
        out = [float(v) for v in cfg[key]]
    except (TypeError, ValueError):
        raise ConfigError(f"field {name!r} must be a list of numbers") from None
    if n is not None and len(out) != n:
        raise ConfigError(f"field {name!r} must have {n} entries")
    return out


def section(cfg, key, required=True):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing section {key!r}")
        return {}
    if not isinstance(cfg[key], dict):
        raise ConfigError(f"section {key!r} must be an object")
    return cfg[key]


def integer(cfg, key, default, prefix=""):
    raw = cfg.get(key, default)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)) or int(raw) != raw:
        raise ConfigError(f"field {prefix}{key!r} must be an integer")
    return int(raw)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def dump_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def both_units(value_uev, sigma_uev=None):
    out = {"ueV": value_uev, "GHz": value_uev / H_UEV_PER_GHZ}
    if sigma_uev is not None:
        out["sigma_ueV"] = sigma_uev
        out["sigma_GHz"] = sigma_uev / H_UEV_PER_GHZ
    return out


def fit_records(names, values, sigmas, cov, extra=None):
    """Records (parameter, value, sigma, unit, covariance) in ueV and GHz."""
    extra = extra or {}
    cov = np.asarray(cov, float)
    records = []
    for unit, scale in (("ueV", 1.0), ("GHz", 1.0 / H_UEV_PER_GHZ)):
        for k, name in enumerate(names):
            row = cov[k] * scale * scale
            rec = {
                "parameter": name,
                "value": values[k] * scale,
                "sigma": sigmas[k] * scale,
                "unit": unit,
                "covariance": {n: (None if not np.isfinite(v) else float(v)) for n, v in zip(names, row)},
            }
            rec.update(extra.get(name, {}))
            records.append(rec)
    return records


# ----------------------------------------------------------------- builders


def lever_arms_from(cfg, prefix="lever_arms."):
    if "alpha" in cfg:
        try:
            return diagram.LeverArmSet(cfg["alpha"], cfg.get("alpha_sigma"))
        except ValueError as exc:
            raise ConfigError(f"field {prefix}alpha: {exc}") from None
    al = quantity(cfg, "alpha_l", "lever_arm", prefix=prefix)
    ar = quantity(cfg, "alpha_r", "lever_arm", prefix=prefix)
    try:
        return diagram.LeverArmSet.from_detuning(al, ar, cfg.get("sigma_l"), cfg.get("sigma_r"))
    except ValueError as exc:
        raise ConfigError(f"field {prefix}alpha_l/alpha_r: {exc}") from None


def network_from(cfg):
    p = "network."
    try:
        return capnet.CapacitanceNetwork(
            numbers(cfg, "c_total", 4, p),
            numbers(cfg, "c_inter", 3, p),
            numbers(cfg, "c_gate", 4, p, default=[0.0] * 4),
            numbers(cfg, "c_ohmic", 2, p, default=[0.0] * 2),
        )
    except capnet.NetworkError as exc:
        raise ConfigError(f"section 'network': {exc}") from None


def axis_from(cfg, name, prefix):
    npts = integer(cfg, "npoints", None, prefix) if "npoints" in cfg else None
    if npts is None:
        raise ConfigError(f"missing field {prefix + 'npoints'!r}")
    if npts < 2:
        raise ConfigError(f"field {prefix + 'npoints'!r} must be >= 2")
    try:
        return diagram.AxisSpec(
            cfg.get("name", name),
            quantity(cfg, "start", "voltage", prefix=prefix),
            quantity(cfg, "stop", "voltage", prefix=prefix),
            npts,
            "mV",
        )
    except ValueError as exc:
        raise ConfigError(f"section {prefix.rstrip('.')!r}: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_simulate_diagram(cfg, args):
    prm = section(cfg, "params")
    t_l = quantity(prm, "t_l", "energy", prefix="params.")
    t_r = quantity(prm, "t_r", "energy", prefix="params.")
    g = quantity(prm, "g", "energy", prefix="params.")
    t_e = quantity(prm, "t_e", "temperature", prefix="params.")
    if min(t_l, t_r, g) < 0 or t_e <= 0:
        raise ConfigError("params: t_l, t_r, g must be >= 0 and t_e > 0")
    lv = lever_arms_from(section(cfg, "lever_arms"))
    grid_cfg = section(cfg, "grid", required=False)
    raw_n = grid_cfg.get("npoints", diagram.DEFAULT_NPOINTS)
    npts = raw_n if isinstance(raw_n, list) else [raw_n, raw_n]
    if len(npts) != 2 or any(isinstance(v, bool) or not isinstance(v, int) or v < 2 for v in npts):
        raise ConfigError("field 'grid.npoints' must be an integer >= 2 (or a pair)")
    half = quantity(grid_cfg, "half_window", "energy", diagram.DEFAULT_HALF_WINDOW, "grid.")
    if half <= 0:
        raise ConfigError("field 'grid.half_window' must be positive")
    v0 = numbers(grid_cfg, "v0", 2, "grid.", default=[0.0, 0.0])
    s = section(cfg, "sensor", required=False)
    try:
        noise = float(s.get("noise_sigma", 0.0))
        frac = float(s.get("noise_fraction", 0.0))
    except (TypeError, ValueError):
        raise ConfigError("fields 'sensor.noise_sigma' / 'sensor.noise_fraction' must be numbers") from None
    if noise < 0 or frac < 0:
        raise ConfigError("field 'sensor.noise_sigma' / 'sensor.noise_fraction' must be >= 0")
    sensor = diagram.SensorModel(
        float(s.get("beta_l", 1.0)), float(s.get("beta_r", 1.0)),
        s.get("sensitivity", ((1.0, 0.0), (0.0, 1.0))), 0.0, float(s.get("background", 0.0)),
    )
    axes = diagram.polarization_axes(lv, half, tuple(npts), v0)
    grid = diagram.synthesize_polarization_diagram(
        t_l, t_r, g, t_e, lv, sensor, axes, v0, seed=args.seed, threads=args.threads
    )
    if frac > 0:
        noise += frac * max(float(np.abs(ch).max()) for ch in grid.channels.values())
    grid = diagram.add_noise(grid, noise, args.seed)
    files = diagram.save_grid(grid, Path(args.out) / cfg.get("output", "diagram"))
    return {"files": [str(f) for f in files], "noise_sigma": noise, "warnings": grid.meta["warnings"]}


def cmd_simulate_honeycomb(cfg, args):
    net = network_from(section(cfg, "network"))
    gates = cfg.get("gates", [1, 2])
    if (not isinstance(gates, list) or len(gates) != 2
            or any(isinstance(v, bool) or v not in (1, 2, 3, 4) for v in gates) or gates[0] == gates[1]):
        raise ConfigError("field 'gates' must be two distinct plungers in 1..4")
    ax = axis_from(section(cfg, "x"), f"V_P{gates[0]}", "x.")
    ay = axis_from(section(cfg, "y"), f"V_P{gates[1]}", "y.")
    b = section(cfg, "base_voltages", required=False)
    base = capnet.SourceVoltages(
        tuple(numbers(b, "v_gate", 4, "base_voltages.", default=[0.0] * 4)),
        tuple(numbers(b, "v_ohmic", 2, "base_voltages.", default=[0.0] * 2)),
    )
    lv = lever_arms_from(cfg["lever_arms"]) if "lever_arms" in cfg else None
    temperature = quantity(cfg, "temperature", "temperature", 0.155)
    n_max = integer(cfg, "n_max", 6)
    if n_max < 0 or temperature < 0:
        raise ConfigError("fields 'n_max' and 'temperature' must be >= 0")
    grid = diagram.synthesize_honeycomb(
        net, tuple(gates), ax, ay, base, lv, n_max, temperature, threads=args.threads
    )
    meta = dict(grid.meta)
    meta["seed"] = args.seed
    if "reference_occupation" in cfg:
        occ = numbers(cfg, "reference_occupation", 2)
        try:
            wins = fitters.honeycomb_windows(grid, tuple(gates), tuple(int(v) for v in occ))
        except ValueError as exc:
            raise ConfigError(f"field 'reference_occupation': {exc}") from None
        meta["windows"] = {k: w.to_dict() for k, w in wins.items()}
        meta["dots"] = list(gates)
    grid = diagram.DiagramGrid(grid.axis_x, grid.axis_y, grid.values, meta)
    files = diagram.save_grid(grid, Path(args.out) / cfg.get("output", "honeycomb"))
    return {"files": [str(f) for f in files]}


def _load_diagram(cfg, base):
    if "diagram" not in cfg:
        raise ConfigError("missing field 'diagram'")
    path = Path(cfg["diagram"])
    if not path.is_absolute():
        path = base / path
    if not path.with_suffix(".json").exists():
        raise ConfigError(f"field 'diagram': {path} not found")
    try:
        return diagram.load_grid(path)
    except diagram.GridFormatError as exc:
        raise ConfigError(f"field 'diagram': {exc}") from None


def _fit_inputs(cfg, grid):
    meta = grid.meta
    if "lever_arms" in cfg:
        lv = lever_arms_from(cfg["lever_arms"])
    elif "lever_arms" in meta and "alpha_l" in meta["lever_arms"]:
        lv = diagram.LeverArmSet.from_detuning(meta["lever_arms"]["alpha_l"], meta["lever_arms"]["alpha_r"])
    else:
        raise ConfigError("missing section 'lever_arms' (not in the diagram metadata either)")
    v0 = numbers(cfg, "v0", 2, default=meta.get("v0", [0.0, 0.0]))
    return lv, v0


def _run_fit(cfg, grid, lines, method):
    out = {}
    if method == "shift-tanh":
        est = fitters.fit_g_from_lines(lines)
        out["g"] = both_units(est.g, est.g_sigma)
        out["records"] = []
        for side, f in (("left", est.left), ("right", est.right)):
            names = ["offset", "g", "eps0", "width"]
            vals = [f.center, f.g, f.eps0, f.width]
            recs = fit_records(names, vals, np.sqrt(np.diag(f.covariance)), f.covariance)
            for r in recs:
                r["line"] = side
            out["records"] += recs
            out[f"low_confidence_{side}"] = f.low_confidence
    else:
        if "t_e" in cfg:
            t_e = quantity(cfg, "t_e", "temperature")
        elif "t_e" in grid.meta.get("params", {}):
            t_e = float(grid.meta["params"]["t_e"])
        else:
            raise ConfigError("missing field 't_e'")
        hf = fitters.fit_hamiltonian_curvature(lines, t_e)
        out["t_e_K"] = t_e
        out["g"] = both_units(hf.g, hf.sigmas[2])
        out["t_l"] = both_units(hf.t_l, hf.sigmas[0])
        out["t_r"] = both_units(hf.t_r, hf.sigmas[1])
        out["upper_bound"] = {"t_l": hf.t_l_upper_bound, "t_r": hf.t_r_upper_bound}
        out["offsets_ueV"] = list(hf.offsets)
        out["records"] = fit_records(
            ["t_l", "t_r", "g"], [hf.t_l, hf.t_r, hf.g], hf.sigmas, hf.covariance,
            {"t_l": {"upper_bound": hf.t_l_upper_bound}, "t_r": {"upper_bound": hf.t_r_upper_bound}},
        )
    return out


def _fit(cfg, args, method):
    grid = _load_diagram(cfg, Path(args.config).parent if args.config else Path("."))
    lv, v0 = _fit_inputs(cfg, grid)
    half = integer(cfg, "half_window_px", 0) or None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            lines = fitters.locate_polarization_lines(grid, half).to_detuning(lv, v0)
        fitted = _run_fit(cfg, grid, lines, method)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise fitters.FitError(str(exc)) from None
    notes = list(lines.left.warnings + lines.right.warnings)
    report = {
        "version": __version__,
        "method": method,
        "diagram": str(cfg["diagram"]),
        "lever_arms": {"alpha_l": lv.detuning_left, "alpha_r": lv.detuning_right, "unit": "ueV/mV"},
        "centers": {"left": len(lines.left), "right": len(lines.right)},
        "warnings": notes,
    }
    report.update(fitted)
    out = dump_json(report, Path(args.out) / cfg.get("output", "fit_report.json"))
    return {"files": [str(out)], "g": report["g"]}


def cmd_fit_g(cfg, args):
    method = cfg.get("method", "shift-tanh")
    if method not in ("shift-tanh", "curvature"):
        raise ConfigError("field 'method' must be 'shift-tanh' or 'curvature'")
    return _fit(cfg, args, method)


def cmd_fit_hamiltonian(cfg, args):
    return _fit(cfg, args, "curvature")


def energies_document(en):
    names = capnet.ENERGY_LABELS
    sig = en.uncertainties
    doc = {
        "kind": "energies",
        "unit": "ueV",
        "version": __version__,
        "energies": dict(zip(names, en.values)),
        "energies_GHz": {k: v / H_UEV_PER_GHZ for k, v in zip(names, en.values)},
    }
    if sig is not None:
        doc["uncertainties"] = dict(zip(names, sig))
        doc["uncertainties_GHz"] = {k: v / H_UEV_PER_GHZ for k, v in zip(names, sig)}
    return doc


def capacitances_document(net):
    names = capnet.CAPACITANCE_LABELS
    doc = {
        "kind": "capacitances",
        "unit": "aF",
        "version": __version__,
        "capacitances": dict(zip(names, net.dot_capacitances)),
    }
    if net.uncertainties is not None:
        doc["uncertainties"] = dict(zip(names, net.uncertainties))
    return doc


def _labelled(doc, key, labels, kind):
    block = section(doc, key)
    vals = [quantity(block, k, kind, prefix=f"{key}.") for k in labels]
    sig = None
    if "uncertainties" in doc:
        unc = section(doc, "uncertainties")
        sig = [quantity(unc, k, kind, 0.0, "uncertainties.") for k in labels]
    return vals, sig


def cmd_extract_energies(cfg, args):
    base = Path(args.config).parent if args.config else Path(".")
    items = cfg.get("honeycombs")
    if not isinstance(items, list) or not items:
        raise ConfigError("field 'honeycombs' must be a non-empty list")
    readings, lv = [], None
    for k, item in enumerate(items):
        grid = _load_diagram(item, base)
        dots = item.get("dots", grid.meta.get("dots"))
        wins = item.get("windows", grid.meta.get("windows"))
        if dots is None or wins is None:
            raise ConfigError(f"honeycombs[{k}]: need 'dots' and 'windows'")
        try:
            windows = {key: fitters.TransitionWindow(tuple(w["x_range"]), tuple(w["y_range"]), w["scan"])
                       for key, w in wins.items()}
            readings.append(fitters.HoneycombReading(grid, tuple(dots), windows))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"honeycombs[{k}].windows: {exc}") from None
        if lv is None and "alpha" in grid.meta.get("lever_arms", {}):
            lv = diagram.LeverArmSet(grid.meta["lever_arms"]["alpha"])
    if "lever_arms" in cfg:
        lv = lever_arms_from(cfg["lever_arms"])
    if lv is None:
        raise ConfigError("missing section 'lever_arms'")
    try:
        en = fitters.extract_energies(readings, lv)
    except capnet.EnergyError as exc:
        raise fitters.FitError(f"extracted energies are inconsistent: {exc}") from None
    doc = energies_document(en)
    out = dump_json(doc, Path(args.out) / cfg.get("output", "energies.json"))
    return {"files": [str(out)]}


def cmd_convert(cfg, args):
    direction = args.direction or cfg.get("direction")
    src = args.input or cfg.get("input")
    if direction not in ("energies-to-capacitances", "capacitances-to-energies"):
        raise ConfigError("field 'direction' must be 'energies-to-capacitances' or 'capacitances-to-energies'")
    if src is None:
        raise ConfigError("missing field 'input'")
    doc = load_json(src)
    if not isinstance(doc, dict):
        raise ConfigError("input must be a JSON object")
    if direction == "energies-to-capacitances":
        vals, sig = _labelled(doc, "energies", capnet.ENERGY_LABELS, "energy")
        try:
            en = capnet.ElectrostaticEnergies(vals[:4], vals[4:], uncertainties=sig)
            result = capacitances_document(capnet.capacitances_from_energies(en))
        except capnet.EnergyError as exc:
            raise ConfigError(f"input violates an energy inequality: {exc}") from None
        name = "capacitances.json"
    else:
        vals, sig = _labelled(doc, "capacitances", capnet.CAPACITANCE_LABELS, "capacitance")
        try:
            net = capnet.CapacitanceNetwork(vals[:4], vals[4:], uncertainties=sig)
        except capnet.NetworkError as exc:
            raise ConfigError(f"input violates a network inequality: {exc}") from None
        result = energies_document(capnet.energies_from_capacitances(net))
        result["g"] = both_units(capnet.coupling_exact(net))
        name = "energies.json"
    out = dump_json(result, Path(args.out) / cfg.get("output", name))
    return {"files": [str(out)]}


def cmd_geometry_sweep(cfg, args):
    gcfg = section(cfg, "geometry", required=False)
    p = "geometry."
    scale = float(cfg.get("scale", 1.0))
    if not scale > 0:
        raise ConfigError("field 'scale' must be positive")
    dist = cfg.get("distances", {"start": 85.0, "stop": 175.0, "num": 10})
    if isinstance(dist, dict):
        num = integer(dist, "num", 10, "distances.")
        if num < 1:
            raise ConfigError("field 'distances.num' must be >= 1")
        d = np.linspace(quantity(dist, "start", "length", prefix="distances."),
                        quantity(dist, "stop", "length", prefix="distances."), num)
    else:
        d = np.array(numbers(cfg, "distances"))
    geom = geometry.DiscPairGeometry(
        quantity(gcfg, "diameter", "length", 80.0, p),
        float(d[0]) if d.size else 80.0,
        quantity(gcfg, "depth", "length", 35.0, p),
        float(gcfg.get("epsilon_r", 13.05)),
        bool(gcfg.get("screened", True)),
    ).scaled(scale)
    panels = integer(cfg, "panels", 600)
    table = geometry.sweep_distance(geom, d * scale, panels)
    stem = Path(args.out) / cfg.get("output", "geometry")
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_suffix(".csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table.to_csv())
    report = {
        "version": __version__,
        "geometry": {"diameter_nm": geom.diameter, "depth_nm": geom.depth,
                     "epsilon_r": geom.epsilon_r, "screened": geom.screened, "panels": panels},
        "table": str(csv_path.name),
        "warnings": [],
    }
    if d.size >= 5:
        pf = geometry.power_law_fit(table.d_nm, table.c_ij_af)
        report["power_law"] = {"exponent": pf.exponent, "sigma": pf.exponent_sigma, "prefactor": pf.prefactor}
    else:
        report["power_law"] = None
        report["warnings"].append(f"{d.size} distance point(s): power-law fit needs at least 5")
    out = dump_json(report, stem.with_suffix(".json"))
    return {"files": [str(csv_path), str(out)], "power_law": report["power_law"],
            "warnings": report["warnings"]}


COMMANDS = {
    "simulate-diagram": cmd_simulate_diagram,
    "simulate-honeycomb": cmd_simulate_honeycomb,
    "fit-g": cmd_fit_g,
    "fit-hamiltonian": cmd_fit_hamiltonian,
    "extract-energies": cmd_extract_energies,
    "convert": cmd_convert,
    "geometry-sweep": cmd_geometry_sweep,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="JSON run config")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="overrides the config seed")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads, 0 = auto")
    parser = argparse.ArgumentParser(prog="qdcoupling", parents=[common], description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "convert":
            p.add_argument("--direction", choices=["energies-to-capacitances", "capacitances-to-energies"])
            p.add_argument("--input", metavar="PATH")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    args.config = getattr(args, "config", None)
    args.out = getattr(args, "out", ".")
    args.threads = getattr(args, "threads", 1)
    for opt in ("direction", "input"):
        setattr(args, opt, getattr(args, opt, None))
    try:
        cfg = load_json(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        seed = getattr(args, "seed", None)
        args.seed = integer(cfg, "seed", 0) if seed is None else seed
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        summary = COMMANDS[args.command](cfg, args)
    except (fitters.FitError, geometry.SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, geometry.GeometryError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
