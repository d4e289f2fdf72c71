"""Forward synthesis of charge-stability diagrams.

Two kinds of diagram are produced:

* polarization diagrams: a 2D slice through the (eps_L, eps_R) plane swept
  with plungers P1 and P4, showing the two shifted polarization lines of the
  coupled charge qubits;
* honeycombs: ground-state (or thermally averaged) occupations of the
  four-dot network swept with two plunger gates, as seen by a charge sensor.

The sensor signal is phenomenological: lock-in transconductance is modelled as
the finite-difference derivative of the relevant charge polarization with
respect to the modulated gate.
"""
from dataclasses import dataclass, field, replace
import json
import math
from pathlib import Path

import numpy as np

from . import capnet, kernels, __version__
from .units import thermal_energy

DEFAULT_NPOINTS = 200
DEFAULT_HALF_WINDOW = 500.0  # ueV


class GridFormatError(ValueError):
    """A serialized diagram could not be parsed."""


@dataclass(frozen=True)
class LeverArmSet:
    """Gate-to-dot lever arms alpha[gate, dot] in ueV/mV (plungers P1..P4).

    ``alpha_sigma`` optionally holds 1-sigma uncertainties of the same shape.
    """

    alpha: tuple
    alpha_sigma: tuple = field(default=None, compare=False)

    def __post_init__(self):
        a = np.asarray(self.alpha, float)
        if a.shape != (4, 4) or not np.all(np.isfinite(a)):
            raise ValueError("alpha must be a finite 4x4 matrix [gate, dot]")
        object.__setattr__(self, "alpha", tuple(map(tuple, a.tolist())))
        if self.alpha_sigma is not None:
            s = np.asarray(self.alpha_sigma, float)
            if s.shape != (4, 4) or np.any(s < 0):
                raise ValueError("alpha_sigma must be a non-negative 4x4 matrix")
            object.__setattr__(self, "alpha_sigma", tuple(map(tuple, s.tolist())))
        if not (self.detuning_left > 0 and self.detuning_right > 0):
            raise ValueError("detuning lever arms must be positive")

    @classmethod
    def from_detuning(cls, alpha_l, alpha_r, sigma_l=None, sigma_r=None):
        """Lever arms with only the P1 -> dot 1 and P4 -> dot 4 entries set."""
        a = np.zeros((4, 4))
        a[0, 0] = alpha_l
        a[3, 3] = alpha_r
        s = None
        if sigma_l is not None or sigma_r is not None:
            s = np.zeros((4, 4))
            s[0, 0] = sigma_l or 0.0
            s[3, 3] = sigma_r or 0.0
        return cls(a, s)

    @classmethod
    def from_network(cls, net):
        """Lever arms implied by the gate capacitances of ``net``."""
        return cls(capnet.gate_lever_arms(net))

    @property
    def matrix(self):
        return np.array(self.alpha)

    @property
    def sigma_matrix(self):
        if self.alpha_sigma is None:
            return np.zeros((4, 4))
        return np.array(self.alpha_sigma)

    @property
    def detuning_left(self):
        """alpha_P1^(eps) = alpha_P1^(1) - alpha_P1^(2)."""
        return self.alpha[0][0] - self.alpha[0][1]

    @property
    def detuning_right(self):
        """alpha_P4^(eps) = alpha_P4^(4) - alpha_P4^(3)."""
        return self.alpha[3][3] - self.alpha[3][2]

    def detuning_sigmas(self):
        s = self.sigma_matrix
        return math.hypot(s[0, 0], s[0, 1]), math.hypot(s[3, 3], s[3, 2])


@dataclass(frozen=True)
class SensorModel:
    """Two charge sensors, each reading mostly one double dot.

    ``sensitivity[s][d]`` couples sensor s (0 = left, 1 = right) to the
    polarization of double dot d. The displayed signal is
    beta_l * left + beta_r * right + background.
    """

    beta_l: float = 1.0
    beta_r: float = 1.0
    sensitivity: tuple = ((1.0, 0.0), (0.0, 1.0))
    noise_sigma: float = 0.0
    background: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.sensitivity, float)
        if s.shape != (2, 2):
            raise ValueError("sensitivity must be 2x2")
        object.__setattr__(self, "sensitivity", tuple(map(tuple, s.tolist())))
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class AxisSpec:
    name: str
    start: float
    stop: float
    npoints: int
    units: str = "mV"

    def __post_init__(self):
        if int(self.npoints) < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.start == self.stop:
            raise ValueError(f"axis {self.name!r} needs distinct finite bounds")
        object.__setattr__(self, "npoints", int(self.npoints))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "stop", float(self.stop))

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.npoints)

    @property
    def step(self):
        return (self.stop - self.start) / (self.npoints - 1)

    def to_dict(self):
        return {
            "name": self.name,
            "start": self.start,
            "stop": self.stop,
            "npoints": self.npoints,
            "units": self.units,
        }


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiagramGrid:
    """A 2D scalar map over two swept axes; ``values[iy, ix]``.

    ``channels`` holds the individual sensor signals when they are known
    (polarization diagrams); ``charge_map`` the ground-state occupations of a
    synthesized honeycomb. Neither is required.
    """

    axis_x: AxisSpec
    axis_y: AxisSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    channels: dict = None
    charge_map: np.ndarray = None

    def __post_init__(self):
        shape = (self.axis_y.npoints, self.axis_x.npoints)
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")
        if self.channels is not None:
            chans = {k: _frozen(v) for k, v in self.channels.items()}
            for k, v in chans.items():
                if v.shape != shape:
                    raise ValueError(f"channel {k!r} shape mismatch")
            object.__setattr__(self, "channels", chans)
        if self.charge_map is not None:
            object.__setattr__(self, "charge_map", _frozen(self.charge_map, np.int64))

    @property
    def x(self):
        return self.axis_x.values

    @property
    def y(self):
        return self.axis_y.values

    def with_values(self, values, channels=None):
        return replace(self, values=values, channels=channels if channels is not None else self.channels)


def _pair(v):
    """(V_P1, V_P4) from a SourceVoltages or a 2-sequence."""
    if isinstance(v, capnet.SourceVoltages):
        return v.v_gate[0], v.v_gate[3]
    a, b = v
    return a, b


def detunings_from_voltages(lv, v, v0=(0.0, 0.0)):
    """(eps_L, eps_R) = detuning lever arm * (V - V0) for plungers P1, P4."""
    v1, v4 = _pair(v)
    r1, r4 = _pair(v0)
    return (
        lv.detuning_left * (np.asarray(v1, float) - r1),
        lv.detuning_right * (np.asarray(v4, float) - r4),
    )


def voltages_from_detunings(lv, eps_l, eps_r, v0=(0.0, 0.0)):
    """Inverse of :func:`detunings_from_voltages`; returns (V_P1, V_P4)."""
    r1, r4 = _pair(v0)
    return (
        np.asarray(eps_l, float) / lv.detuning_left + r1,
        np.asarray(eps_r, float) / lv.detuning_right + r4,
    )


def polarization_axes(lv, half_window=DEFAULT_HALF_WINDOW, npoints=DEFAULT_NPOINTS, v0=(0.0, 0.0)):
    """P1/P4 voltage axes covering +-half_window (ueV) of detuning."""
    if isinstance(npoints, int):
        npoints = (npoints, npoints)
    r1, r4 = _pair(v0)
    w1 = half_window / lv.detuning_left
    w4 = half_window / lv.detuning_right
    return (
        AxisSpec("V_P1", r1 - w1, r1 + w1, npoints[0], "mV"),
        AxisSpec("V_P4", r4 - w4, r4 + w4, npoints[1], "mV"),
    )


def _detuning_axis(axis, alpha, ref):
    """Detuning values along ``axis`` and d(eps)/d(axis)."""
    if axis.units == "ueV":
        return axis.values, 1.0
    if axis.units == "mV":
        return alpha * (axis.values - ref), alpha
    raise ValueError(f"axis units must be 'mV' or 'ueV', got {axis.units!r}")


def synthesize_polarization_diagram(
    t_l, t_r, g, t_e, lv, sensor=None, axes=None, v0=(0.0, 0.0), seed=0, threads=1
):
    """Sensor signal over a P1/P4 sweep of the coupled charge qubits.

    Energies in ueV, ``t_e`` in K. With ``axes=None`` the default 200 x 200
    grid spanning +-500 ueV of detuning is used. Noise (``sensor.noise_sigma``)
    is added per sensor channel from a stream seeded with ``seed``.
    """
    sensor = SensorModel() if sensor is None else sensor
    ax, ay = polarization_axes(lv, v0=v0) if axes is None else axes
    r1, r4 = _pair(v0)
    eps_x, _ = _detuning_axis(ax, lv.detuning_left, r1)
    eps_y, _ = _detuning_axis(ay, lv.detuning_right, r4)
    el, er = np.meshgrid(eps_x, eps_y)
    kt = thermal_energy(t_e)
    p_l, p_r = kernels.polarization_grid(el, er, t_l, t_r, g, kt, threads=threads)

    x, y = ax.values, ay.values
    dl_dx = np.gradient(p_l, x, axis=1)
    dr_dx = np.gradient(p_r, x, axis=1)
    dl_dy = np.gradient(p_l, y, axis=0)
    dr_dy = np.gradient(p_r, y, axis=0)
    s = sensor.sensitivity
    left = s[0][0] * dl_dx + s[0][1] * dr_dx
    right = s[1][1] * dr_dy + s[1][0] * dl_dy

    warnings = []
    pixel = max(abs(eps_x[1] - eps_x[0]), abs(eps_y[1] - eps_y[0]))
    if pixel > min(t_l, t_r) / 4:
        warnings.append(
            f"pixel size {pixel:.3g} ueV exceeds t/4 = {min(t_l, t_r) / 4:.3g} ueV; "
            "tunnel coupling not resolved"
        )
    meta = {
        "kind": "polarization",
        "params": {"t_l": t_l, "t_r": t_r, "g": g, "t_e": t_e},
        "units": {"t_l": "ueV", "t_r": "ueV", "g": "ueV", "t_e": "K"},
        "lever_arms": {"alpha_l": lv.detuning_left, "alpha_r": lv.detuning_right},
        "v0": [r1, r4],
        "sensor": {
            "beta_l": sensor.beta_l,
            "beta_r": sensor.beta_r,
            "sensitivity": [list(r) for r in sensor.sensitivity],
            "noise_sigma": sensor.noise_sigma,
            "background": sensor.background,
        },
        "channel_weights": {"left": sensor.beta_l, "right": sensor.beta_r},
        "background": sensor.background,
        "seed": seed,
        "warnings": warnings,
    }
    values = sensor.beta_l * left + sensor.beta_r * right + sensor.background
    grid = DiagramGrid(ax, ay, values, meta, channels={"left": left, "right": right})
    return add_noise(grid, sensor.noise_sigma, seed)


def synthesize_honeycomb(
    net,
    gates,
    axis_x,
    axis_y,
    base=None,
    lv=None,
    n_max=6,
    temperature=0.155,
    sensor_weights=(1.0, 1.0, 1.0, 1.0),
    threads=1,
):
    """Charge-sensor map of the four-dot network swept by two plungers.

    Args:
        net: capacitance network (charging energies and reservoir terms).
        gates: 1-based plunger numbers (gx, gy) swept along x and y.
        axis_x, axis_y: voltage axes (mV) for those plungers.
        base: voltages of the remaining gates and reservoirs.
        lv: gate-to-dot lever arms; defaults to those implied by ``net``.
        temperature: broadening temperature (K) of the occupations; 0 gives
            sharp ground-state steps.
        sensor_weights: coupling of the sensor to each dot's charge.

    The signal is d(S)/dV_x + d(S)/dV_y with S = sum_i w_i <N_i>, so charge
    transitions appear as positive peaks.
    """
    base = capnet.SourceVoltages() if base is None else base
    lv = LeverArmSet.from_network(net) if lv is None else lv
    gx, gy = gates
    if not (1 <= gx <= 4 and 1 <= gy <= 4) or gx == gy:
        raise ValueError("gates must be two distinct plungers in 1..4")
    x, y = axis_x.values, axis_y.values
    xx, yy = np.meshgrid(x, y)
    v = np.broadcast_to(np.array(base.v_gate, float), xx.shape + (4,)).copy()
    v[..., gx - 1] = xx
    v[..., gy - 1] = yy
    lin = capnet.gate_linear_terms(net, lv.matrix, v.reshape(-1, 4), base.v_ohmic)
    kt = thermal_energy(temperature) if temperature > 0 else 0.0
    k = capnet.inverse_matrix(net)
    ground, mean = kernels.occupation_grid(k, capnet.E0, lin, n_max, kt, threads=threads)
    shape = xx.shape
    sensed = (mean @ np.asarray(sensor_weights, float)).reshape(shape)
    values = np.gradient(sensed, x, axis=1) + np.gradient(sensed, y, axis=0)
    meta = {
        "kind": "honeycomb",
        "gates": [gx, gy],
        "temperature": temperature,
        "n_max": n_max,
        "network": {
            "c_total": list(net.c_total),
            "c_inter": list(net.c_inter),
            "c_gate": list(net.c_gate),
            "c_ohmic": list(net.c_ohmic),
        },
        "lever_arms": {"alpha": [list(r) for r in lv.alpha]},
        "base_voltages": {"v_gate": list(base.v_gate), "v_ohmic": list(base.v_ohmic)},
        "sensor_weights": list(sensor_weights),
        "warnings": [],
    }
    return DiagramGrid(axis_x, axis_y, values, meta, charge_map=ground.reshape(shape + (4,)))


def add_noise(grid, sigma, seed):
    """Add i.i.d. Gaussian noise, deterministic for a given seed.

    When the grid carries sensor channels the noise is drawn per channel (in
    sorted channel order, each row-major) and the displayed values are
    recombined from the noisy channels; otherwise it is added to ``values``.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return grid
    rng = np.random.default_rng(seed)
    shape = grid.values.shape
    meta = dict(grid.meta)
    meta["noise"] = {"sigma": sigma, "seed": seed}
    if grid.channels:
        weights = grid.meta.get("channel_weights", {})
        noisy = {}
        for name in sorted(grid.channels):
            noisy[name] = grid.channels[name] + sigma * rng.standard_normal(shape)
        values = sum(weights.get(k, 1.0) * v for k, v in noisy.items()) + grid.meta.get("background", 0.0)
        return replace(grid, values=values, channels=noisy, meta=meta)
    return replace(grid, values=grid.values + sigma * rng.standard_normal(shape), meta=meta)


# ---------------------------------------------------------------- file format


def _write_matrix(path, header, matrix):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(repr(float(h)) for h in header) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_matrix(path, x, ny):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise GridFormatError(f"{path}: not UTF-8 text") from exc
    if len(lines) != ny + 1:
        raise GridFormatError(f"{path}: expected {ny + 1} lines, found {len(lines)}")
    try:
        header = np.array([float(t) for t in lines[0].split(",")])
        rows = [[float(t) for t in line.split(",")] for line in lines[1:]]
    except ValueError as exc:
        raise GridFormatError(f"{path}: {exc}") from exc
    if header.shape != x.shape or not np.allclose(header, x, rtol=1e-12, atol=0):
        raise GridFormatError(f"{path}: header does not match the x axis")
    if any(len(r) != x.shape[0] for r in rows):
        raise GridFormatError(f"{path}: ragged row")
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise GridFormatError(f"{path}: non-finite value")
    return m


def save_grid(grid, stem):
    """Write ``stem.csv`` (+ one CSV per channel) and the ``stem.json`` sidecar.

    Returns the list of files written.
    """
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    files = [stem.with_suffix(".csv")]
    _write_matrix(files[0], grid.x, grid.values)
    channels = {}
    for name in sorted(grid.channels or {}):
        path = stem.with_name(f"{stem.name}.{name}.csv")
        _write_matrix(path, grid.x, grid.channels[name])
        channels[name] = path.name
        files.append(path)
    sidecar = {
        "version": __version__,
        "axes": {"x": grid.axis_x.to_dict(), "y": grid.axis_y.to_dict()},
        "units": {"x": grid.axis_x.units, "y": grid.axis_y.units, "values": "arb."},
        "params": grid.meta.get("params", {}),
        "seed": grid.meta.get("seed", grid.meta.get("noise", {}).get("seed", 0)),
        "values": files[0].name,
        "channels": channels,
        "meta": grid.meta,
    }
    side = stem.with_suffix(".json")
    with open(side, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append(side)
    return files


def load_grid(path):
    """Read a diagram written by :func:`save_grid` (sidecar or CSV path)."""
    path = Path(path)
    side = path.with_suffix(".json") if path.suffix != ".json" else path
    try:
        with open(side, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"{side}: {exc}") from exc
    try:
        ax = AxisSpec(**doc["axes"]["x"])
        ay = AxisSpec(**doc["axes"]["y"])
        values = _read_matrix(side.parent / doc["values"], ax.values, ay.npoints)
        channels = {
            name: _read_matrix(side.parent / fname, ax.values, ay.npoints)
            for name, fname in doc.get("channels", {}).items()
        }
    except (KeyError, TypeError) as exc:
        raise GridFormatError(f"{side}: malformed sidecar ({exc})") from exc
    return DiagramGrid(ax, ay, values, doc.get("meta", {}), channels=channels or None)
