"""Parameter extraction from stability diagrams.

The pipeline runs from single linecuts up to full model parameters:

1. :func:`fit_linecut` fits the derivative of a tanh to one linecut.
2. :func:`locate_polarization_lines` tracks line centers row by row (left
   line) and column by column (right line).
3. :func:`fit_shift_tanh` reads g off the tanh-shaped shift of the centers;
   :func:`fit_hamiltonian_curvature` fits the zero-polarization curves of the
   full Hamiltonian and yields t_L, t_R and g together.
4. :func:`fit_thermal_broadening` gets lever arms and electron temperature
   from linewidths measured at several fridge temperatures.
5. :func:`fit_transition_line` and :func:`extract_energies` turn honeycomb
   transitions into charging and coupling energies.

All fits share :func:`least_squares`.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import optimize

from . import capnet
from .hamiltonian import polarization_line_location
from .units import KB_UEV_PER_K, thermal_energy, uev_to_ghz

MAD_SCALE = 1.4826  # MAD -> Gaussian sigma


class FitError(RuntimeError):
    """A fit could not produce a result. ``best`` holds the last iterate, if any."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# ------------------------------------------------------------------ engine


@dataclass(frozen=True)
class LsqResult:
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    dof: int
    nfev: int
    singular: bool
    converged: bool
    message: str = ""

    @property
    def sigmas(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def reduced_chi2(self):
        return self.residual_norm**2 / self.dof if self.dof > 0 else float("nan")


def _covariance(jac, scale):
    """(J^T J)^-1 * scale via SVD.

    A rank-deficient Jacobian is flagged; parameters with a component along
    a null direction get infinite variance.
    """
    _, s, vt = np.linalg.svd(np.atleast_2d(jac), full_matrices=False)
    keep = s > s[0] * 1e-10 if s.size and s[0] > 0 else np.zeros(s.shape, bool)
    singular = not bool(np.all(keep))
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0) ** 2, 0.0)
    cov = (vt.T * inv) @ vt * scale
    for row in vt[~keep]:
        free = np.abs(row) > 1e-8
        cov[np.ix_(free, free)] = np.inf
    return 0.5 * (cov + cov.T), singular


def least_squares(model, p0, x, y, sigma=None, bounds=None, max_iter=500, absolute_sigma=False,
                  jac=None):
    """Nonlinear least squares of ``model(x, p)`` against ``y``.

    Trust-region reflective steps; the Jacobian is ``jac(x, p)`` (shape
    (y.size, p.size)) when given, else a finite difference. Stops
    when the relative cost change or the relative step falls below 1e-10.

    Args:
        model: callable ``model(x, p) -> prediction`` with the shape of y.
        p0: initial parameters, inside ``bounds``.
        sigma: per-point standard deviations (default 1).
        bounds: (lower, upper) sequences; None for unbounded.
        absolute_sigma: if False the covariance is scaled by the reduced
            chi-square (the residual variance).

    Raises:
        ValueError: fewer data than parameters, or p0 outside the bounds.
        FitError: no convergence in ``max_iter`` iterations (``best`` set).
    """
    p0 = np.asarray(p0, float)
    y = np.asarray(y, float)
    sigma = np.ones_like(y) if sigma is None else np.broadcast_to(np.asarray(sigma, float), y.shape)
    if y.size < p0.size:
        raise ValueError(f"{y.size} data points cannot constrain {p0.size} parameters")
    if not np.all(np.isfinite(p0)):
        raise ValueError("initial parameters must be finite")
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    lo, hi = (np.full(p0.size, -np.inf), np.full(p0.size, np.inf)) if bounds is None else (
        np.asarray(bounds[0], float), np.asarray(bounds[1], float))
    if np.any(p0 < lo) or np.any(p0 > hi):
        raise ValueError("initial parameters outside bounds")

    def resid(p):
        return ((np.asarray(model(x, p), float) - y) / sigma).ravel()

    if jac is None:
        jacobian = "3-point"
    else:
        def jacobian(p):
            return np.asarray(jac(x, p), float).reshape(y.size, p.size) / sigma.reshape(-1, 1)

    res = optimize.least_squares(
        resid, p0, bounds=(lo, hi), method="trf", jac=jacobian,
        ftol=1e-10, xtol=1e-10, gtol=1e-12, max_nfev=max_iter, x_scale="jac",
    )
    dof = y.size - p0.size
    norm = float(np.linalg.norm(res.fun))
    scale = 1.0 if absolute_sigma else (norm**2 / dof if dof > 0 else 1.0)
    cov, singular = _covariance(res.jac, scale)
    out = LsqResult(res.x, cov, norm, dof, int(res.nfev), singular, res.status > 0, res.message)
    if res.status == 0:
        raise FitError(f"no convergence after {max_iter} iterations", best=out)
    return out


# ---------------------------------------------------------------- linecuts


def sech2(z):
    """sech^2 without overflow."""
    u = np.exp(-2.0 * np.abs(z))
    return 4.0 * u / (1.0 + u) ** 2


def tanh_derivative_model(x, p):
    """A * d/dx tanh((x - x0)/w) + B for p = (x0, w, A, B)."""
    x0, w, a, b = p
    return a / w * sech2((x - x0) / w) + b


def tanh_derivative_jacobian(x, p):
    """Partial derivatives of :func:`tanh_derivative_model` w.r.t. p."""
    x0, w, a, _ = p
    z = (x - x0) / w
    s = sech2(z)
    t = np.tanh(z)
    return np.column_stack([
        2.0 * a * s * t / w**2,
        a * s * (2.0 * z * t - 1.0) / w**2,
        s / w,
        np.ones_like(z),
    ])


@dataclass(frozen=True)
class TanhFit:
    """Fit of A * d/dx tanh((x - center)/width) + offset to a linecut."""

    center: float
    width: float
    amplitude: float
    offset: float
    covariance: np.ndarray
    residual_norm: float = 0.0
    singular: bool = False

    @property
    def center_sigma(self):
        return math.sqrt(max(self.covariance[0, 0], 0.0))

    @property
    def width_sigma(self):
        return math.sqrt(max(self.covariance[1, 1], 0.0))


def noise_floor(y):
    """Robust white-noise level of a sampled curve.

    Median absolute deviation of the first differences, scaled to a Gaussian
    sigma. Differencing removes the smooth signal, so a broad peak filling
    most of the cut does not inflate the estimate.
    """
    d = np.diff(np.asarray(y, float))
    if d.size == 0:
        return 0.0
    return MAD_SCALE * float(np.median(np.abs(d - np.median(d)))) / math.sqrt(2.0)


def fit_linecut(x, y, sigma=None):
    """Fit one peak shaped like the derivative of a tanh.

    Either polarity is accepted; the dominant extremum sets the sign of A.

    Raises:
        ValueError: fewer than 8 points.
        FitError: no extremum stands 3 noise sigmas above the median.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1D arrays of equal length")
    if x.size < 8:
        raise ValueError("a linecut needs at least 8 points")
    base = float(np.median(y))
    dev = y - base
    k = int(np.argmax(np.abs(dev)))
    height = dev[k]
    if not abs(height) > 3.0 * noise_floor(y):
        raise FitError("no peak above the noise floor")
    span = float(x.max() - x.min())
    dx = span / (x.size - 1)
    above = np.count_nonzero(np.sign(height) * dev > 0.5 * abs(height))
    w0 = max(above * dx / 1.7627, dx)
    p0 = [x[k], w0, height * w0, base]
    lo = [x.min(), dx / 50, -np.inf, -np.inf]
    hi = [x.max(), 2 * span, np.inf, np.inf]
    r = least_squares(tanh_derivative_model, p0, x, y, sigma=sigma, bounds=(lo, hi),
                      jac=tanh_derivative_jacobian)
    x0, w, a, b = r.params
    return TanhFit(float(x0), float(w), float(a), float(b), r.covariance, r.residual_norm, r.singular)


# ------------------------------------------------------- polarization lines


@dataclass(frozen=True)
class LineTrace:
    """Centers of one polarization line.

    For the left line ``sweep`` holds the P4 (right) coordinate of each row
    and ``centers`` the fitted P1 position; the right line is the transpose.
    """

    side: str
    sweep: np.ndarray
    centers: np.ndarray
    sigmas: np.ndarray
    units: str
    window: float  # full tracking window width (axis units of centers)
    resolution: float  # pixel size along the fitted axis
    widths: np.ndarray = None
    warnings: tuple = ()

    def __len__(self):
        return len(self.centers)

    def to_detuning(self, lv, v0=(0.0, 0.0)):
        """Same trace with both coordinates expressed in detuning (ueV)."""
        if self.units == "ueV":
            return self
        from .diagram import _pair

        r1, r4 = _pair(v0)
        al, ar = lv.detuning_left, lv.detuning_right
        if self.side == "left":
            own, oth, ro, rt = al, ar, r1, r4
        else:
            own, oth, ro, rt = ar, al, r4, r1
        return LineTrace(
            self.side,
            oth * (self.sweep - rt),
            own * (self.centers - ro),
            own * self.sigmas,
            "ueV",
            own * self.window,
            own * self.resolution,
            None if self.widths is None else own * self.widths,
            self.warnings,
        )

    def mirrored(self):
        """Relabel as the opposite line (for mirror-symmetry checks)."""
        side = "right" if self.side == "left" else "left"
        return LineTrace(side, self.sweep, self.centers, self.sigmas, self.units,
                         self.window, self.resolution, self.widths, self.warnings)


@dataclass(frozen=True)
class PolarizationLines:
    left: LineTrace
    right: LineTrace

    def to_detuning(self, lv, v0=(0.0, 0.0)):
        return PolarizationLines(self.left.to_detuning(lv, v0), self.right.to_detuning(lv, v0))


MAX_MISSES = 3


def _trace(sweep, pos, data, side, half_window, units):
    """Track one line through ``data[k, :]`` (k indexes ``sweep``).

    The starting center comes from the average of the first few linecuts and
    each window is centred on the median of the last five accepted centers.
    With ``half_window=None`` the window spans the larger of a tenth of the
    axis (at least 8 pixels) and four widths of the starting peak.
    A linecut whose fit fails, whose width is below half a pixel (a noise
    spike) or whose center jumps by more than the half window is skipped;
    ``MAX_MISSES`` consecutive misses end the trace.
    """
    n = pos.size
    step = pos[1] - pos[0]
    dx = abs(step)
    sweep_out, centers, sigmas, widths, notes = [], [], [], [], []
    try:
        start = fit_linecut(pos, data[: min(5, data.shape[0])].mean(axis=0))
    except (FitError, ValueError) as exc:
        raise FitError(f"{side} line not found: {exc}") from None
    prev = start.center
    if half_window is None:
        half_window = max(8, n // 10, int(math.ceil(4 * start.width / dx)))
    misses = 0
    for k in range(data.shape[0]):
        c = int(round((prev - pos[0]) / step))
        lo, hi = max(0, c - half_window), min(n, c + half_window + 1)
        try:
            fit = fit_linecut(pos[lo:hi], data[k, lo:hi])
            jumped = abs(fit.center - prev) > half_window * dx or fit.width < 0.5 * dx
        except (FitError, ValueError):
            fit, jumped = None, True
        if jumped:
            misses += 1
            if misses >= MAX_MISSES:
                notes.append(f"{side} line lost at {sweep[k]:.6g}; trace truncated")
                break
            continue
        misses = 0
        sweep_out.append(sweep[k])
        centers.append(fit.center)
        sigmas.append(max(fit.center_sigma, 1e-3 * dx))
        widths.append(fit.width)
        prev = float(np.median(centers[-5:]))
    if notes:
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=3)
    return LineTrace(
        side, np.array(sweep_out), np.array(centers), np.array(sigmas), units,
        2 * half_window * dx, dx, np.array(widths), tuple(notes),
    )


def locate_polarization_lines(grid, half_window=None):
    """Centers of the left (per row) and right (per column) polarization lines.

    Uses the per-sensor channels when the grid carries them, otherwise the
    displayed signal. Each linecut after the first is restricted to
    ``half_window`` pixels around the previous center (by default sized from
    the axis length and the starting linewidth); linecuts that jump further
    are skipped and repeated misses end the trace with a warning.
    """
    chans = grid.channels or {}
    left = chans.get("left", grid.values)
    right = chans.get("right", grid.values)
    tl = _trace(grid.y, grid.x, left, "left", half_window, grid.axis_x.units)
    tr = _trace(grid.x, grid.y, right.T, "right", half_window, grid.axis_y.units)
    return PolarizationLines(tl, tr)


# ------------------------------------------------------------- shift curve


def shift_tanh_model(x, p):
    """c + (g/2) tanh((x - x0)/w) for p = (c, g, x0, w)."""
    c, g, x0, w = p
    return c + 0.5 * g * np.tanh((x - x0) / w)


@dataclass(frozen=True)
class ShiftCurveFit:
    """Tanh fit of line centers versus the opposite detuning (ueV)."""

    g: float
    g_sigma: float
    center: float
    eps0: float
    width: float
    direction: int
    covariance: np.ndarray
    low_confidence: bool

    @property
    def g_ghz(self):
        return uev_to_ghz(self.g)

    @property
    def g_sigma_ghz(self):
        return uev_to_ghz(self.g_sigma)


def fit_shift_tanh(eps_other, centers, sigma=None):
    """Fit the shift of line centers to c + (g/2) tanh((eps - eps0)/w).

    g is the full peak-to-peak shift (>= 0). The shift may rise or fall
    along the sweep; ``direction`` records which.
    """
    x = np.asarray(eps_other, float)
    y = np.asarray(centers, float)
    if x.size < 8:
        raise ValueError("need at least 8 center points")
    order = np.argsort(x)
    x, y = x[order], y[order]
    sigma = None if sigma is None else np.asarray(sigma, float)[order]
    q = max(2, x.size // 10)
    head, tail = float(np.mean(y[:q])), float(np.mean(y[-q:]))
    direction = 1 if tail >= head else -1
    span = float(x[-1] - x[0])
    mid = 0.5 * (head + tail)
    cross = int(np.argmin(np.abs(y - mid)))

    def model(xx, p):
        c, g, x0, w = p
        return shift_tanh_model(xx, (c, g, x0, direction * w))

    p0 = [mid, abs(tail - head), x[cross], span / 10]
    lo = [-np.inf, 0.0, x[0], span / (50 * x.size)]
    hi = [np.inf, np.inf, x[-1], 10 * span]
    r = least_squares(model, p0, x, y, sigma=sigma, bounds=(lo, hi))
    c, g, x0, w = r.params
    g_sigma = float(r.sigmas[1])
    return ShiftCurveFit(float(g), g_sigma, float(c), float(x0), float(w), direction,
                         r.covariance, bool(g < 2 * g_sigma))


@dataclass(frozen=True)
class CouplingEstimate:
    left: ShiftCurveFit
    right: ShiftCurveFit
    g: float
    g_sigma: float

    @property
    def g_ghz(self):
        return uev_to_ghz(self.g)

    @property
    def g_sigma_ghz(self):
        return uev_to_ghz(self.g_sigma)


def fit_g_from_lines(lines):
    """Shift-curve g of both lines (detuning units) and their weighted mean."""
    fits = [fit_shift_tanh(t.sweep, t.centers, t.sigmas) for t in (lines.left, lines.right)]
    w = np.array([1.0 / max(f.g_sigma, 1e-12) ** 2 for f in fits])
    g = float(np.dot(w, [f.g for f in fits]) / w.sum())
    return CouplingEstimate(fits[0], fits[1], g, float(1.0 / math.sqrt(w.sum())))


# ------------------------------------------------------- curvature (full H)


@dataclass(frozen=True)
class HamiltonianFit:
    """t_L, t_R, g (ueV) from the zero-polarization curves of both lines."""

    t_l: float
    t_r: float
    g: float
    sigmas: tuple
    covariance: np.ndarray
    residual_norm: float
    offsets: tuple = (0.0, 0.0)
    t_l_upper_bound: bool = False
    t_r_upper_bound: bool = False
    singular: bool = False

    @property
    def values_ghz(self):
        return tuple(uev_to_ghz(v) for v in (self.t_l, self.t_r, self.g))

    @property
    def sigmas_ghz(self):
        return tuple(uev_to_ghz(v) for v in self.sigmas)


def _root_curves(t_l, t_r, g, t_e, eps_r_pts, eps_l_pts):
    left = polarization_line_location(eps_r_pts, t_l, t_r, g, t_e, side="left", tol=1e-9)
    right = polarization_line_location(eps_l_pts, t_l, t_r, g, t_e, side="right", tol=1e-9)
    return left, right


def fit_hamiltonian_curvature(lines, t_e, p0=None, fit_offsets=True):
    """Fit both polarization-line center traces with the full Hamiltonian.

    Args:
        lines: :class:`PolarizationLines` in detuning units (ueV).
        t_e: electron temperature (K), fixed.
        p0: optional initial (t_L, t_R, g). By default g is the plateau
            difference of the left trace and t is 10% of the tracking window.
        fit_offsets: also fit a constant detuning offset per double dot,
            needed when the detuning origin is not known exactly.

    Only the line positions enter the fit, not their widths. A tunnel
    coupling below the pixel size or below twice its own uncertainty is
    flagged as an upper bound.
    """
    tl, tr = lines.left, lines.right
    if tl.units != "ueV" or tr.units != "ueV":
        raise ValueError("convert the traces to detuning before fitting")
    if len(tl) < 4 or len(tr) < 4:
        raise ValueError("each trace needs at least 4 centers")
    nl = len(tl)
    y = np.concatenate([tl.centers, tr.centers])
    sig = np.concatenate([tl.sigmas, tr.sigmas])
    if p0 is None:
        q = max(2, nl // 10)
        g0 = abs(np.mean(tl.centers[-q:]) - np.mean(tl.centers[:q]))
        order = np.argsort(tl.sweep)
        g0 = abs(np.mean(tl.centers[order][-q:]) - np.mean(tl.centers[order][:q])) or g0
        t0 = 0.1 * 0.5 * (tl.window + tr.window)
        p0 = (t0, t0, max(g0, 1e-3))
    p0 = list(p0) + ([0.0, 0.0] if fit_offsets else [])

    def model(_, p):
        t_l, t_r, g = p[:3]
        dl, dr = (p[3], p[4]) if fit_offsets else (0.0, 0.0)
        left, right = _root_curves(t_l, t_r, g, t_e, tl.sweep - dr, tr.sweep - dl)
        return np.concatenate([left + dl, right + dr])

    lo = [0.0, 0.0, 0.0] + ([-np.inf, -np.inf] if fit_offsets else [])
    r = least_squares(model, p0, None, y, sigma=sig, bounds=(lo, [np.inf] * len(p0)))
    t_l, t_r, g = (float(v) for v in r.params[:3])
    s = r.sigmas
    res_l = min(tl.resolution, tr.resolution)
    return HamiltonianFit(
        t_l, t_r, g,
        (float(s[0]), float(s[1]), float(s[2])),
        r.covariance[:3, :3],
        r.residual_norm,
        (float(r.params[3]), float(r.params[4])) if fit_offsets else (0.0, 0.0),
        bool(t_l < res_l or t_l < 2 * s[0]),
        bool(t_r < res_l or t_r < 2 * s[1]),
        r.singular,
    )


# ------------------------------------------------- lever arms, temperature


@dataclass(frozen=True)
class LeverArmFit:
    """Detuning lever arms (ueV/mV) and electron temperature (K)."""

    alpha_l: float
    alpha_r: float
    alpha_l_sigma: float
    alpha_r_sigma: float
    t_e: float
    t_e_sigma: float
    covariance: np.ndarray

    @property
    def kt_e(self):
        """k_B * T_e in ueV."""
        return thermal_energy(self.t_e)

    @property
    def kt_e_ghz(self):
        return uev_to_ghz(self.kt_e)


def thermal_width(temperature, alpha, t_e):
    """Linewidth (mV) in the tanh convention: 2 k_B sqrt(T^2 + T_e^2) / alpha."""
    return 2.0 * KB_UEV_PER_K * np.sqrt(np.asarray(temperature, float) ** 2 + t_e**2) / alpha


def fit_thermal_broadening(temps_l, widths_l, temps_r, widths_r, shift_ratio,
                           sigma_l=None, sigma_r=None):
    """Joint fit of linewidth versus fridge temperature for both double dots.

    The electron temperature is shared and alpha_R = alpha_L * shift_ratio,
    where ``shift_ratio`` is the voltage shift of the left line divided by
    that of the right line (the same g seen through each lever arm).

    Raises:
        ValueError: fewer than 4 temperatures per double dot or a
            non-positive shift ratio.
        FitError: a width that does not grow with temperature.
    """
    tl, wl, trr, wr = (np.asarray(a, float) for a in (temps_l, widths_l, temps_r, widths_r))
    if tl.size < 4 or trr.size < 4:
        raise ValueError("need at least 4 temperature points per double dot")
    if tl.shape != wl.shape or trr.shape != wr.shape:
        raise ValueError("temperatures and widths must pair up")
    if not shift_ratio > 0:
        raise ValueError("shift ratio must be positive")
    for t, w, name in ((tl, wl, "left"), (trr, wr, "right")):
        if np.polyfit(t, w, 1)[0] <= 0:
            raise FitError(f"{name} widths do not increase with temperature")
    # quadrature model is linear in T^2 for w^2: slope (2kB/alpha)^2, intercept slope*T_e^2
    slope, icpt = np.polyfit(tl**2, wl**2, 1)
    a0 = 2 * KB_UEV_PER_K / math.sqrt(max(slope, 1e-30))
    te0 = math.sqrt(icpt / slope) if icpt > 0 and slope > 0 else 0.05
    x = np.concatenate([tl, trr])
    left = np.arange(x.size) < tl.size
    y = np.concatenate([wl, wr])
    sig = None
    if sigma_l is not None or sigma_r is not None:
        sig = np.concatenate([np.broadcast_to(sigma_l if sigma_l is not None else 1.0, tl.shape),
                              np.broadcast_to(sigma_r if sigma_r is not None else 1.0, trr.shape)])

    def model(xx, p):
        a, te = p
        return np.where(left, thermal_width(xx, a, te), thermal_width(xx, a * shift_ratio, te))

    r = least_squares(model, [a0, te0], x, y, sigma=sig, bounds=([1e-12, 1e-9], [np.inf, np.inf]))
    a, te = r.params
    sa, ste = r.sigmas
    return LeverArmFit(float(a), float(a * shift_ratio), float(sa), float(sa * shift_ratio),
                       float(te), float(ste), r.covariance)


# -------------------------------------------------------- transition lines


@dataclass(frozen=True)
class TransitionWindow:
    """Rectangular region around one charge transition.

    ``scan`` names the axis along which linecuts are taken: "x" for steep
    lines (one peak per row), "y" for shallow ones (one peak per column).
    """

    x_range: tuple
    y_range: tuple
    scan: str = "x"

    def __post_init__(self):
        if self.scan not in ("x", "y"):
            raise ValueError("scan must be 'x' or 'y'")
        for r in (self.x_range, self.y_range):
            if not r[0] < r[1]:
                raise ValueError("window ranges must be increasing")

    def to_dict(self):
        return {"x_range": list(self.x_range), "y_range": list(self.y_range), "scan": self.scan}


@dataclass(frozen=True)
class TransitionLine:
    """Line position = intercept + slope * sweep, in the scan axis coordinate.

    For ``scan="x"`` this is x(y); for ``scan="y"`` it is y(x).
    """

    slope: float
    intercept: float
    covariance: np.ndarray
    scan: str
    n_peaks: int
    residual: float = 0.0

    def position(self, at):
        return self.intercept + self.slope * at

    def position_sigma(self, at):
        j = np.array([1.0, at])
        return math.sqrt(max(float(j @ self.covariance @ j), 0.0))


def _peak_positions(pos, rows):
    """Per-linecut maximum above a 3-sigma MAD floor, refined by a parabola."""
    found_sweep, found_pos = [], []
    for k, row in enumerate(rows):
        base = np.median(row)
        j = int(np.argmax(row))
        if not row[j] - base > 3.0 * noise_floor(row):
            continue
        if 0 < j < row.size - 1:
            a, b, c = row[j - 1], row[j], row[j + 1]
            den = a - 2 * b + c
            off = 0.5 * (a - c) / den if den < 0 else 0.0
        else:
            off = 0.0
        found_sweep.append(k)
        found_pos.append(pos[j] + off * (pos[1] - pos[0]))
    return np.array(found_sweep, int), np.array(found_pos)


def fit_transition_line(grid, window):
    """Fit a straight line to the peak locations inside ``window``.

    Raises:
        FitError: fewer than 5 linecuts show a peak.
    """
    x, y = grid.x, grid.y
    ix = np.flatnonzero((x >= window.x_range[0]) & (x <= window.x_range[1]))
    iy = np.flatnonzero((y >= window.y_range[0]) & (y <= window.y_range[1]))
    if ix.size < 3 or iy.size < 3:
        raise FitError("window holds too few pixels")
    sub = grid.values[np.ix_(iy, ix)]
    if window.scan == "x":
        idx, peaks = _peak_positions(x[ix], sub)
        sweep = y[iy][idx]
    else:
        idx, peaks = _peak_positions(y[iy], sub.T)
        sweep = x[ix][idx]
    if peaks.size < 5:
        raise FitError(f"only {peaks.size} peaks found in window (need 5)")
    design = np.column_stack([np.ones_like(sweep), sweep])
    coef, *_ = np.linalg.lstsq(design, peaks, rcond=None)
    resid = peaks - design @ coef
    dof = peaks.size - 2
    s2 = float(resid @ resid) / dof
    # quantization floor: a peak is never located better than ~pixel/sqrt(12)
    step = abs(x[1] - x[0]) if window.scan == "x" else abs(y[1] - y[0])
    s2 = max(s2, step**2 / 12 / 100)
    cov = s2 * np.linalg.inv(design.T @ design)
    return TransitionLine(float(coef[1]), float(coef[0]), cov, window.scan, int(peaks.size),
                          float(np.sqrt(np.mean(resid**2))))


# ------------------------------------------------------ energy extraction

WINDOW_KEYS = ("i_low", "i_high", "i_shifted", "j_low", "j_high", "j_shifted")


@dataclass(frozen=True)
class HoneycombReading:
    """One honeycomb of dots (i, j) with x swept by plunger i, y by plunger j.

    Windows (all :class:`TransitionWindow`):
      i_low / i_high: consecutive dot-i transitions at the same N_j;
      i_shifted: the i_low transition one electron higher in N_j;
      j_low / j_high / j_shifted: the same for dot j.
    """

    grid: object
    dots: tuple
    windows: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [k for k in WINDOW_KEYS if k not in self.windows]
        if missing:
            raise ValueError(f"missing windows: {missing}")
        i, j = self.dots
        if abs(i - j) != 1 or not (1 <= min(i, j) and max(i, j) <= 4):
            raise ValueError("dots must be nearest neighbours in 1..4")


def _separation(a, b, at):
    """(b - a) evaluated at ``at`` with its sigma."""
    d = b.position(at) - a.position(at)
    s = math.hypot(a.position_sigma(at), b.position_sigma(at))
    return d, s


def _energy(alpha, alpha_sigma, dv, dv_sigma):
    e = alpha * dv
    return e, math.hypot(alpha_sigma * dv, alpha * dv_sigma)


def read_honeycomb(reading, lv):
    """E_Ci, E_Cj and both readings of E_Cij from one honeycomb.

    Returns a dict of (value, sigma) pairs in ueV with keys "E_Ci", "E_Cj",
    "E_Cij_i" (shift of the dot-i line) and "E_Cij_j".
    """
    i, j = reading.dots
    lines = {k: fit_transition_line(reading.grid, reading.windows[k]) for k in WINDOW_KEYS}
    a, s = lv.matrix, lv.sigma_matrix
    gx = reading.grid.meta.get("gates", [i, j])[0]
    gy = reading.grid.meta.get("gates", [i, j])[1]
    ai, si = a[gx - 1, i - 1], s[gx - 1, i - 1]
    aj, sj = a[gy - 1, j - 1], s[gy - 1, j - 1]

    def mid(keys, axis):
        r = [reading.windows[k].y_range if axis == "y" else reading.windows[k].x_range for k in keys]
        return float(np.mean([0.5 * (lo + hi) for lo, hi in r]))

    yi = mid(("i_low", "i_high", "i_shifted"), "y")
    xj = mid(("j_low", "j_high", "j_shifted"), "x")
    out = {
        "E_Ci": _energy(ai, si, *_separation(lines["i_low"], lines["i_high"], yi)),
        "E_Cj": _energy(aj, sj, *_separation(lines["j_low"], lines["j_high"], xj)),
        "E_Cij_i": _energy(ai, si, *_separation(lines["i_low"], lines["i_shifted"], yi)),
        "E_Cij_j": _energy(aj, sj, *_separation(lines["j_low"], lines["j_shifted"], xj)),
    }
    return {k: (abs(v), e) for k, (v, e) in out.items()}


def _combine(estimates):
    """Inverse-variance mean of (value, sigma) pairs."""
    vals = np.array([v for v, _ in estimates])
    sig = np.array([max(e, 1e-12) for _, e in estimates])
    w = 1.0 / sig**2
    return float(vals @ w / w.sum()), float(1.0 / math.sqrt(w.sum()))


def extract_energies(readings, lv):
    """Charging and coupling energies from honeycombs of neighbouring pairs.

    Charging energies measured in several honeycombs, and the two readings
    of each coupling energy, are combined by inverse-variance averaging.

    Raises:
        ValueError: the readings do not cover all four dots and three pairs.
    """
    e_c = {d: [] for d in range(1, 5)}
    e_cc = {p: [] for p in ((1, 2), (2, 3), (3, 4))}
    for r in readings:
        res = read_honeycomb(r, lv)
        i, j = r.dots
        e_c[i].append(res["E_Ci"])
        e_c[j].append(res["E_Cj"])
        pair = (min(i, j), max(i, j))
        e_cc[pair] += [res["E_Cij_i"], res["E_Cij_j"]]
    missing = [f"E_C{d}" for d, v in e_c.items() if not v]
    missing += [f"E_C{a}{b}" for (a, b), v in e_cc.items() if not v]
    if missing:
        raise ValueError(f"readings do not determine {missing}")
    c = [_combine(e_c[d]) for d in range(1, 5)]
    cc = [_combine(e_cc[p]) for p in ((1, 2), (2, 3), (3, 4))]
    return capnet.ElectrostaticEnergies(
        tuple(v for v, _ in c), tuple(v for v, _ in cc),
        uncertainties=tuple(s for _, s in c) + tuple(s for _, s in cc),
    )


def honeycomb_windows(grid, dots, occupation, trim=0.2, margin_px=4):
    """Windows for :class:`HoneycombReading` read off a synthesized charge map.

    ``occupation`` is (N_i, N_j) of the reference cell. This needs the
    ground-state map that only synthetic grids carry; it is a convenience for
    simulations, not a detector for measured data.
    """
    if grid.charge_map is None:
        raise ValueError("grid has no charge map")
    i, j = dots
    a, b = occupation
    cm = grid.charge_map
    x, y = grid.x, grid.y

    def cell(ni, nj):
        return (cm[..., i - 1] == ni) & (cm[..., j - 1] == nj)

    def boundary(s1, s2, scan):
        m1, m2 = cell(*s1), cell(*s2)
        if scan == "x":
            hit = m1[:, :-1] & m2[:, 1:]
            iy, ix = np.nonzero(hit)
            along, across = y[iy], 0.5 * (x[ix] + x[ix + 1])
        else:
            hit = m1[:-1, :] & m2[1:, :]
            iy, ix = np.nonzero(hit)
            along, across = x[ix], 0.5 * (y[iy] + y[iy + 1])
        if along.size < 5:
            raise ValueError(f"transition {s1}->{s2} not found in the grid")
        lo, hi = along.min(), along.max()
        cut = trim * (hi - lo)
        keep = (along >= lo + cut) & (along <= hi - cut)
        step = abs(x[1] - x[0]) if scan == "x" else abs(y[1] - y[0])
        a_rng = (float(lo + cut), float(hi - cut))
        c_rng = (float(across[keep].min() - margin_px * step), float(across[keep].max() + margin_px * step))
        if scan == "x":
            return TransitionWindow(c_rng, a_rng, "x")
        return TransitionWindow(a_rng, c_rng, "y")

    return {
        "i_low": boundary((a, b), (a + 1, b), "x"),
        "i_high": boundary((a + 1, b), (a + 2, b), "x"),
        "i_shifted": boundary((a, b + 1), (a + 1, b + 1), "x"),
        "j_low": boundary((a, b), (a, b + 1), "y"),
        "j_high": boundary((a, b + 1), (a, b + 2), "y"),
        "j_shifted": boundary((a + 1, b), (a + 1, b + 1), "y"),
    }
