"""Capacitance of two conducting discs beneath a grounded plane.

Each disc is a flat, zero-thickness conductor split into panels on a polar
grid: rings whose edges crowd toward the rim (where the surface charge
diverges), each ring cut into near-square sectors. Charge density is constant
per panel and collocation happens at panel centroids. A panel's own potential
is that of a uniformly charged disc of equal area; a grounded plane at height
``depth`` above the discs enters through image charges.
"""
from dataclasses import dataclass
import csv
import io
import math

import numpy as np
from scipy import linalg

from . import kernels
from .units import EPS0

COND_LIMIT = 1e12


class GeometryError(ValueError):
    """Invalid geometry or solver settings."""


class SolverError(RuntimeError):
    """The boundary-element system could not be solved reliably."""


@dataclass(frozen=True)
class DiscPairGeometry:
    """Two coplanar discs (lengths in nm) under an optional grounded plane."""

    diameter: float = 80.0
    distance: float = 130.0
    depth: float = 35.0
    epsilon_r: float = 13.05
    screened: bool = True

    def __post_init__(self):
        for name in ("diameter", "distance", "depth", "epsilon_r"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise GeometryError(f"{name} must be positive and finite")
            object.__setattr__(self, name, v)
        if self.distance < self.diameter:
            raise GeometryError(
                f"discs overlap: distance {self.distance} nm < diameter {self.diameter} nm"
            )

    def scaled(self, factor):
        """All lengths multiplied by ``factor``."""
        return DiscPairGeometry(self.diameter * factor, self.distance * factor,
                                self.depth * factor, self.epsilon_r, self.screened)

    def with_distance(self, distance):
        return DiscPairGeometry(self.diameter, distance, self.depth, self.epsilon_r, self.screened)

    def unscreened(self):
        return DiscPairGeometry(self.diameter, self.distance, self.depth, self.epsilon_r, False)


@dataclass(frozen=True)
class CapacitancePair:
    """Solver output in aF.

    ``c_self`` are the diagonal Maxwell entries (total capacitance of each
    disc), ``c_mutual`` the negated off-diagonal entry, and ``c_ground`` the
    row sums (capacitance to ground and plane alone).
    """

    c_self: tuple
    c_mutual: float
    c_ground: tuple
    maxwell: np.ndarray
    panel_count: int
    residual: float
    condition: float


def ring_count_for(panels):
    """Number of rings whose panel count is closest to ``panels``."""
    best, best_err = 1, None
    for n in range(1, 200):
        count = disc_panels(1.0, n)[0].size
        err = abs(count - panels)
        if best_err is None or err < best_err:
            best, best_err = n, err
        if count > panels:
            break
    return best


def disc_panels(radius, rings, cx=0.0):
    """Panel centroids and equal-area radii for one disc.

    Ring edges follow r_k = R sin(pi/2 * k/rings); the innermost ring is a
    single central panel and the others hold max(6, round(2 pi r_mid / dr))
    sectors.

    Returns:
        (x, y, r_eq) arrays.
    """
    if rings < 1:
        raise GeometryError("need at least one ring")
    edges = radius * np.sin(0.5 * np.pi * np.arange(rings + 1) / rings)
    xs, ys, areas = [np.array([cx])], [np.array([0.0])], [np.array([np.pi * edges[1] ** 2])]
    for r0, r1 in zip(edges[1:-1], edges[2:]):
        m = max(6, int(round(np.pi * (r0 + r1) / (r1 - r0))))
        theta = (np.arange(m) + 0.5) * 2 * np.pi / m
        rc = math.sqrt(0.5 * (r0 * r0 + r1 * r1))
        xs.append(cx + rc * np.cos(theta))
        ys.append(rc * np.sin(theta))
        areas.append(np.full(m, np.pi * (r1 * r1 - r0 * r0) / m))
    a = np.concatenate(areas)
    return np.concatenate(xs), np.concatenate(ys), np.sqrt(a / np.pi)


def _solve(x, y, req, owner, n_cond, depth, screened, epsilon_r):
    """Maxwell matrix (aF) for conductors labelled by ``owner``."""
    p = kernels.bem_potential(x, y, req, depth, screened)
    try:
        lu, piv = linalg.lu_factor(p, check_finite=True)
    except (ValueError, linalg.LinAlgError) as exc:
        raise SolverError(f"boundary-element system failed: {exc}") from exc
    rcond, info = linalg.lapack.dgecon(lu, np.abs(p).sum(axis=0).max(), norm="1")
    cond = 1.0 / rcond if rcond > 0 else math.inf
    if info != 0 or cond > COND_LIMIT:
        raise SolverError(f"boundary-element system ill-conditioned (cond ~ {cond:.3g})")
    v = np.zeros((x.size, n_cond))
    v[np.arange(x.size), owner] = 1.0
    q = linalg.lu_solve((lu, piv), v)
    residual = float(np.abs(p @ q - v).max())
    # q is in units of 4 pi eps * nm
    scale = 4 * math.pi * EPS0 * epsilon_r * 1e-9 * 1e18
    c = np.array([[q[owner == i, j].sum() for j in range(n_cond)] for i in range(n_cond)]) * scale
    return 0.5 * (c + c.T), residual, cond


def bem_capacitance(geom, panels=600):
    """Maxwell capacitances of the disc pair.

    Args:
        geom: the geometry.
        panels: target panels per disc (>= 64); the ring count whose panel
            count is closest is used.
    """
    if panels < 64:
        raise GeometryError("need at least 64 panels per disc")
    rings = ring_count_for(panels)
    r = 0.5 * geom.diameter
    x1, y1, q1 = disc_panels(r, rings, -0.5 * geom.distance)
    x2, y2, q2 = disc_panels(r, rings, 0.5 * geom.distance)
    owner = np.r_[np.zeros(x1.size, int), np.ones(x2.size, int)]
    c, residual, cond = _solve(np.r_[x1, x2], np.r_[y1, y2], np.r_[q1, q2], owner, 2,
                               geom.depth, geom.screened, geom.epsilon_r)
    return CapacitancePair(
        (float(c[0, 0]), float(c[1, 1])),
        float(-c[0, 1]),
        (float(c[0].sum()), float(c[1].sum())),
        c,
        int(x1.size),
        residual,
        cond,
    )


def single_disc_capacitance(diameter=80.0, epsilon_r=13.05, depth=None, panels=600):
    """Capacitance (aF) of one disc, isolated or (``depth`` set) under the plane."""
    if panels < 64:
        raise GeometryError("need at least 64 panels per disc")
    if diameter <= 0:
        raise GeometryError("diameter must be positive")
    x, y, req = disc_panels(0.5 * diameter, ring_count_for(panels))
    screened = depth is not None
    c, _, _ = _solve(x, y, req, np.zeros(x.size, int), 1, depth or 1.0, screened, epsilon_r)
    return float(c[0, 0])


@dataclass(frozen=True)
class SweepTable:
    d_nm: np.ndarray
    c_ij_af: np.ndarray
    c_i_screened_af: np.ndarray
    c_i_unscreened_af: np.ndarray

    COLUMNS = ("d_nm", "C_ij_aF", "C_i_screened_aF", "C_i_unscreened_aF")

    def rows(self):
        return list(zip(*(a.tolist() for a in (self.d_nm, self.c_ij_af,
                                                  self.c_i_screened_af, self.c_i_unscreened_af))))

    def to_csv(self):
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def sweep_distance(geom, distances, panels=600):
    """C_ij and C_i versus centre distance.

    ``c_ij_af`` comes from ``geom`` as given; the C_i columns are computed
    with and without the plane.

    Raises:
        GeometryError: distances outside [D, 3D] or not ascending.
    """
    d = np.asarray(distances, float)
    if d.ndim != 1 or d.size == 0:
        raise GeometryError("need at least one distance")
    if np.any(np.diff(d) <= 0):
        raise GeometryError("distances must be strictly ascending")
    if d[0] < geom.diameter or d[-1] > 3 * geom.diameter:
        raise GeometryError("distances must lie within [D, 3D]")
    cij, cs, cu = [], [], []
    for dist in d:
        g = geom.with_distance(dist)
        s = bem_capacitance(DiscPairGeometry(g.diameter, dist, g.depth, g.epsilon_r, True), panels)
        u = bem_capacitance(g.unscreened(), panels)
        cij.append(s.c_mutual if geom.screened else u.c_mutual)
        cs.append(s.c_self[0])
        cu.append(u.c_self[0])
    return SweepTable(d, np.array(cij), np.array(cs), np.array(cu))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    exponent_sigma: float
    prefactor: float


def power_law_fit(d, c):
    """Fit c = A * d**k by linear least squares in log-log space.

    Raises:
        ValueError: fewer than 5 points or non-positive values.
    """
    d = np.asarray(d, float)
    c = np.asarray(c, float)
    if d.shape != c.shape or d.size < 5:
        raise ValueError("need at least 5 (d, C) points")
    if np.any(d <= 0) or np.any(c <= 0):
        raise ValueError("power-law fit needs positive values")
    a = np.column_stack([np.ones_like(d), np.log(d)])
    coef, *_ = np.linalg.lstsq(a, np.log(c), rcond=None)
    resid = np.log(c) - a @ coef
    s2 = float(resid @ resid) / (d.size - 2)
    cov = s2 * np.linalg.inv(a.T @ a)
    return PowerLawFit(float(coef[1]), float(math.sqrt(cov[1, 1])), float(math.exp(coef[0])))
