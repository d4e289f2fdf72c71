"""Constant-interaction electrostatics of the linear four-dot capacitor network.

Dots are nodes 1..4 (indices 0..3 here) joined by nearest-neighbour
capacitances C_12, C_23, C_34. Each node has a total capacitance C_i (the sum
of every capacitance attached to it), gate capacitances C_gi and, on the outer
dots, reservoir capacitances C_o1, C_o2.

Units: aF, ueV, mV. The electrostatic energy is

    U = 1/2 * Q . C^-1 . Q,    Q_i = -|e| N_i + C_gi V_gi (+ C_oi V_oi)

so that the second difference of U in N_i is the charging energy E_Ci, the
mixed difference in (N_i, N_j) is E_Cij, and positive gate voltages add
electrons.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .units import E2_PER_AF_UEV, ELECTRONS_PER_AF_MV

E0 = E2_PER_AF_UEV  # e^2 / aF in ueV

INTER_LABELS = ("C12", "C23", "C34")
ENERGY_LABELS = ("E_C1", "E_C2", "E_C3", "E_C4", "E_C12", "E_C23", "E_C34")
CAPACITANCE_LABELS = ("C1", "C2", "C3", "C4", "C12", "C23", "C34")


class NetworkError(ValueError):
    """Capacitance network violates its physical invariants."""


class EnergyError(ValueError):
    """Energy set cannot correspond to a valid capacitance network."""


def _floats(values, n, name):
    try:
        out = tuple(float(v) for v in values)
    except TypeError:
        raise TypeError(f"{name} must be a sequence of {n} numbers") from None
    if len(out) != n:
        raise ValueError(f"{name} must have {n} entries, got {len(out)}")
    if not all(math.isfinite(v) for v in out):
        raise ValueError(f"{name} must be finite")
    return out


def _optional_sigma(values, n, name):
    if values is None:
        return None
    out = _floats(values, n, name)
    if any(v < 0 for v in out):
        raise ValueError(f"{name} must be non-negative")
    return out


def _check_dominance(c_total, c_inter):
    attached = (
        c_inter[0],
        c_inter[0] + c_inter[1],
        c_inter[1] + c_inter[2],
        c_inter[2],
    )
    for i, (ci, s) in enumerate(zip(c_total, attached)):
        if not ci > s:
            raise NetworkError(
                f"C{i + 1} = {ci:g} aF must exceed the inter-dot capacitances "
                f"attached to dot {i + 1} ({s:g} aF)"
            )


@dataclass(frozen=True)
class CapacitanceNetwork:
    """Capacitances of the four-dot chain (aF).

    ``uncertainties`` optionally carries 1-sigma values for
    (C1, C2, C3, C4, C12, C23, C34).
    """

    c_total: tuple
    c_inter: tuple
    c_gate: tuple = (0.0, 0.0, 0.0, 0.0)
    c_ohmic: tuple = (0.0, 0.0)
    uncertainties: tuple = field(default=None, compare=False)

    def __post_init__(self):
        c_total = _floats(self.c_total, 4, "c_total")
        c_inter = _floats(self.c_inter, 3, "c_inter")
        c_gate = _floats(self.c_gate, 4, "c_gate")
        c_ohmic = _floats(self.c_ohmic, 2, "c_ohmic")
        if any(c <= 0 for c in c_total):
            raise NetworkError("total capacitances must be positive")
        if any(c < 0 for c in c_inter + c_gate + c_ohmic):
            raise NetworkError("inter-dot, gate and ohmic capacitances must be >= 0")
        _check_dominance(c_total, c_inter)
        object.__setattr__(self, "c_total", c_total)
        object.__setattr__(self, "c_inter", c_inter)
        object.__setattr__(self, "c_gate", c_gate)
        object.__setattr__(self, "c_ohmic", c_ohmic)
        object.__setattr__(
            self, "uncertainties", _optional_sigma(self.uncertainties, 7, "uncertainties")
        )

    @property
    def dot_capacitances(self):
        """The seven dot capacitances (C1..C4, C12, C23, C34)."""
        return self.c_total + self.c_inter

    @property
    def mean_capacitance(self):
        return sum(self.c_total) / 4.0

    def mirrored(self):
        """Network relabelled 1<->4, 2<->3."""
        return CapacitanceNetwork(
            self.c_total[::-1], self.c_inter[::-1], self.c_gate[::-1], self.c_ohmic[::-1]
        )


@dataclass(frozen=True)
class ChargeState:
    """Electron numbers (N_1, N_2, N_3, N_4)."""

    n: tuple

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        if len(n) != 4:
            raise ValueError("a charge state has four occupations")
        if any(v < 0 for v in n):
            raise ValueError("occupations must be non-negative")
        object.__setattr__(self, "n", n)

    def __iter__(self):
        return iter(self.n)

    def __getitem__(self, i):
        return self.n[i]


@dataclass(frozen=True)
class SourceVoltages:
    """Gate voltages V_g1..V_g4 and reservoir voltages V_o1, V_o2 (mV)."""

    v_gate: tuple = (0.0, 0.0, 0.0, 0.0)
    v_ohmic: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "v_gate", _floats(self.v_gate, 4, "v_gate"))
        object.__setattr__(self, "v_ohmic", _floats(self.v_ohmic, 2, "v_ohmic"))


@dataclass(frozen=True)
class ElectrostaticEnergies:
    """Charging energies E_Ci and coupling energies E_Cij (ueV).

    ``uncertainties`` optionally carries 1-sigma values ordered as
    (E_C1..E_C4, E_C12, E_C23, E_C34).
    """

    e_c: tuple
    e_cc: tuple
    uncertainties: tuple = field(default=None, compare=False)

    def __post_init__(self):
        e_c = _floats(self.e_c, 4, "e_c")
        e_cc = _floats(self.e_cc, 3, "e_cc")
        if any(e <= 0 for e in e_c):
            raise EnergyError("charging energies must be positive")
        if any(e < 0 for e in e_cc):
            raise EnergyError("coupling energies must be non-negative")
        for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 3))):
            if not e_cc[k] ** 2 < e_c[i] * e_c[j]:
                raise EnergyError(
                    f"E_C{i + 1}{j + 1}^2 must be < E_C{i + 1}*E_C{j + 1} "
                    f"({e_cc[k] ** 2:g} >= {e_c[i] * e_c[j]:g})"
                )
        object.__setattr__(self, "e_c", e_c)
        object.__setattr__(self, "e_cc", e_cc)
        object.__setattr__(
            self, "uncertainties", _optional_sigma(self.uncertainties, 7, "uncertainties")
        )

    @property
    def values(self):
        return self.e_c + self.e_cc


def maxwell_matrix(net):
    """Tridiagonal Maxwell capacitance matrix (aF)."""
    _check_dominance(net.c_total, net.c_inter)
    c1, c2, c3, c4 = net.c_total
    c12, c23, c34 = net.c_inter
    return np.array(
        [
            [c1, -c12, 0.0, 0.0],
            [-c12, c2, -c23, 0.0],
            [0.0, -c23, c3, -c34],
            [0.0, 0.0, -c34, c4],
        ]
    )


def _determinant(c):
    c1, c2, c3, c4, c12, c23, c34 = c
    return (
        c1 * c2 * c3 * c4
        - c3 * c4 * c12**2
        - c1 * c2 * c34**2
        - c1 * c4 * c23**2
        + c12**2 * c34**2
    )


def determinant(net):
    """Closed-form determinant |C| of the Maxwell matrix (aF^4)."""
    return _determinant(net.dot_capacitances)


def inverse_matrix(net):
    c = maxwell_matrix(net)
    if not determinant(net) > 0:
        raise NetworkError("Maxwell matrix is singular")
    return np.linalg.inv(c)


def induced_charge(net, v):
    """Gate- and reservoir-induced charge on each node, in electrons."""
    q = np.array(net.c_gate) * np.array(v.v_gate)
    q[0] += net.c_ohmic[0] * v.v_ohmic[0]
    q[3] += net.c_ohmic[1] * v.v_ohmic[1]
    return q * ELECTRONS_PER_AF_MV


def electrostatic_energy(net, state, v=None):
    """Energy U of charge configuration ``state`` at source voltages ``v`` (ueV)."""
    v = SourceVoltages() if v is None else v
    k = inverse_matrix(net)
    x = np.asarray(state.n if isinstance(state, ChargeState) else state, float)
    x = x - induced_charge(net, v)
    return 0.5 * E0 * float(x @ k @ x)


def _energies(c):
    # complex-safe so the uncertainty Jacobian can use complex steps
    c1, c2, c3, c4, c12, c23, c34 = c
    det = _determinant(c)
    return np.array(
        [
            c2 * c3 * c4 - c4 * c23**2 - c2 * c34**2,
            c1 * c3 * c4 - c1 * c34**2,
            c1 * c2 * c4 - c4 * c12**2,
            c1 * c2 * c3 - c3 * c12**2 - c1 * c23**2,
            c3 * c4 * c12 - c12 * c34**2,
            c1 * c4 * c23,
            c1 * c2 * c34 - c34 * c12**2,
        ]
    ) * (E0 / det)


def _capacitances(e):
    e1, e2, e3, e4, e12, e23, e34 = e
    d12 = e1 * e2 - e12**2
    d23 = e2 * e3 - e23**2
    d34 = e3 * e4 - e34**2
    return E0 * np.array(
        [
            e2 / d12,
            (e1 * e2**2 * e3 - e12**2 * e23**2) / (e2 * d12 * d23),
            (e2 * e3**2 * e4 - e23**2 * e34**2) / (e3 * d23 * d34),
            e3 / d34,
            e12 / d12,
            e23 / d23,
            e34 / d34,
        ]
    )


def _propagate(fn, x, sigma):
    """First-order propagation of independent 1-sigma errors through ``fn``."""
    x = np.asarray(x, float)
    h = 1e-30
    jac = np.empty((len(x), len(x)))
    for k in range(len(x)):
        step = x.astype(complex)
        step[k] += 1j * h
        jac[:, k] = fn(step).imag / h
    cov = jac @ np.diag(np.square(sigma)) @ jac.T
    return tuple(float(s) for s in np.sqrt(np.diag(cov)))


def energies_from_capacitances(net):
    """Charging and coupling energies of ``net`` from the closed forms."""
    c = net.dot_capacitances
    e = _energies(np.array(c))
    sigma = None
    if net.uncertainties is not None:
        sigma = _propagate(_energies, c, net.uncertainties)
    return ElectrostaticEnergies(tuple(e[:4]), tuple(e[4:]), uncertainties=sigma)


def capacitances_from_energies(en):
    """Invert measured energies to the seven dot capacitances.

    Gate and reservoir capacitances are not determined and are left at zero.
    """
    e = en.values
    e1, e2, e3, e4, e12, e23, e34 = e
    for label, d in (
        ("E_C1*E_C2 - E_C12^2", e1 * e2 - e12**2),
        ("E_C2*E_C3 - E_C23^2", e2 * e3 - e23**2),
        ("E_C3*E_C4 - E_C34^2", e3 * e4 - e34**2),
    ):
        if not d > 0:
            raise EnergyError(f"{label} must be > 0 (got {d:g})")
    c = _capacitances(np.array(e))
    sigma = None
    if en.uncertainties is not None:
        sigma = _propagate(_capacitances, e, en.uncertainties)
    try:
        return CapacitanceNetwork(tuple(c[:4]), tuple(c[4:]), uncertainties=sigma)
    except NetworkError as exc:
        raise EnergyError(f"energies give an unphysical network: {exc}") from None


def coupling_exact(net):
    """Capacitive coupling g = e^2 C23 (C1-C12)(C4-C34) / |C| (ueV)."""
    c1, _, _, c4 = net.c_total
    c12, c23, c34 = net.c_inter
    return E0 * c23 * (c1 - c12) * (c4 - c34) / determinant(net)


def coupling_series(net):
    """Second-order series g = E_C (c23 - c23 c12 - c23 c34), C = <C_i> (ueV)."""
    c = net.mean_capacitance
    c12, c23, c34 = (x / c for x in net.c_inter)
    return E0 / c * (c23 - c23 * c12 - c23 * c34)


def coupling_by_shift(net, offset=(0, 0, 0, 0), pair="left"):
    """g as the detuning shift of one double dot when the other one flips.

    ``pair="left"`` evaluates the shift of eps_12 caused by moving the right
    electron from dot 4 to dot 3; ``pair="right"`` the shift of eps_34 caused
    by moving the left electron from dot 1 to dot 2. ``offset`` adds fixed
    electron numbers to every configuration. Source voltages are zero.
    """
    base = np.asarray(offset, int)

    def u(*n):
        return electrostatic_energy(net, ChargeState(tuple(base + np.array(n))))

    if pair == "left":
        return (u(0, 1, 1, 0) - u(1, 0, 1, 0)) - (u(0, 1, 0, 1) - u(1, 0, 0, 1))
    if pair == "right":
        return (u(0, 1, 1, 0) - u(0, 1, 0, 1)) - (u(1, 0, 1, 0) - u(1, 0, 0, 1))
    raise ValueError("pair must be 'left' or 'right'")


def gate_lever_arms(net):
    """Lever arms alpha[gate, dot] = -d mu_dot / d V_gate (ueV/mV).

    Gate k couples to node k through C_gk; cross terms come from C^-1.
    """
    k = inverse_matrix(net)
    return 1e3 * k.T * np.array(net.c_gate)[:, None]


def gate_linear_terms(net, alpha, v_gate, v_ohmic=(0.0, 0.0)):
    """Per-dot linear energy terms (ueV) for gate voltages ``v_gate``.

    ``alpha`` is a lever-arm matrix [gate, dot]; ``v_gate`` may have a leading
    pixel dimension, shape (..., 4). Reservoir terms come from the network.
    """
    v_gate = np.asarray(v_gate, float)
    lin = v_gate @ np.asarray(alpha, float)
    q_ohmic = np.zeros(4)
    q_ohmic[0] = net.c_ohmic[0] * v_ohmic[0]
    q_ohmic[3] = net.c_ohmic[1] * v_ohmic[1]
    return lin + E0 * ELECTRONS_PER_AF_MV * (inverse_matrix(net) @ q_ohmic)


def ground_state_config(net, v=None, n_max=6):
    """Lowest-energy charge configuration with every N_i in [0, n_max].

    Ties resolve to the lexicographically smallest configuration.
    """
    v = SourceVoltages() if v is None else v
    k = inverse_matrix(net)
    lin = E0 * (k @ induced_charge(net, v))
    ground, _ = kernels.occupation_grid(k, E0, lin[None, :], n_max)
    return ChargeState(tuple(int(x) for x in ground[0]))
