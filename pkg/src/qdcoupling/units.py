"""Physical constants and unit conversions.

Working units throughout the package: capacitance in aF, energy in ueV,
voltage in mV, temperature in K, length in nm.
"""
import math

E_CHARGE = 1.602176634e-19  # C
EPS0 = 8.8541878128e-12  # F/m
H_UEV_PER_GHZ = 4.135667696  # ueV per GHz (Planck constant)
KB_UEV_PER_K = 86.173303  # ueV per K

# e^2 / (1 aF) in ueV
E2_PER_AF_UEV = E_CHARGE / 1e-18 * 1e6
# e * (1 mV) in ueV; also the gate coupling prefactor: e*K*C_g*V in ueV for
# K in 1/aF, C_g in aF and V in mV
UEV_PER_MV = 1e3
# number of electrons equivalent to 1 aF * 1 mV of induced charge
ELECTRONS_PER_AF_MV = 1e-21 / E_CHARGE

_ENERGY = {"ueV": 1.0, "meV": 1e3, "eV": 1e6, "GHz": H_UEV_PER_GHZ, "MHz": H_UEV_PER_GHZ * 1e-3}
_TEMPERATURE = {"K": 1.0, "mK": 1e-3}
_CAPACITANCE = {"aF": 1.0, "fF": 1e3, "F": 1e18}
_VOLTAGE = {"mV": 1.0, "V": 1e3, "uV": 1e-3}
_LENGTH = {"nm": 1.0, "um": 1e3, "m": 1e9}
_LEVER = {"ueV/mV": 1.0, "eV/V": 1e3, "meV/mV": 1e3}

UNIT_TABLES = {
    "energy": _ENERGY,
    "temperature": _TEMPERATURE,
    "capacitance": _CAPACITANCE,
    "voltage": _VOLTAGE,
    "length": _LENGTH,
    "lever_arm": _LEVER,
}


def ghz_to_uev(value):
    return value * H_UEV_PER_GHZ


def uev_to_ghz(value):
    return value / H_UEV_PER_GHZ


def thermal_energy(temperature):
    """k_B * T in ueV for T in K."""
    return KB_UEV_PER_K * temperature


def to_canonical(value, unit, kind):
    """Convert ``value`` given in ``unit`` to the canonical unit of ``kind``.

    Raises:
        KeyError: if the unit is not known for that quantity kind.
    """
    table = UNIT_TABLES[kind]
    if unit not in table:
        raise KeyError(f"unknown {kind} unit {unit!r}; expected one of {sorted(table)}")
    return value * table[unit]


def disc_self_capacitance(diameter_nm, epsilon_r):
    """Capacitance 4*eps*D of an isolated thin conducting disc, in aF."""
    return 4.0 * EPS0 * epsilon_r * diameter_nm * 1e-9 * 1e18


def charging_energy(capacitance_af):
    """e^2 / C in ueV."""
    if capacitance_af <= 0 or not math.isfinite(capacitance_af):
        raise ValueError("capacitance must be positive and finite")
    return E2_PER_AF_UEV / capacitance_af
