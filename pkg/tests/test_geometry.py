import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdcoupling import geometry, units
from qdcoupling.geometry import DiscPairGeometry, GeometryError


@pytest.fixture(scope="module")
def sweep():
    d = np.linspace(85.0, 175.0, 10)
    return geometry.sweep_distance(DiscPairGeometry(), d)


def test_isolated_disc_matches_closed_form():
    # a thin conducting disc has C = 8 eps R = 4 eps D
    c = geometry.single_disc_capacitance(80.0, 13.05)
    assert c == pytest.approx(units.disc_self_capacitance(80.0, 13.05), rel=0.01)


def test_distant_discs_approach_point_charge_coupling():
    c0 = units.disc_self_capacitance(80.0, 13.05)
    d = 240.0
    pair = geometry.bem_capacitance(DiscPairGeometry(distance=d, screened=False))
    # two point charges: C_m ~ C0 a / (1 - a^2), a = C0 / (4 pi eps d)
    a = c0 / (4 * math.pi * units.EPS0 * 13.05 * d * 1e-9 * 1e18)
    assert pair.c_mutual == pytest.approx(c0 * a / (1 - a * a), rel=0.03)


def test_deep_plane_is_no_plane():
    far = geometry.bem_capacitance(DiscPairGeometry(depth=1e6))
    free = geometry.bem_capacitance(DiscPairGeometry(screened=False))
    assert far.c_mutual == pytest.approx(free.c_mutual, rel=1e-3)
    assert far.c_self[0] == pytest.approx(free.c_self[0], rel=1e-3)


def test_maxwell_matrix_structure():
    pair = geometry.bem_capacitance(DiscPairGeometry())
    m = pair.maxwell
    assert np.allclose(m, m.T)
    assert np.all(np.linalg.eigvalsh(m) > 0)
    assert pair.c_self[0] == pytest.approx(pair.c_self[1], rel=1e-10)
    assert pair.c_mutual > 0
    assert all(g > 0 for g in pair.c_ground)
    assert pair.residual < 1e-8


def test_mesh_convergence():
    coarse = geometry.bem_capacitance(DiscPairGeometry(), panels=600)
    fine = geometry.bem_capacitance(DiscPairGeometry(), panels=1200)
    assert coarse.c_mutual == pytest.approx(fine.c_mutual, rel=0.02)
    assert coarse.c_self[0] == pytest.approx(fine.c_self[0], rel=0.02)


@settings(max_examples=10)
@given(st.floats(0.25, 4.0))
def test_capacitance_scales_with_length(factor):
    base = geometry.bem_capacitance(DiscPairGeometry(), panels=200)
    big = geometry.bem_capacitance(DiscPairGeometry().scaled(factor), panels=200)
    assert big.c_mutual == pytest.approx(factor * base.c_mutual, rel=1e-9)
    assert big.c_self[0] == pytest.approx(factor * base.c_self[0], rel=1e-9)


@settings(max_examples=10)
@given(st.floats(80.0, 240.0), st.floats(10.0, 100.0))
def test_plane_lowers_coupling(distance, depth):
    g = DiscPairGeometry(distance=distance, depth=depth)
    s = geometry.bem_capacitance(g, panels=200)
    u = geometry.bem_capacitance(g.unscreened(), panels=200)
    assert s.c_mutual < u.c_mutual
    assert s.c_self[0] > u.c_self[0]


def test_sweep_range_and_monotonicity(sweep):
    assert np.all(np.diff(sweep.c_ij_af) < 0)
    assert 0.7 <= sweep.c_ij_af.min() and sweep.c_ij_af.max() <= 13.0
    assert np.all(sweep.c_i_screened_af > sweep.c_i_unscreened_af)


def test_lithographic_pitch_coupling():
    assert 1.0 < geometry.bem_capacitance(DiscPairGeometry(distance=130.0)).c_mutual < 10.0


def test_sweep_power_law(sweep):
    fit = geometry.power_law_fit(sweep.d_nm, sweep.c_ij_af)
    assert fit.exponent == pytest.approx(-3.07, abs=0.3)
    free = geometry.power_law_fit(sweep.d_nm, geometry.sweep_distance(
        DiscPairGeometry(screened=False), sweep.d_nm).c_ij_af)
    assert fit.exponent < free.exponent


def test_sweep_csv(sweep):
    text = sweep.to_csv().splitlines()
    assert text[0] == "d_nm,C_ij_aF,C_i_screened_aF,C_i_unscreened_aF"
    assert len(text) == 11
    assert float(text[1].split(",")[1]) == sweep.c_ij_af[0]


def test_power_law_exact():
    d = np.linspace(80, 240, 12)
    fit = geometry.power_law_fit(d, 3.0 * d**-2.5)
    assert fit.exponent == pytest.approx(-2.5, abs=1e-10)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.exponent_sigma < 1e-10
    with pytest.raises(ValueError):
        geometry.power_law_fit(d[:4], d[:4])
    with pytest.raises(ValueError):
        geometry.power_law_fit(d, -d)


def test_geometry_validation():
    with pytest.raises(GeometryError, match="overlap"):
        DiscPairGeometry(distance=70.0)
    with pytest.raises(GeometryError):
        DiscPairGeometry(depth=0.0)
    with pytest.raises(GeometryError):
        geometry.bem_capacitance(DiscPairGeometry(), panels=10)
    with pytest.raises(GeometryError):
        geometry.sweep_distance(DiscPairGeometry(), [100.0, 90.0])
    with pytest.raises(GeometryError):
        geometry.sweep_distance(DiscPairGeometry(), [100.0, 300.0])


def test_disc_panels_tile_the_disc():
    for rings in (1, 5, 14):
        x, y, req = geometry.disc_panels(40.0, rings)
        assert np.pi * np.sum(req**2) == pytest.approx(np.pi * 40.0**2, rel=1e-12)
        assert np.all(np.hypot(x, y) < 40.0)
