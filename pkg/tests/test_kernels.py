import numpy as np
import pytest

from qdcoupling import capnet, kernels

BACKENDS = kernels.available_backends()


def test_backend_selected_at_import():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.fixture
def detuning_grid():
    rng = np.random.default_rng(11)
    return rng.uniform(-400, 400, 3000), rng.uniform(-400, 400, 3000)


@pytest.mark.parametrize("params", [(24.0, 29.0, 86.0, 13.36), (0.0, 0.0, 117.0, 13.36),
                                    (5.0, 60.0, 0.0, 2.0), (30.0, 30.0, 200.0, 80.0)])
def test_polarization_backends_agree(detuning_grid, params):
    el, er = detuning_grid
    ref = kernels.polarization_grid(el, er, *params, backend="python")
    for name in BACKENDS:
        got = kernels.polarization_grid(el, er, *params, backend=name)
        assert np.allclose(got[0], ref[0], atol=1e-12)
        assert np.allclose(got[1], ref[1], atol=1e-12)


def test_polarization_threads_bit_identical(detuning_grid):
    el, er = detuning_grid
    one = kernels.polarization_grid(el, er, 24.0, 29.0, 86.0, 13.36, threads=1)
    four = kernels.polarization_grid(el, er, 24.0, 29.0, 86.0, 13.36, threads=4)
    assert np.array_equal(one[0], four[0]) and np.array_equal(one[1], four[1])


def test_polarization_rejects_non_positive_temperature():
    with pytest.raises(ValueError):
        kernels.polarization_grid(0.0, 0.0, 1.0, 1.0, 1.0, 0.0)


def test_polarization_broadcasts():
    pl, pr = kernels.polarization_grid(np.zeros((3, 1)), np.zeros((1, 5)), 1.0, 1.0, 1.0, 10.0)
    assert pl.shape == pr.shape == (3, 5)


def test_charge_configurations_order():
    c = kernels.charge_configurations(2)
    assert c.shape == (81, 4)
    assert c[0].tolist() == [0, 0, 0, 0]
    assert c[1].tolist() == [0, 0, 0, 1]
    assert c[-1].tolist() == [2, 2, 2, 2]
    with pytest.raises(ValueError):
        kernels.charge_configurations(-1)


@pytest.mark.parametrize("kt", [0.0, 13.36])
def test_occupation_backends_agree(kt):
    net = capnet.CapacitanceNetwork((45.0,) * 4, (9.0, 2.25, 9.0), c_gate=(5.0,) * 4)
    k = capnet.inverse_matrix(net)
    alpha = capnet.gate_lever_arms(net)
    v = np.random.default_rng(5).uniform(0, 110, (500, 4))
    lin = capnet.gate_linear_terms(net, alpha, v)
    ref_g, ref_m = kernels.occupation_grid(k, capnet.E0, lin, 4, kt, backend="python")
    for name in BACKENDS:
        g, m = kernels.occupation_grid(k, capnet.E0, lin, 4, kt, backend=name)
        assert np.array_equal(g, ref_g)
        assert np.allclose(m, ref_m, atol=1e-12)
    if kt == 0.0:
        assert np.array_equal(ref_m, ref_g.astype(float))


def test_occupation_threads_bit_identical():
    net = capnet.CapacitanceNetwork((45.0,) * 4, (9.0, 2.25, 9.0), c_gate=(5.0,) * 4)
    k = capnet.inverse_matrix(net)
    lin = capnet.gate_linear_terms(net, capnet.gate_lever_arms(net),
                                   np.random.default_rng(6).uniform(0, 110, (400, 4)))
    a = kernels.occupation_grid(k, capnet.E0, lin, 3, 13.36, threads=1)
    b = kernels.occupation_grid(k, capnet.E0, lin, 3, 13.36, threads=3)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@pytest.mark.parametrize("screened", [False, True])
def test_bem_backends_agree(screened):
    rng = np.random.default_rng(2)
    x, y = rng.uniform(-100, 100, 150), rng.uniform(-40, 40, 150)
    r = rng.uniform(1, 4, 150)
    ref = kernels.bem_potential(x, y, r, 35.0, screened, backend="python")
    for name in BACKENDS:
        got = kernels.bem_potential(x, y, r, 35.0, screened, backend=name)
        assert np.allclose(got, ref, rtol=1e-13, atol=1e-15)


def test_resolve_threads():
    assert kernels.resolve_threads(3) == 3
    assert kernels.resolve_threads(0) >= 1
    with pytest.raises(ValueError):
        kernels.resolve_threads(-1)
