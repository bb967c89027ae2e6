import numpy as np
import pytest

from trotter_chaos.evolution import evolve_pair
from trotter_chaos.models import PHOTON_NORM_PER_SPIN_DIM, a2a_ising, dicke, heisenberg
from trotter_chaos.signatures import (TimeSeries, entanglement_entropy, expectation, fidelity, participation_ratio,
                                      perturbation_fidelity, simulation_fidelity, subsystem_entropy, time_average)


def _states(rng, n, d):
    s = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return s / np.linalg.norm(s, axis=1, keepdims=True)


def test_expectation_of_identity(rng):
    assert np.allclose(expectation(_states(rng, 5, 6), np.eye(6)).values, 1)


def test_magnetisation_of_highest_weight():
    m = a2a_ising(5)
    assert expectation(m.default_state[None, :], m.observable).values[0] == pytest.approx(1)


def test_expectation_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        expectation(_states(rng, 2, 3), np.eye(4))


def test_dicke_photon_normalisation():
    m = dicke(1, 5)
    assert PHOTON_NORM_PER_SPIN_DIM == 7
    assert np.allclose(m.observable * 21, np.kron(np.diag(np.arange(5)), np.eye(3)))


def test_participation_ratio_limits():
    d = 8
    local = np.eye(d)[:1]
    uniform = np.ones((1, d)) / np.sqrt(d)
    assert participation_ratio(local).values[0] == pytest.approx(1 / d)
    assert participation_ratio(uniform).values[0] == pytest.approx(1)


def test_participation_ratio_uses_basis(rng):
    basis = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    assert participation_ratio(basis[:, 2][None, :], basis).values[0] == pytest.approx(0.25)


def test_perturbation_fidelity_trivial_cases():
    m = a2a_ising(4)
    f0 = perturbation_fidelity(m, 0.3, 20, strength=0.0)
    assert np.allclose(f0.values, 1)
    f = perturbation_fidelity(m, 0.3, 20)
    assert f.values[0] == pytest.approx(1)
    assert np.all((f.values >= 0) & (f.values <= 1))


def test_entropy_product_and_bell():
    prod = np.kron([1, 0], [0.6, 0.8])
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert subsystem_entropy(prod, (2, 2), [0]).values[0] == pytest.approx(0, abs=1e-12)
    assert subsystem_entropy(bell, (2, 2), [0]).values[0] == pytest.approx(1)
    assert entanglement_entropy(np.ones((1, 1))) == 0.0


def test_simulation_fidelity_identities():
    rec = evolve_pair(heisenberg(2), 0.4, 25)
    assert np.max(np.abs(simulation_fidelity(rec).values - 1)) < 1e-9
    rec = evolve_pair(a2a_ising(3), 0.4, 25)
    f = simulation_fidelity(rec)
    assert f.values[0] == pytest.approx(1)


def test_fidelity_misaligned():
    with pytest.raises(ValueError):
        fidelity(np.ones((2, 3)), np.ones((3, 3)))


def test_time_average_conventions():
    times = np.arange(5) * 0.5
    const = TimeSeries("c", 0.5, times, np.full(5, 3.0))
    assert time_average(const, 2.0) == 3.0
    alt = TimeSeries("a", 0.5, times, np.array([1.0, -1, 1, -1, 1]))
    assert time_average(alt, 2.0) == pytest.approx(1 / 5)
    assert time_average(alt, 1.5) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        time_average(alt, 3.0)
    with pytest.raises(ValueError):
        time_average(TimeSeries("e", 0.5, times[1:], np.ones(4)), 0.2)
