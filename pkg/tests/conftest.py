import numpy as np
import pytest

from uscgates import codes, dynamics, rabi

WC = 2 * np.pi * 6.25


@pytest.fixture(scope="session")
def system08():
    """Standard single-mode system: g = 0.8 omega_c, m = 2, k_max = 4."""
    model = rabi.RabiModel.single_mode(WC, WC, 0.8 * WC, cutoff=20)
    spec0 = rabi.dressed_spectrum(model)
    model = model.with_omega_mu(rabi.choose_omega_mu(spec0, m=2, k_max=4))
    return model, rabi.dressed_spectrum(model)


@pytest.fixture(scope="session")
def frame08(system08):
    model, _ = system08
    return dynamics.InteractionFrame(model)


@pytest.fixture(scope="session")
def system07():
    """Preparation system: g = 0.7 omega_c, m = 2."""
    model = rabi.RabiModel.single_mode(WC, WC, 0.7 * WC, cutoff=20)
    spec0 = rabi.dressed_spectrum(model)
    model = model.with_omega_mu(rabi.choose_omega_mu(spec0, m=2, k_max=4))
    return model, rabi.dressed_spectrum(model)


@pytest.fixture(scope="session")
def bimodal13():
    """Two-qubit system: g_a = g_b = 1.3 omega_a, omega_b = 0.9 omega_a, m = 0."""
    wa, wb = WC, 0.9 * WC
    model = rabi.RabiModel.bimodal(wa, wb, wa, 1.3 * wa, 1.3 * wa, cutoff=8)
    spec0 = rabi.dressed_spectrum(model)
    model = model.with_omega_mu(
        rabi.choose_omega_mu_bimodal(spec0, m=0, k_max_a=4, k_max_b=4))
    return model, rabi.dressed_spectrum(model)


@pytest.fixture(scope="session")
def hadamard_spec():
    return codes.GateSpec(theta_s=np.pi / 2, theta=np.pi / 4, phi=0.0)

