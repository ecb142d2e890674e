import math

import pytest

from optomag.params import Overrides, PhysicalParams, derive

TWO_PI = 2 * math.pi


def reference_inputs(N_A=1.0, **override_kw):
    """Strong-coupling parameter set, linearized values given directly."""
    p = PhysicalParams(
        omega_b=TWO_PI * 1e9,
        g_q=TWO_PI * 2e4,
        g_m=TWO_PI * 2e4,
        kappa_m=TWO_PI * 1e6,
        gamma_q=TWO_PI * 1e3,
    )
    kw = dict(
        Delta_a_p=-TWO_PI * 1e3,
        Delta_c_p=-TWO_PI * 1e3,
        G_a=TWO_PI * 1e8,
        G_c=TWO_PI * 1e8,
        Wc_over_OmegaA=1e6,
        Delta_q_over_Gq=10.0,
        Delta_m_over_Gm=10.0,
        N_A=N_A,
    )
    kw.update(override_kw)
    return p, Overrides(**kw)


@pytest.fixture(scope="session")
def ref_params():
    """Derived parameters with N_A = 1."""
    return derive(*reference_inputs())


@pytest.fixture(scope="session")
def ref_vacuum():
    """Derived parameters with N_A = 0 (LBP initially empty)."""
    return derive(*reference_inputs(N_A=0.0))
