import numpy as np
import pytest

from fbbasins import automaps as am


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def reference_map():
    """F(z, w) = (z/2 + w^2, w/2): shear by 2w^2 followed by half-scale."""
    return am.Composition((am.Shear(axis=0, g=[0.0, 0.0, 2.0]), am.HalfScale(2)))


def reference_certificate():
    return am.ContractionCertificate(
        p=np.zeros(2, dtype=complex), rho=0.05, s=0.45, r=0.55,
        delta=am.schwarz_delta(0.05, 0.45, 0.55), quad_C=2.1)


def henon_map():
    return am.Henon(0.1, 0.18)


def henon_fixed_point():
    # fixed point (t, t) with t^2 - (1+a) t + c = 0; the attracting root
    roots = np.roots([1.0, -(1.0 + 0.1), 0.18])
    t = min(roots, key=abs)
    return np.array([t, t], dtype=complex)


def henon_certificate(rho=0.01, seed=0):
    return am.certificate_from_sampling(henon_map(), henon_fixed_point(), rho,
                                        seed=seed)
