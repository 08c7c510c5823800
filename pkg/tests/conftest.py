import numpy as np
import pytest

from nnlslab.scattering import InitialProfile, SpectralTable

# the standard verification profile: a shifted chirped depression on A = 0.5.
# An even bump degenerates to local-equation scattering (argument of
# 1 + r1*r2 identically zero) and a raised centered bump carries a spectral
# zero just above iA, so the off-center depression is the clean choice.
VERIF = dict(A=0.5, amplitude=-0.2, width=1.0, chirp=0.3, center=0.8)


@pytest.fixture(scope="session")
def verif_profile():
    return InitialProfile.gaussian_bump(**VERIF)


@pytest.fixture(scope="session")
def verif_table(verif_profile):
    return SpectralTable(verif_profile)


@pytest.fixture(scope="session")
def bg_profile():
    return InitialProfile.pure_background(1.0, L=2.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
