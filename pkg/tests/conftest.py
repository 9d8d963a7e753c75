import numpy as np
import pytest

from mottlab.config import DimensionlessGroups, PhysicalConfig, PotentialSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def worked_groups():
    """Groups of the worked critical-point example: a=2, b1=0.5, b2=1."""
    return DimensionlessGroups(a=2.0, b1=0.5, b2=1.0, c_coeff=0.5, kappa=1.0)


@pytest.fixture
def worked_momenta():
    """Momenta chosen so c1 = 0.3 and c2 = 0.7 under c_coeff = 0.5."""
    y1 = np.array([np.sqrt(0.2), 0.0, 0.0])   # atom_energy = 0.6
    y2 = np.array([np.sqrt(1.8), 0.0, 0.0])   # atom_energy = 1.4
    return y1, y2


@pytest.fixture
def base_cfg():
    return PhysicalConfig(
        epsilon=0.1,
        mass_ratio=0.1,
        a1_over_gamma=10.0,
        a2_over_a1=1.5,
        chi=0.0,
        chi_bar=0.0,
        t_over_tau2=4.0 / 3.0,
        lambda0=0.01,
        potential=PotentialSpec(),
    )


def stationary_family_cfg(eps: float, c_coeff: float = 0.54) -> PhysicalConfig:
    """Scaling family with fixed groups (a, b1, b2) = (2, 0.5, 1)."""
    return PhysicalConfig(
        epsilon=eps,
        mass_ratio=eps * 2.0 / c_coeff,
        a1_over_gamma=0.5 / eps,
        a2_over_a1=2.0,
        chi=0.0,
        chi_bar=0.0,
        t_over_tau2=2.0,
        lambda0=0.1 * eps,
        potential=PotentialSpec(),
    )


def selectivity_family_cfg(eps: float, chi: float) -> PhysicalConfig:
    """Scaling family with fixed groups (a, b1, b2) = (1.7, 1.0, 1.55).

    The flight-time gap and the pi/6 misalignment both put the phase
    gradient several oscillation scales away from zero at eps = 0.1, while
    the aligned stationary term remains resolvable.
    """
    return PhysicalConfig(
        epsilon=eps,
        mass_ratio=eps * 1.7 / 0.5,
        a1_over_gamma=1.0 / eps,
        a2_over_a1=1.55,
        chi=chi,
        chi_bar=0.0,
        t_over_tau2=1.7 / 1.55,
        lambda0=0.1 * eps,
        potential=PotentialSpec(),
    )


# Evaluation points selected by coarse scans for healthy stationary signals.
STATIONARY_POINT = dict(
    eta1=-1.122,
    eta2=-0.261,
    x=np.array([0.25, 0.056, 1.2]),
    y1=np.array([0.823, 0.873, 0.599]),
    y2=np.array([-0.045, 0.048, -0.205]),
)

SELECTIVITY_POINT = dict(
    x=np.array([0.16, -0.46, 0.15]),
    y1=np.array([-0.39, 0.33, -0.04]),
    y2=np.array([-0.02, -0.02, -0.3]),
)


def random_strict_config(rng) -> PhysicalConfig:
    """A random configuration with all strict inequalities satisfied."""
    eps = rng.uniform(0.03, 0.4)
    return PhysicalConfig(
        epsilon=eps,
        mass_ratio=rng.uniform(0.02, 0.5),
        a1_over_gamma=rng.uniform(2.0, 60.0),
        a2_over_a1=rng.uniform(1.01, 4.0),
        chi=rng.uniform(0.0, np.pi / 2),
        chi_bar=0.0,
        t_over_tau2=rng.uniform(1.01, 4.0),
        lambda0=rng.uniform(1e-4, 0.2),
        potential=PotentialSpec(),
    )
