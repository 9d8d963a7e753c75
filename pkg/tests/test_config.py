import numpy as np
import pytest

from mottlab.config import (
    ConfigError,
    PhysicalConfig,
    PotentialSpec,
    RegimeWarning,
    atom_axes,
    build_groups,
)

from conftest import random_strict_config


def make_cfg(**overrides):
    base = dict(
        epsilon=0.1,
        mass_ratio=0.1,
        a1_over_gamma=50.0,
        a2_over_a1=2.0,
        chi=0.0,
        chi_bar=0.0,
        t_over_tau2=1.5,
        lambda0=0.01,
    )
    base.update(overrides)
    return PhysicalConfig(**base)


class TestBuildGroups:
    def test_worked_example(self):
        # epsilon=0.1, |a2|/gamma=100, t/tau2=1.5, m/M=0.1
        g = build_groups(make_cfg(), emit_warnings=False)
        assert g.a == pytest.approx(15.0, abs=1e-12)
        assert g.b1 == pytest.approx(5.0, abs=1e-12)
        assert g.b2 == pytest.approx(10.0, abs=1e-12)
        assert g.c_coeff == pytest.approx(15.0, abs=1e-12)
        assert float(g.c_value(np.zeros(3))) == pytest.approx(7.5, abs=1e-12)
        assert g.kappa == pytest.approx(0.01 * 15.0 / 0.01, rel=1e-12)

    def test_time_ratio_near_one_drives_a_to_b2(self):
        g = build_groups(make_cfg(t_over_tau2=1.0 + 1e-9), emit_warnings=False)
        assert g.a / g.b2 == pytest.approx(1.0 + 1e-9, rel=1e-12)

    def test_rejects_far_atom_closer_than_near(self):
        with pytest.raises(ConfigError):
            make_cfg(a2_over_a1=0.5)

    def test_rejects_time_before_far_flight(self):
        with pytest.raises(ConfigError):
            make_cfg(t_over_tau2=1.0)

    def test_ordering_invariant(self, rng):
        for _ in range(50):
            cfg = random_strict_config(rng)
            g = build_groups(cfg, emit_warnings=False)
            assert g.b1 < g.b2 <= g.a

    def test_kappa_identity(self, rng):
        # kappa = lambda0 * a / eps^2 must match lambda*t/hbar assembled directly
        for _ in range(20):
            cfg = random_strict_config(rng)
            g = build_groups(cfg, emit_warnings=False)
            assert g.kappa == pytest.approx(cfg.lambda0 * g.a / cfg.epsilon**2, rel=1e-12)


class TestRegimeWarnings:
    def test_in_regime_is_quiet(self):
        import warnings

        cfg = make_cfg(a2_over_a1=1.6, lambda0=0.02)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            build_groups(cfg)

    def test_large_epsilon_warns(self):
        cfg = make_cfg(epsilon=0.6, mass_ratio=0.6, a1_over_gamma=5.0, lambda0=0.06)
        with pytest.warns(RegimeWarning):
            build_groups(cfg)

    def test_mass_ratio_out_of_scale_warns(self):
        with pytest.warns(RegimeWarning, match="mass_ratio"):
            build_groups(make_cfg(mass_ratio=5.0))

    def test_report_lists_each_violation(self):
        cfg = make_cfg(epsilon=0.6, mass_ratio=0.001)
        msgs = cfg.regime_report()
        assert any("epsilon" in m for m in msgs)
        assert any("mass_ratio" in m for m in msgs)


class TestPotentialSpec:
    def test_gaussian_transform(self):
        pot = PotentialSpec(amplitude=2.0, width=0.5)
        q = np.array([1.0, 2.0, -1.0])
        assert pot.transform(q) == pytest.approx(2.0 * np.exp(-0.5 * 6.0 * 0.25))

    def test_rejects_bad_width(self):
        with pytest.raises(ConfigError):
            PotentialSpec(width=0.0)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ConfigError):
            PotentialSpec(kind="yukawa")


class TestAtomAxes:
    def test_near_axis_is_z(self):
        a1, a2 = atom_axes(0.0)
        assert np.allclose(a1, [0, 0, 1])
        assert np.allclose(a2, [0, 0, 1])

    def test_angle_is_chi(self, rng):
        for chi in rng.uniform(0.0, np.pi, size=10):
            a1, a2 = atom_axes(chi)
            assert np.dot(a1, a2) == pytest.approx(np.cos(chi), abs=1e-14)
            assert np.linalg.norm(a2) == pytest.approx(1.0, abs=1e-14)
