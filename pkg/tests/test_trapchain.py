import numpy as np
import pytest
from scipy.optimize import bisect, minimize

from iontfim import (
    TrapConfig,
    coupling_matrix,
    equilibrium_positions,
    fit_power_law,
    synthetic_couplings,
    transverse_modes,
    trap_couplings,
)
from iontfim.errors import ChainInstabilityError, FitUndefinedError, ResonanceError
from iontfim.units import recoil_frequency_khz


def default_trap(n=10, axial=620.0):
    return TrapConfig(n, axial, 4800.0, 4900.0, 600.0, 18.5)


class TestEquilibrium:
    def test_single_ion_at_center(self):
        assert equilibrium_positions(1).positions.tolist() == [0.0]

    def test_two_ions_force_balance(self):
        # oracle: outer ion force balance u = 1/(2u)^2 solved by bisection
        root = bisect(lambda u: u - 1.0 / (2 * u) ** 2, 0.1, 2.0, xtol=1e-14)
        got = equilibrium_positions(2).positions
        assert got == pytest.approx([-root, root], abs=1e-10)
        assert root == pytest.approx(0.25 ** (1.0 / 3.0), abs=1e-12)

    def test_three_ions_minimization_oracle(self):
        def v(u):
            du = np.abs(u[:, None] - u[None, :])
            np.fill_diagonal(du, np.inf)
            return 0.5 * np.sum(u**2) + 0.5 * np.sum(1.0 / du)

        res = minimize(lambda u: v(np.asarray(u)), [-1.0, 0.0, 1.0],
                       method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
        got = equilibrium_positions(3).positions
        assert got == pytest.approx(np.sort(res.x), abs=1e-8)
        assert got[2] == pytest.approx(1.25 ** (1.0 / 3.0), abs=1e-9)

    @pytest.mark.parametrize("n", range(2, 21))
    def test_mirror_symmetry_and_order(self, n):
        u = equilibrium_positions(n).positions
        assert np.max(np.abs(u + u[::-1])) < 1e-10
        assert np.all(np.diff(u) > 0)

    def test_gradient_converged(self):
        u = equilibrium_positions(12).positions
        du = u[:, None] - u[None, :]
        np.fill_diagonal(du, np.inf)
        grad = u - np.sum(np.sign(du) / du**2, axis=1)
        assert np.linalg.norm(grad) < 1e-11

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            equilibrium_positions(0)


class TestModes:
    def test_single_ion(self):
        cfg = default_trap(n=1)
        ms = transverse_modes(equilibrium_positions(1), cfg)
        assert ms.frequencies.tolist() == [4800.0]
        assert ms.vectors.tolist() == [[1.0]]

    def test_two_ion_closed_form(self):
        cfg = default_trap(n=2)
        ms = transverse_modes(equilibrium_positions(2), cfg)
        assert ms.frequencies[0] == pytest.approx(4800.0, rel=1e-12)
        assert ms.frequencies[1] == pytest.approx(np.sqrt(4800.0**2 - 620.0**2), rel=1e-12)
        assert np.abs(ms.vectors[:, 0]) == pytest.approx([1, 1] / np.sqrt(2), abs=1e-12)
        v = ms.vectors[:, 1]
        assert np.abs(v @ [1, -1] / np.sqrt(2)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 5, 10])
    def test_com_mode_uniform_at_top(self, n):
        cfg = default_trap(n=n)
        ms = transverse_modes(equilibrium_positions(n), cfg)
        assert ms.frequencies[0] == pytest.approx(cfg.transverse_freq, rel=1e-10)
        uniform = np.ones(n) / np.sqrt(n)
        assert np.abs(ms.vectors[:, 0] @ uniform) == pytest.approx(1.0, abs=1e-10)

    def test_orthonormality(self):
        ms = transverse_modes(equilibrium_positions(10), default_trap())
        gram = ms.vectors.T @ ms.vectors
        assert np.max(np.abs(gram - np.eye(10))) < 1e-10

    def test_uniform_vector_exact_eigenvector(self):
        # center-of-mass rigidity: Coulomb terms cancel exactly on the uniform vector
        n = 8
        cfg = default_trap(n=n)
        u = equilibrium_positions(n).positions
        ratio2 = (cfg.transverse_freq / cfg.axial_freq) ** 2
        du = u[:, None] - u[None, :]
        np.fill_diagonal(du, np.inf)
        inv3 = np.abs(1.0 / du**3)
        a = inv3.copy()
        np.fill_diagonal(a, ratio2 - np.sum(inv3, axis=1))
        ones = np.ones(n) / np.sqrt(n)
        assert np.linalg.norm(a @ ones - ratio2 * ones) < 1e-10

    def test_zigzag_instability(self):
        cfg = TrapConfig(10, 620.0, 625.0, 4900.0, 600.0, 18.5)
        with pytest.raises(ChainInstabilityError):
            transverse_modes(equilibrium_positions(10), cfg)


class TestCouplings:
    def test_two_ion_closed_form(self):
        cfg = default_trap(n=2)
        chain = equilibrium_positions(2)
        ms = transverse_modes(chain, cfg)
        cm = coupling_matrix(chain, ms, cfg)
        mu, om = cfg.detuning, ms.frequencies
        expect = (cfg.rabi_freq**2 * cfg.recoil_freq / 2.0) * (
            1.0 / (mu**2 - om[0] ** 2) - 1.0 / (mu**2 - om[1] ** 2))
        assert cm.j[0, 1] == pytest.approx(expect, rel=1e-12)
        assert cm.j0 == pytest.approx(expect, rel=1e-12)

    def test_mode_sum_cross_check(self):
        cfg = default_trap(n=6)
        chain = equilibrium_positions(6)
        ms = transverse_modes(chain, cfg)
        cm = coupling_matrix(chain, ms, cfg)
        for i in range(6):
            for jj in range(6):
                if i == jj:
                    assert cm.j[i, jj] == 0.0
                    continue
                s = sum(ms.vectors[i, m] * ms.vectors[jj, m]
                        / (cfg.detuning**2 - ms.frequencies[m] ** 2)
                        for m in range(6))
                expect = cfg.rabi_freq**2 * cfg.recoil_freq * s
                assert cm.j[i, jj] == pytest.approx(expect, rel=1e-12)

    def test_symmetry_and_zero_diagonal(self):
        cm = trap_couplings(default_trap())
        assert np.array_equal(cm.j, cm.j.T)
        assert np.all(np.diagonal(cm.j) == 0.0)

    def test_nearest_neighbor_sign_uniform_above_modes(self):
        # detuning above every mode: one consistent nearest-neighbor sign
        cm = trap_couplings(default_trap())
        nn = np.diagonal(cm.j, 1)
        assert np.all(np.sign(nn) == np.sign(nn[0]))

    def test_j0_magnitude_near_one_khz(self):
        cm = trap_couplings(default_trap())
        assert 0.5 < abs(cm.j0) < 2.0

    def test_resonance_error(self):
        cfg = default_trap(n=4)
        chain = equilibrium_positions(4)
        ms = transverse_modes(chain, cfg)
        bad = TrapConfig(4, 620.0, 4800.0, float(ms.frequencies[1]), 600.0, 18.5)
        with pytest.raises(ResonanceError):
            coupling_matrix(chain, ms, bad)

    def test_alpha_across_axial_sweep(self):
        alphas = [trap_couplings(default_trap(axial=ax)).alpha_fit
                  for ax in np.linspace(620.0, 950.0, 6)]
        assert all(0.7 <= a <= 1.2 for a in alphas)


class TestPowerLawFit:
    def test_exact_inverse_distance(self):
        j = synthetic_couplings(8, 1.0, 1.0)
        assert fit_power_law(j) == pytest.approx(1.0, abs=1e-12)

    def test_exact_cubic(self):
        j = synthetic_couplings(8, -2.0, 3.0)
        assert fit_power_law(j) == pytest.approx(3.0, abs=1e-12)

    def test_round_trip_alpha(self):
        assert synthetic_couplings(8, -1.0, 1.05).alpha_fit == pytest.approx(1.05)
        assert fit_power_law(synthetic_couplings(8, -1.0, 1.05)) == pytest.approx(1.05, abs=1e-12)

    def test_single_distance_undefined(self):
        j = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        with pytest.raises(FitUndefinedError):
            fit_power_law(j)


class TestSynthetic:
    def test_two_ion_entry(self):
        assert synthetic_couplings(2, -1.0, 1.0).j[0, 1] == -1.0

    def test_next_nearest(self):
        assert synthetic_couplings(3, -1.0, 1.0).j[0, 2] == -0.5

    def test_preconditions(self):
        with pytest.raises(ValueError):
            synthetic_couplings(1, 1.0, 1.0)
        with pytest.raises(ValueError):
            synthetic_couplings(4, 1.0, 0.0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrapConfig(0, 620.0, 4800.0, 4900.0, 600.0, 18.5)
        with pytest.raises(ValueError):
            TrapConfig(4, 620.0, 4800.0, -1.0, 600.0, 18.5)
        with pytest.raises(ValueError):
            TrapConfig(4, 4800.0, 620.0, 4900.0, 600.0, 18.5)

    def test_from_ion_recoil(self):
        cfg = TrapConfig.from_ion(4, 620.0, 4800.0, 4900.0, 600.0)
        assert cfg.recoil_freq == pytest.approx(18.516, abs=0.01)
        assert recoil_frequency_khz(171.0, 355.0) == pytest.approx(18.516, abs=0.01)
