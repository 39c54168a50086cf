import numpy as np
import pytest
from scipy.integrate import quad

import reference as ref
from iontfim import (
    CouplingMatrix,
    GapProfile,
    coupled_gap,
    gap_profile,
    hamiltonian,
    synthetic_couplings,
)


def two_spin(j):
    return CouplingMatrix(np.array([[0.0, j], [j, 0.0]]), j)


class TestCoupledGap:
    @pytest.mark.parametrize("j", [1.0, -1.0, 0.7])
    @pytest.mark.parametrize("b", [0.3, 1.0, 4.2])
    def test_two_spin_closed_form(self, j, b):
        gap, idx = coupled_gap(hamiltonian(two_spin(j), b))
        assert gap == pytest.approx(2 * np.sqrt(4 * b**2 + j**2), rel=1e-12)
        assert idx == 3  # the upper even-sector state; odd states are uncoupled

    def test_two_spin_zero_field(self):
        gap, _ = coupled_gap(hamiltonian(two_spin(1.5), 0.0))
        assert gap == pytest.approx(3.0, rel=1e-12)

    def test_four_spin_brute_force_oracle(self):
        cm = synthetic_couplings(4, -1.0, 1.05)
        b = 5.0 * abs(cm.j0)
        h = ref.dense_hamiltonian(cm.j, b)
        evals, evecs = np.linalg.eigh(h)
        mag = np.diag(ref.dense_hamiltonian(np.zeros((4, 4)), -1.0))  # sum sz diagonal
        couplings_to_gs = np.abs(evecs.T @ (mag * evecs[:, 0]))
        coupled = [k for k in range(1, 16) if couplings_to_gs[k] > 1e-8 * 4]
        expect = evals[coupled[0]] - evals[0]
        gap, idx = coupled_gap(hamiltonian(cm, b))
        assert gap == pytest.approx(expect, rel=1e-10)
        assert idx == coupled[0]

    def test_states_below_selected_are_uncoupled(self):
        cm = synthetic_couplings(6, -1.0, 1.05)
        h = hamiltonian(cm, 0.8)
        gap, idx = coupled_gap(h)
        evals, evecs = h.eigensystem()
        mag = h.magnetization_diagonal
        scale = max(abs(evals[0]), 1.0)
        for k in range(1, idx):
            if evals[k] - evals[0] < 1e-9 * scale:
                continue  # ground-manifold member
            assert abs(evecs[:, k] @ (mag * evecs[:, 0])) <= 1e-8 * 6


class TestGapProfile:
    def test_two_spin_nodes_match_closed_form(self):
        cm = two_spin(-1.0)
        prof = gap_profile(cm, n_grid=32)
        expect = 2 * np.sqrt(4 * prof.fields_khz**2 + 1.0)
        assert np.max(np.abs(prof.gaps - expect)) < 1e-10

    def test_large_field_slope_four(self):
        cm = synthetic_couplings(4, -1.0, 1.05)
        b = 50.0 * abs(cm.j0)
        gap, _ = coupled_gap(hamiltonian(cm, b))
        assert gap / b == pytest.approx(4.0, rel=0.02)

    def test_afm_minimum_interior(self):
        cm = synthetic_couplings(10, -1.0, 1.05)
        prof = gap_profile(cm, n_grid=16)
        i = int(np.argmin(prof.gaps))
        assert 0.0 < prof.fields_khz[i] < prof.b0

    def test_interpolant_node_exact_and_bounded(self):
        cm = synthetic_couplings(4, -1.0, 1.05)
        prof = gap_profile(cm, n_grid=16)
        assert prof.gap(prof.fields_khz) == pytest.approx(prof.gaps, abs=1e-12)
        mid = 0.5 * (prof.fields_khz[:-1] + prof.fields_khz[1:])
        lo = np.minimum(prof.gaps[:-1], prof.gaps[1:])
        hi = np.maximum(prof.gaps[:-1], prof.gaps[1:])
        vals = prof.gap(mid)
        assert np.all(vals >= lo - 1e-12) and np.all(vals <= hi + 1e-12)

    def test_refinement_invariance_of_integral(self):
        cm = synthetic_couplings(4, -1.0, 1.05)

        def integral(n_grid):
            prof = gap_profile(cm, n_grid=n_grid)
            val, _ = quad(lambda b: 1.0 / prof.gap(b) ** 2, 0.0, prof.b0,
                          points=prof.fields_khz, limit=10 * len(prof.fields_khz))
            return val

        i16, i32 = integral(16), integral(32)
        assert abs(i32 - i16) / i16 < 0.005

    def test_grid_covers_range_and_positive(self):
        cm = synthetic_couplings(4, 1.0, 1.05)
        prof = gap_profile(cm)
        assert prof.fields_khz[0] == 0.0
        assert prof.b0 == pytest.approx(5.0 * abs(cm.j0))
        assert np.all(prof.gaps > 0)
        assert np.all(np.diff(prof.fields_khz) > 0)

    def test_minimum_grid_size(self):
        with pytest.raises(ValueError):
            gap_profile(synthetic_couplings(4, 1.0, 1.0), n_grid=8)

    def test_threads_deterministic(self):
        cm = synthetic_couplings(5, -1.0, 1.05)
        p1 = gap_profile(cm, n_grid=16, threads=1)
        p4 = gap_profile(cm, n_grid=16, threads=4)
        assert np.array_equal(p1.gaps, p4.gaps)
        assert np.array_equal(p1.fields_khz, p4.fields_khz)

    def test_constant_profile_and_clamp(self):
        prof = GapProfile.from_constant(2.0, 5.0)
        assert prof.gap(2.5) == pytest.approx(2.0)
        assert prof.gap(-1.0) == pytest.approx(2.0)  # clamped below
        assert prof.gap(99.0) == pytest.approx(2.0)  # clamped above
