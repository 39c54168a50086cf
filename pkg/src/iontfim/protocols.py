"""State-preparation protocols.

Bang-bang: instantaneous quench to a hold field B_q (sudden
approximation, state unchanged), constant-field evolution for a hold
time tau, then a quench to zero handled by projecting onto the
x-product eigenbasis of the field-free Hamiltonian.

Locally adiabatic: adiabaticity parameter gamma from the gap profile,
field ramp from the rate equation dB/dt = -Delta^2(B)/gamma, and
Crank-Nicolson propagation of the time-dependent Hamiltonian.

Initial state for both: all spins up along z (index 0), i.e. the
ground state of the B -> infinity Hamiltonian.
"""

from dataclasses import dataclass

import numpy as np
import scipy.integrate as integrate
import scipy.sparse.linalg as spla

from .errors import SolverFailure
from .gapspec import GapProfile
from .spinmodel import (
    GroundManifold,
    HamiltonianHandle,
    classical_energies,
    classical_ground_manifold,
    hamiltonian,
    x_amplitudes,
)
from .trapchain import CouplingMatrix
from .units import RAD_PER_CYCLE

HISTOGRAM_BINS = 64
CN_STEPS = 4096
CN_P_TOL = 1e-6
LINSOLVE_TOL = 1e-12


@dataclass(frozen=True)
class BangBangParams:
    """Quench field (units of |J_0|) and hold time (ms)."""

    quench_field: float
    hold_time: float

    def __post_init__(self):
        if self.quench_field < 0 or self.hold_time < 0:
            raise ValueError("quench_field and hold_time must be >= 0")


@dataclass(frozen=True)
class RampProfile:
    """Field schedule B(t): times in ms from 0 to t_f, fields in kHz
    from B_0 down to 0, plus the adiabaticity parameter gamma."""

    times: np.ndarray
    fields: np.ndarray
    gamma: float

    def __post_init__(self):
        if len(self.times) != len(self.fields) or len(self.times) == 0:
            raise ValueError("times and fields must be nonempty and equal length")
        if np.any(np.diff(self.times) <= 0) and len(self.times) > 1:
            raise ValueError("times must be strictly increasing")
        span = max(abs(self.fields[0]), 1.0)
        if np.any(np.diff(self.fields) > 1e-12 * span):
            raise ValueError("fields must be non-increasing")

    @property
    def t_f(self):
        return float(self.times[-1])

    @property
    def b0(self):
        return float(self.fields[0])


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of one protocol run.

    The excitation histogram bins the non-manifold x-configuration
    weight by classical energy above the ground manifold, so the bin
    probabilities and ground_probability sum to 1.
    """

    final_state: np.ndarray
    ground_probability: float
    excitation_energies: np.ndarray
    excitation_probabilities: np.ndarray
    field_integral: float

    def __post_init__(self):
        norm = np.linalg.norm(self.final_state)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"final state norm {norm} deviates from 1")
        total = self.ground_probability + float(np.sum(self.excitation_probabilities))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")


def ground_probability(v, manifold: GroundManifold) -> float:
    """Total squared x-amplitude on the classical ground manifold."""
    a = x_amplitudes(v)
    return float(np.sum(np.abs(a[manifold.indices]) ** 2))


def excitation_histogram(v, couplings: CouplingMatrix, n_bins=HISTOGRAM_BINS,
                         include_ground=True):
    """Histogram of x-basis weight versus classical excitation energy.

    Returns (bin_centers_khz, probabilities).  With include_ground
    False, configurations inside the ground manifold are dropped (used
    by ProtocolResult so its probabilities complement P exactly).
    """
    e = classical_energies(couplings)
    excite = e - np.min(e)
    weights = np.abs(x_amplitudes(v)) ** 2
    if not include_ground:
        manifold = classical_ground_manifold(couplings)
        weights = weights.copy()
        weights[manifold.indices] = 0.0
    width = np.max(excite) / n_bins if np.max(excite) > 0 else 1.0
    edges = np.arange(n_bins + 1) * width
    edges[-1] += 1e-12 * max(width, 1.0)  # top configuration lands in the last bin
    probs, _ = np.histogram(excite, bins=edges, weights=weights)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, probs


def field_integral(ramp_or_params, j0_khz=None) -> float:
    """Integral of B(t) dt in kHz*ms (phonon-creation proxy)."""
    if isinstance(ramp_or_params, RampProfile):
        return float(np.trapezoid(ramp_or_params.fields, ramp_or_params.times))
    if isinstance(ramp_or_params, BangBangParams):
        if j0_khz is None:
            raise ValueError("bang-bang field integral needs the |J_0| scale in kHz")
        return ramp_or_params.quench_field * abs(j0_khz) * ramp_or_params.hold_time
    raise TypeError("expected a RampProfile or BangBangParams")


def _result(state, couplings, manifold, fint):
    p = ground_probability(state, manifold)
    centers, probs = excitation_histogram(state, couplings, include_ground=False)
    return ProtocolResult(state, p, centers, probs, fint)


def _hold_evolve_dense(h: HamiltonianHandle, psi, tau):
    energies, vectors = h.eigensystem()
    c = vectors.T @ psi
    return vectors @ (c * np.exp(-1j * RAD_PER_CYCLE * energies * tau))


def _lanczos_step(apply_h, psi, dt, m=30):
    """One Krylov step of exp(-i*2pi*H*dt) applied to psi."""
    dim = psi.shape[0]
    m = min(m, dim)
    v = np.zeros((m, dim), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m - 1) if m > 1 else np.zeros(0)
    v[0] = psi / np.linalg.norm(psi)
    w = apply_h(v[0])
    alpha[0] = np.vdot(v[0], w).real
    w = w - alpha[0] * v[0]
    used = 1
    for jj in range(1, m):
        b = np.linalg.norm(w)
        if b < 1e-14:
            break
        beta[jj - 1] = b
        v[jj] = w / b
        w = apply_h(v[jj]) - b * v[jj - 1]
        alpha[jj] = np.vdot(v[jj], w).real
        w = w - alpha[jj] * v[jj]
        used = jj + 1
    t = np.diag(alpha[:used]) + np.diag(beta[:used - 1], 1) + np.diag(beta[:used - 1], -1)
    evals, evecs = np.linalg.eigh(t)
    phases = np.exp(-1j * RAD_PER_CYCLE * evals * dt)
    small = evecs @ (phases * evecs[0])
    return np.linalg.norm(psi) * (v[:used].T @ small)


def _hold_evolve_krylov(h: HamiltonianHandle, psi, tau, fidelity_tol=1e-9):
    """Constant-field Krylov propagation, step-halved to convergence."""
    h_scale = 0.5 * np.sum(np.abs(h.couplings.j)) + h.basis.n_spins * abs(h.field)
    n_steps = max(1, int(np.ceil(tau * max(h_scale, 1.0) / 8.0)))
    prev = None
    for _ in range(20):
        state = psi.astype(complex)
        dt = tau / n_steps
        for _ in range(n_steps):
            state = _lanczos_step(h.apply, state, dt)
        state = state / np.linalg.norm(state)
        if prev is not None and 1.0 - abs(np.vdot(prev, state)) < fidelity_tol:
            return state
        prev = state
        n_steps *= 2
    raise SolverFailure("Krylov hold propagation did not reach the fidelity target")


def bangbang_run(couplings: CouplingMatrix, params: BangBangParams) -> ProtocolResult:
    """Quench to B_q, hold for tau at constant field, quench to zero."""
    h = hamiltonian(couplings, params.quench_field * abs(couplings.j0))
    psi = np.zeros(h.dimension, dtype=complex)
    psi[0] = 1.0  # all spins up along z
    if params.hold_time > 0:
        if h.dimension <= h.dense_cap:
            psi = _hold_evolve_dense(h, psi, params.hold_time)
        else:
            psi = _hold_evolve_krylov(h, psi, params.hold_time)
    psi = psi / np.linalg.norm(psi)
    manifold = classical_ground_manifold(couplings)
    return _result(psi, couplings, manifold,
                   field_integral(params, couplings.j0))


def la_gamma(profile: GapProfile, t_f: float) -> float:
    """Adiabaticity parameter: t_f over the integral of 1/Delta^2."""
    nodes = profile.fields_khz
    val, err = integrate.quad(lambda b: 1.0 / profile.gap(b) ** 2,
                              0.0, profile.b0, epsrel=1e-6,
                              points=nodes, limit=10 * len(nodes))
    if not np.isfinite(val) or (val != 0 and err / abs(val) > 1e-5):
        raise SolverFailure(f"gap quadrature did not converge (value {val}, error {err})")
    return t_f / val


def la_ramp(profile: GapProfile, t_f: float, n_steps=CN_STEPS) -> RampProfile:
    """Integrate dB/dt = -Delta^2(B)/gamma from B_0 with classic RK4.

    By construction of gamma the trajectory reaches B=0 at exactly t_f;
    the endpoint is checked against 1e-3*B_0 and clamped to zero.
    """
    gamma = la_gamma(profile, t_f)
    b0 = profile.b0

    def rate(b):
        return -float(profile.gap(b)) ** 2 / gamma

    dt = t_f / n_steps
    fields = np.empty(n_steps + 1)
    fields[0] = b0
    b = b0
    for i in range(n_steps):
        k1 = rate(b)
        k2 = rate(b + 0.5 * dt * k1)
        k3 = rate(b + 0.5 * dt * k2)
        k4 = rate(b + dt * k3)
        b = b + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        fields[i + 1] = b
    if abs(fields[-1]) > 1e-3 * b0:
        raise SolverFailure(
            f"ramp endpoint {fields[-1]:.3e} kHz missed zero beyond 1e-3*B_0; "
            "refine the gap grid or quadrature")
    fields[-1] = 0.0
    fields = np.clip(fields, 0.0, b0)
    times = np.linspace(0.0, t_f, n_steps + 1)
    return RampProfile(times, fields, gamma)


def _solve_cayley(apply_h, z, rhs, x0, rtol=LINSOLVE_TOL, max_iter=400):
    """Matrix-free solve of (1 + z*H) x = rhs.

    z*H is a small perturbation of the identity for Crank-Nicolson step
    sizes, so fixed-point iteration x <- rhs - z*H*x converges
    geometrically; GMRES is the fallback for large steps.
    """
    rhs_norm = np.linalg.norm(rhs)
    dim = rhs.shape[0]
    x = x0
    prev_resid = np.inf
    for _ in range(max_iter):
        hx = apply_h(x)
        resid = np.linalg.norm(x + z * hx - rhs)
        if resid <= rtol * rhs_norm:
            return x
        if resid > prev_resid:  # contraction failed; step too large for the series
            break
        prev_resid = resid
        x = rhs - z * hx
    op = spla.LinearOperator((dim, dim),
                             matvec=lambda v: v + z * apply_h(v), dtype=complex)
    x, info = spla.gmres(op, rhs, x0=x0, rtol=rtol, atol=0.0,
                         restart=100, maxiter=50)
    if info != 0:
        resid = np.linalg.norm(x + z * apply_h(x) - rhs)
        if resid > rtol * rhs_norm:
            raise SolverFailure("Crank-Nicolson linear solve stagnated")
    return x


def _cn_sweep(h0: HamiltonianHandle, times, fields, psi, rtol=LINSOLVE_TOL):
    """One Crank-Nicolson pass over the ramp grid (midpoint field).

    The instantaneous mean energy is pulled out as an exact phase each
    step, so the Cayley approximation only acts on H minus its
    expectation; that keeps the error constant small without changing
    the scheme or its order.
    """
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        if dt == 0:
            continue
        b_mid = 0.5 * (fields[i] + fields[i + 1])
        h = h0.with_field(b_mid)
        hpsi = h.apply(psi)
        shift = np.vdot(psi, hpsi).real / np.vdot(psi, psi).real
        # half of the 2*pi angular factor: (1 + i*pi*dt*H') psi' = (1 - i*pi*dt*H') psi
        z = 1j * (RAD_PER_CYCLE / 2.0) * dt
        rhs = psi - z * (hpsi - shift * psi)
        apply_shifted = lambda v, h=h, s=shift: h.apply(v) - s * v
        psi = _solve_cayley(apply_shifted, z, rhs, psi, rtol)
        psi = np.exp(-1j * RAD_PER_CYCLE * shift * dt) * psi
    return psi


def cn_evolve(couplings: CouplingMatrix, ramp: RampProfile, p_tol=CN_P_TOL,
              max_halvings=6) -> ProtocolResult:
    """Crank-Nicolson propagation of the ramp, step-halved until the
    final ground probability moves by less than p_tol."""
    h0 = hamiltonian(couplings, 0.0)
    manifold = classical_ground_manifold(couplings)
    psi0 = np.zeros(h0.dimension, dtype=complex)
    psi0[0] = 1.0
    times, fields = ramp.times, ramp.fields
    prev_p = None
    for _ in range(max_halvings + 1):
        psi = _cn_sweep(h0, times, fields, psi0.copy())
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > 1e-8:
            raise SolverFailure(f"norm drift {drift:.2e} over the ramp exceeds 1e-8")
        p = ground_probability(psi / np.linalg.norm(psi), manifold)
        if prev_p is not None and abs(p - prev_p) < p_tol:
            break
        prev_p = p
        times, fields = _halve(times, fields)
    else:
        raise SolverFailure("Crank-Nicolson step halving did not converge the probability")
    psi = psi / np.linalg.norm(psi)
    return _result(psi, couplings, manifold, field_integral(ramp))


def _halve(times, fields):
    """Insert midpoints into the schedule (B is smooth, so linear
    midpoint insertion keeps second-order consistency)."""
    t2 = np.empty(2 * len(times) - 1)
    f2 = np.empty_like(t2)
    t2[::2], f2[::2] = times, fields
    t2[1::2] = 0.5 * (times[:-1] + times[1:])
    f2[1::2] = 0.5 * (fields[:-1] + fields[1:])
    return t2, f2


def locally_adiabatic_run(couplings: CouplingMatrix, t_f: float,
                          profile: GapProfile = None, n_grid=None,
                          threads=None) -> ProtocolResult:
    """Full locally adiabatic pipeline: gap profile -> gamma -> ramp -> CN."""
    from .gapspec import gap_profile
    if profile is None:
        kwargs = {} if n_grid is None else {"n_grid": n_grid}
        profile = gap_profile(couplings, threads=threads, **kwargs)
    ramp = la_ramp(profile, t_f)
    return cn_evolve(couplings, ramp)
