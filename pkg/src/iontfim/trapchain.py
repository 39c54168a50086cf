"""Ion-chain trap physics: equilibrium positions, transverse normal
modes, and the laser-induced Ising exchange matrix.

Couplings follow the mode-sum expression
    J_ij = Omega^2 * nu_R * sum_m b_i^m b_j^m / (mu^2 - omega_m^2)
with all frequencies in kHz.  A synthetic power-law generator is
provided for controlled-exponent runs.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ChainInstabilityError, FitUndefinedError, ResonanceError, SolverFailure
from .units import recoil_frequency_khz

_NEWTON_TOL = 1e-12
_NEWTON_CAP = 500


@dataclass(frozen=True)
class TrapConfig:
    """Static trap and laser parameters (frequencies in kHz)."""

    n_ions: int
    axial_freq: float
    transverse_freq: float
    detuning: float
    rabi_freq: float
    recoil_freq: float

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError("n_ions must be >= 1")
        for name in ("axial_freq", "transverse_freq", "detuning", "rabi_freq", "recoil_freq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.transverse_freq <= self.axial_freq:
            raise ValueError("transverse_freq must exceed axial_freq (linear chain stability)")

    @classmethod
    def from_ion(cls, n_ions, axial_freq, transverse_freq, detuning, rabi_freq,
                 mass_amu=171.0, wavelength_nm=355.0):
        """Build a config computing the recoil frequency from (M, lambda)."""
        return cls(n_ions, axial_freq, transverse_freq, detuning, rabi_freq,
                   recoil_frequency_khz(mass_amu, wavelength_nm))


@dataclass(frozen=True)
class IonChain:
    """Dimensionless equilibrium coordinates, sorted ascending.

    The length scale l = (e^2 / 4 pi eps0 M w_ax^2)^(1/3) is implicit.
    """

    positions: np.ndarray

    @property
    def n_ions(self):
        return len(self.positions)


@dataclass(frozen=True)
class ModeSpectrum:
    """Transverse normal modes: frequencies (kHz, descending) and the
    orthonormal eigenvector matrix with column m = mode m."""

    frequencies: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric Ising exchange matrix in kHz with zero diagonal.

    j0 is the (signed) average nearest-neighbor coupling; alpha_fit is
    the all-pairs power-law exponent (NaN when n < 3).
    """

    j: np.ndarray
    j0: float
    alpha_fit: float = field(default=float("nan"))

    @property
    def n_ions(self):
        return self.j.shape[0]


def _chain_potential_grad_hess(u):
    n = len(u)
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, np.inf)
    inv2 = 1.0 / du**2
    inv3 = np.abs(1.0 / du**3)
    grad = u - np.sum(np.sign(du) * inv2, axis=1)
    hess = -2.0 * inv3
    np.fill_diagonal(hess, 0.0)
    np.fill_diagonal(hess, 1.0 + 2.0 * np.sum(inv3, axis=1))
    return grad, hess


def equilibrium_positions(n: int) -> IonChain:
    """Equilibrium positions minimizing u^2/2 + Coulomb repulsion.

    Damped Newton from an equally spaced seed; the potential is convex
    on the ordered cone, so the iteration converges quadratically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return IonChain(np.zeros(1))
    u = 1.26 * (np.arange(n) - (n - 1) / 2.0)
    for _ in range(_NEWTON_CAP):
        grad, hess = _chain_potential_grad_hess(u)
        if np.linalg.norm(grad) < _NEWTON_TOL:
            break
        step = np.linalg.solve(hess, grad)
        lam = 1.0
        while lam > 1e-6:
            trial = u - lam * step
            if np.all(np.diff(trial) > 0):
                g_trial, _ = _chain_potential_grad_hess(trial)
                if np.linalg.norm(g_trial) < np.linalg.norm(grad):
                    break
            lam *= 0.5
        u = u - lam * step
    else:
        raise SolverFailure(f"equilibrium solve did not converge for n={n}")
    u = 0.5 * (u - u[::-1])  # enforce exact mirror symmetry of the minimizer
    return IonChain(u)


def transverse_modes(chain: IonChain, cfg: TrapConfig) -> ModeSpectrum:
    """Diagonalize the transverse Hessian of the chain.

    Frequencies come out in kHz, sorted descending; the highest mode is
    the center-of-mass mode at exactly the transverse trap frequency.
    """
    u = chain.positions
    n = len(u)
    if n != cfg.n_ions:
        raise ValueError("chain size does not match cfg.n_ions")
    ratio2 = (cfg.transverse_freq / cfg.axial_freq) ** 2
    if n == 1:
        return ModeSpectrum(np.array([cfg.transverse_freq]), np.ones((1, 1)))
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, np.inf)
    inv3 = np.abs(1.0 / du**3)
    a = inv3.copy()
    np.fill_diagonal(a, ratio2 - np.sum(inv3, axis=1))
    evals, evecs = np.linalg.eigh(a)
    if evals[0] <= 0:
        raise ChainInstabilityError(
            f"negative transverse Hessian eigenvalue {evals[0]:.3e} (zig-zag regime)")
    order = np.argsort(evals)[::-1]
    freqs = cfg.axial_freq * np.sqrt(evals[order])
    vecs = evecs[:, order]
    # fix a sign convention: largest-magnitude entry positive
    for m in range(n):
        k = np.argmax(np.abs(vecs[:, m]))
        if vecs[k, m] < 0:
            vecs[:, m] = -vecs[:, m]
    return ModeSpectrum(freqs, vecs)


def coupling_matrix(chain: IonChain, modes: ModeSpectrum, cfg: TrapConfig) -> CouplingMatrix:
    """Mode-sum exchange matrix J_ij for the given trap and laser."""
    w = modes.frequencies
    rel = np.abs(cfg.detuning - w) / w
    if np.any(rel < 1e-9):
        m = int(np.argmin(rel))
        raise ResonanceError(
            f"detuning {cfg.detuning} kHz collides with mode {m} at {w[m]} kHz")
    denom = cfg.detuning**2 - w**2
    b = modes.vectors
    j = cfg.rabi_freq**2 * cfg.recoil_freq * (b / denom) @ b.T
    np.fill_diagonal(j, 0.0)
    j = 0.5 * (j + j.T)
    n = len(w)
    j0 = float(np.mean(np.diagonal(j, 1))) if n >= 2 else 0.0
    alpha = float("nan")
    if n >= 3:
        alpha = fit_power_law(j)
    return CouplingMatrix(j, j0, alpha)


def fit_power_law(j) -> float:
    """All-pairs least-squares exponent of |J_ij| ~ 1/|i-j|^alpha.

    Index distance, not physical distance; zero entries are excluded.
    """
    mat = j.j if isinstance(j, CouplingMatrix) else np.asarray(j)
    n = mat.shape[0]
    iu, ju = np.triu_indices(n, 1)
    vals = np.abs(mat[iu, ju])
    dist = (ju - iu).astype(float)
    keep = vals > 0
    vals, dist = vals[keep], dist[keep]
    if len(np.unique(dist)) < 2:
        raise FitUndefinedError("need at least two distinct index distances to fit")
    slope, _ = np.polyfit(np.log(dist), np.log(vals), 1)
    return float(-slope)


def synthetic_couplings(n: int, j0: float, alpha: float) -> CouplingMatrix:
    """Idealized power-law matrix J_ij = j0 / |i-j|^alpha."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    np.fill_diagonal(dist, np.inf)
    j = j0 / dist**alpha
    return CouplingMatrix(j, float(j0), float(alpha))


def trap_couplings(cfg: TrapConfig) -> CouplingMatrix:
    """Convenience pipeline: positions -> modes -> couplings."""
    chain = equilibrium_positions(cfg.n_ions)
    modes = transverse_modes(chain, cfg)
    return coupling_matrix(chain, modes, cfg)
