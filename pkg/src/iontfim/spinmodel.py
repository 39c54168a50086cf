"""Transverse-field Ising Hamiltonian on the 2^N z-basis.

H(B) = -sum_{i<j} J_ij sx_i sx_j - B * sum_i sz_i

Bit convention (used identically everywhere): bit i of a basis index k
encodes the sz_i eigenvalue, 0-bit = up (+1), 1-bit = down (-1), so the
all-up initial state is index 0.  The x-x part is kept as a sparse
matrix (each sx_i sx_j term is the XOR-flip permutation of two bits);
the field term is the diagonal magnetization.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverFailure
from .trapchain import CouplingMatrix

SPIN_CAP = 16
DENSE_CAP = 4096


@dataclass(frozen=True)
class SpinBasis:
    """Dimension bookkeeping for the 2^N z-basis."""

    n_spins: int

    def __post_init__(self):
        if not (1 <= self.n_spins <= SPIN_CAP):
            raise ValueError(f"n_spins must be in [1, {SPIN_CAP}]")

    @property
    def dimension(self):
        return 1 << self.n_spins


def _popcount(idx):
    # numpy 2.x: bit_count on integer arrays
    return np.bitwise_count(idx)


@lru_cache(maxsize=8)
def _magnetization(n_spins):
    """Diagonal of sum_i sz_i: N - 2*popcount(k)."""
    idx = np.arange(1 << n_spins, dtype=np.int64)
    return (n_spins - 2 * _popcount(idx).astype(np.int64)).astype(np.float64)


def _coupling_operator(jmat):
    """Sparse matrix of -sum_{i<j} J_ij sx_i sx_j."""
    n = jmat.shape[0]
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    rows, cols, data = [], [], []
    for i in range(n):
        for jj in range(i + 1, n):
            if jmat[i, jj] == 0.0:
                continue
            mask = (1 << i) | (1 << jj)
            rows.append(idx)
            cols.append(idx ^ mask)
            data.append(np.full(dim, -jmat[i, jj]))
    if not rows:
        return sp.csr_matrix((dim, dim))
    coo = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))
    return coo.tocsr()


class HamiltonianHandle:
    """Matrix-free applicator for H(B), with dense materialization and a
    cached full eigensystem for dimensions <= DENSE_CAP.

    Immutable after construction; `with_field` shares the coupling part.
    """

    def __init__(self, couplings: CouplingMatrix, field: float, dense_cap: int = DENSE_CAP):
        self.basis = SpinBasis(couplings.n_ions)
        self.couplings = couplings
        self.field = float(field)
        self.dense_cap = dense_cap
        self._hx = _coupling_operator(couplings.j)
        self._mag = _magnetization(self.basis.n_spins)
        self._dense = None
        self._eig = None

    def with_field(self, field):
        other = object.__new__(HamiltonianHandle)
        other.basis = self.basis
        other.couplings = self.couplings
        other.field = float(field)
        other.dense_cap = self.dense_cap
        other._hx = self._hx
        other._mag = self._mag
        other._dense = None
        other._eig = None
        return other

    @property
    def dimension(self):
        return self.basis.dimension

    @property
    def magnetization_diagonal(self):
        return self._mag

    def apply(self, v):
        v = np.asarray(v)
        if v.shape[0] != self.dimension:
            raise ValueError("vector length does not match Hamiltonian dimension")
        mag = self._mag if v.ndim == 1 else self._mag[:, None]
        return self._hx @ v - self.field * (mag * v)

    def dense(self):
        if self.dimension > self.dense_cap:
            raise ValueError(f"dense materialization capped at dimension {self.dense_cap}")
        if self._dense is None:
            h = self._hx.toarray()
            h[np.diag_indices_from(h)] -= self.field * self._mag
            self._dense = h
        return self._dense

    def eigensystem(self):
        """Full (energies, vectors) for dense-capable dimensions, cached."""
        if self._eig is None:
            self._eig = np.linalg.eigh(self.dense())
        return self._eig

    def as_linear_operator(self):
        return spla.LinearOperator(
            (self.dimension, self.dimension), matvec=self.apply, dtype=np.float64)


def hamiltonian(couplings: CouplingMatrix, field: float, dense_cap: int = DENSE_CAP):
    return HamiltonianHandle(couplings, field, dense_cap)


def apply_hamiltonian(h: HamiltonianHandle, v):
    return h.apply(v)


def low_spectrum(h: HamiltonianHandle, k: int):
    """k lowest eigenpairs, energies ascending, states in columns.

    Dense path below the cap; Lanczos (ARPACK) above, with an explicit
    residual check at 1e-9 per pair.
    """
    if k > h.dimension:
        raise ValueError("k exceeds Hilbert-space dimension")
    if h.dimension <= h.dense_cap:
        evals, evecs = h.eigensystem()
        return evals[:k].copy(), evecs[:, :k].copy()
    evals, evecs = spla.eigsh(h.as_linear_operator(), k=k, which="SA",
                              maxiter=5000, tol=0)
    order = np.argsort(evals)
    evals, evecs = evals[order], evecs[:, order]
    resid = np.linalg.norm(h.apply(evecs) - evecs * evals, axis=0)
    if np.any(resid > 1e-9):
        raise SolverFailure(f"Lanczos residuals {resid} exceed 1e-9")
    return evals, evecs


def spin_reflection_diagonal(n_spins):
    """Diagonal of the spin-reflection parity prod_i sz_i: (-1)^popcount."""
    idx = np.arange(1 << n_spins, dtype=np.int64)
    return 1.0 - 2.0 * (_popcount(idx).astype(np.int64) & 1)


def site_reversal_permutation(n_spins):
    """Index permutation implementing the spatial parity i -> N+1-i
    (bit reversal within the N-bit index)."""
    dim = 1 << n_spins
    perm = np.zeros(dim, dtype=np.int64)
    for bit in range(n_spins):
        perm |= ((np.arange(dim) >> bit) & 1) << (n_spins - 1 - bit)
    return perm


@dataclass(frozen=True)
class SectorLabels:
    """Per-eigenstate parity labels, +-1 (NaN where undetermined)."""

    spin_reflection: np.ndarray
    spatial: np.ndarray


def _label_groups(states, energies, apply_p, tol=1e-8):
    """Rotate within degenerate groups to diagonalize a parity operator;
    return labels and the rotated states."""
    m = states.shape[1]
    labels = np.full(m, np.nan)
    states = states.copy()
    scale = max(np.max(np.abs(energies)), 1.0)
    start = 0
    while start < m:
        stop = start + 1
        while stop < m and abs(energies[stop] - energies[start]) < 1e-9 * scale:
            stop += 1
        block = states[:, start:stop]
        pmat = block.conj().T @ apply_p(block)
        pmat = 0.5 * (pmat + pmat.conj().T)
        w, u = np.linalg.eigh(pmat)
        block = block @ u
        states[:, start:stop] = block
        for a, val in enumerate(w):
            expect = np.vdot(block[:, a], apply_p(block[:, a])).real
            if abs(expect) > 1.0 - tol:
                labels[start + a] = np.sign(expect)
        start = stop
    return labels, states


def sector_labels(states, h: HamiltonianHandle, energies=None) -> SectorLabels:
    """Spin-reflection and spatial parity labels for eigenstates.

    Degenerate eigenspaces are rotated to diagonalize the commuting
    parity operators; labels that cannot be pinned to +-1 within 1e-8
    come back NaN.  Spatial parity is only defined when the coupling
    matrix is site-reversal symmetric (all NaN otherwise).
    """
    states = np.asarray(states)
    if energies is None:
        energies = np.array([np.vdot(states[:, a], h.apply(states[:, a])).real
                             for a in range(states.shape[1])])
    zdiag = spin_reflection_diagonal(h.basis.n_spins)
    spin_labels, states = _label_groups(states, energies, lambda b: (b.T * zdiag).T)
    jmat = h.couplings.j
    if not np.allclose(jmat, jmat[::-1, ::-1], atol=1e-12):
        return SectorLabels(spin_labels, np.full_like(spin_labels, np.nan))
    perm = site_reversal_permutation(h.basis.n_spins)
    spatial_labels, _ = _label_groups(states, energies, lambda b: b[perm])
    return SectorLabels(spin_labels, spatial_labels)


def x_amplitudes(v):
    """Project a z-basis state onto the x-product basis.

    Normalized fast Walsh-Hadamard transform; x-configuration index t
    has bit_i(t)=0 for s_i=+x and 1 for s_i=-x.  Self-inverse.
    """
    a = np.array(v, dtype=complex)
    n = a.size
    h = 1
    while h < n:
        a = a.reshape(n // (2 * h), 2, h)
        x = a[:, 0, :].copy()
        y = a[:, 1, :].copy()
        a[:, 0, :] = x + y
        a[:, 1, :] = x - y
        a = a.reshape(n)
        h *= 2
    return a / np.sqrt(n)


def classical_energies(couplings: CouplingMatrix):
    """E(s) = -sum_{i<j} J_ij s_i s_j for every x-configuration index."""
    n = couplings.n_ions
    dim = 1 << n
    bits = ((np.arange(dim)[:, None] >> np.arange(n)[None, :]) & 1)
    s = 1.0 - 2.0 * bits
    return -0.5 * np.einsum("ki,ij,kj->k", s, couplings.j, s)


@dataclass(frozen=True)
class GroundManifold:
    """Degenerate classical (zero-field) ground configurations."""

    indices: np.ndarray      # x-configuration indices
    signs: np.ndarray        # degeneracy x N matrix of +-1
    energy: float

    @property
    def degeneracy(self):
        return len(self.indices)


def classical_ground_manifold(couplings: CouplingMatrix) -> GroundManifold:
    """Exhaustive scan of the 2^N sign strings.

    Configurations within 1e-9*|J_0| of the minimum are merged into the
    manifold; the manifold is closed under the global flip s -> -s.
    """
    if couplings.n_ions > 24:
        raise ValueError("classical enumeration capped at N=24")
    e = classical_energies(couplings)
    e_min = float(np.min(e))
    scale = abs(couplings.j0) if couplings.j0 != 0 else max(np.max(np.abs(couplings.j)), 1.0)
    idx = np.flatnonzero(e <= e_min + 1e-9 * scale)
    n = couplings.n_ions
    bits = ((idx[:, None] >> np.arange(n)[None, :]) & 1)
    return GroundManifold(idx, 1 - 2 * bits, e_min)
