"""Bang-bang parameter scans and the protocol comparison.

The (B_q, tau) scan reuses one diagonalization per quench-field column:
with the eigensystem in hand, every hold time is a phase rotation, and
only the x-amplitudes on the (few) ground-manifold configurations are
needed for the probability.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gapspec import gap_profile
from .protocols import (
    BangBangParams,
    field_integral,
    la_ramp,
    cn_evolve,
    _hold_evolve_krylov,
    ground_probability,
)
from .spinmodel import classical_ground_manifold, hamiltonian, x_amplitudes
from .trapchain import CouplingMatrix
from .units import RAD_PER_CYCLE

DEFAULT_B_AXIS = np.linspace(0.0, 5.0, 64)
DEFAULT_T_AXIS = np.linspace(0.0, 6.0, 64)


@dataclass(frozen=True)
class ScanGrid:
    """Ground-state probability over quench field (rows, units of
    |J_0|) and hold time (columns, ms)."""

    b_axis: np.ndarray
    t_axis: np.ndarray
    probabilities: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.probabilities
        if p.shape != (len(self.b_axis), len(self.t_axis)):
            raise ValueError("probability matrix shape does not match the axes")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probabilities outside [0, 1]")
        if np.any(np.diff(self.b_axis) <= 0) or np.any(np.diff(self.t_axis) <= 0):
            raise ValueError("scan axes must be strictly increasing")


@dataclass(frozen=True)
class ComparisonRow:
    """One system size of the bang-bang vs locally adiabatic table."""

    n_ions: int
    p_bangbang: float
    best_field: float
    best_hold: float
    p_locally_adiabatic: float
    ratio: float
    field_integral_bangbang: float
    field_integral_locally_adiabatic: float


def _column_probabilities(couplings, manifold, b_over_j0, t_axis):
    """P(tau) for one quench field, reusing a single propagator."""
    b_khz = b_over_j0 * abs(couplings.j0)
    h = hamiltonian(couplings, b_khz)
    psi0 = np.zeros(h.dimension, dtype=complex)
    psi0[0] = 1.0
    if h.dimension <= h.dense_cap:
        energies, vectors = h.eigensystem()
        c = vectors[0, :]  # overlap of each eigenstate with all-up
        # x-amplitudes of every eigenvector on the manifold rows only
        amps = np.empty((manifold.degeneracy, h.dimension), dtype=float)
        for k in range(h.dimension):
            amps[:, k] = x_amplitudes(vectors[:, k]).real[manifold.indices]
        out = np.empty(len(t_axis))
        for it, tau in enumerate(t_axis):
            phases = np.exp(-1j * RAD_PER_CYCLE * energies * tau)
            a = amps @ (c * phases)
            out[it] = np.sum(np.abs(a) ** 2)
        return out
    out = np.empty(len(t_axis))
    for it, tau in enumerate(t_axis):
        psi = psi0 if tau == 0 else _hold_evolve_krylov(h, psi0, tau)
        out[it] = ground_probability(psi / np.linalg.norm(psi), manifold)
    return out


def scan_bangbang(couplings: CouplingMatrix, b_axis=None, t_axis=None,
                  threads=None, metadata=None) -> ScanGrid:
    """Ground-state probability over the (B_q, tau) plane."""
    b_axis = DEFAULT_B_AXIS.copy() if b_axis is None else np.asarray(b_axis, dtype=float)
    t_axis = DEFAULT_T_AXIS.copy() if t_axis is None else np.asarray(t_axis, dtype=float)
    if b_axis.size == 0 or t_axis.size == 0:
        raise ValueError("scan axes must be nonempty")
    manifold = classical_ground_manifold(couplings)
    probs = np.empty((len(b_axis), len(t_axis)))

    def column(ib):
        return _column_probabilities(couplings, manifold, b_axis[ib], t_axis)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for ib, col in enumerate(pool.map(column, range(len(b_axis)))):
                probs[ib] = col
    else:
        for ib in range(len(b_axis)):
            probs[ib] = column(ib)
    meta = {"n_ions": couplings.n_ions, "alpha": couplings.alpha_fit,
            "j0_khz": couplings.j0}
    if metadata:
        meta.update(metadata)
    return ScanGrid(b_axis, t_axis, probs, meta)


def best_point(grid: ScanGrid, t_budget: float):
    """Highest-probability admissible point (tau <= budget).

    Ties break toward smaller hold time, then smaller quench field.
    """
    admissible = np.flatnonzero(grid.t_axis <= t_budget)
    if admissible.size == 0:
        raise ValueError("no hold times within the budget")
    sub = grid.probabilities[:, admissible]
    p_max = np.max(sub)
    ibs, its = np.nonzero(sub == p_max)
    order = np.lexsort((grid.b_axis[ibs], grid.t_axis[admissible][its]))
    ib, it = ibs[order[0]], admissible[its[order[0]]]
    params = BangBangParams(float(grid.b_axis[ib]), float(grid.t_axis[it]))
    return params, float(p_max)


def compare_protocols(coupling_factory, n_list, t_f: float, b_axis=None,
                      t_axis=None, threads=None, gap_grid=None):
    """Bang-bang optimum vs locally adiabatic ramp for each chain size.

    coupling_factory(n) supplies the exchange matrix; the bang-bang
    side is scanned and optimized under the t_f budget, the locally
    adiabatic side runs the gap -> gamma -> ramp -> Crank-Nicolson
    pipeline at the same total time.
    """
    rows = []
    for n in n_list:
        couplings = coupling_factory(n)
        grid = scan_bangbang(couplings, b_axis, t_axis, threads=threads)
        params, p_bb = best_point(grid, t_f)
        kwargs = {} if gap_grid is None else {"n_grid": gap_grid}
        profile = gap_profile(couplings, threads=threads, **kwargs)
        ramp = la_ramp(profile, t_f)
        la = cn_evolve(couplings, ramp)
        rows.append(ComparisonRow(
            n_ions=n,
            p_bangbang=p_bb,
            best_field=params.quench_field,
            best_hold=params.hold_time,
            p_locally_adiabatic=la.ground_probability,
            ratio=p_bb / la.ground_probability,
            field_integral_bangbang=field_integral(params, couplings.j0),
            field_integral_locally_adiabatic=la.field_integral,
        ))
    return rows
