"""Independent dense reference implementations used as test oracles.

Everything here is built from explicit Kronecker products and direct
dense linear algebra, sharing no code with the package: Hamiltonians
from Pauli matrices, ground-manifold projections from explicitly
tensored x-product states, constant-field evolution from eigh, and the
ramp propagation from a direct-solve Crank-Nicolson with the same
halving rule as the production path.
"""

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
RAD = 2.0 * np.pi


def site_op(op, i, n):
    """Operator acting on site i; site 0 is the least significant bit."""
    out = np.eye(1)
    for k in range(n - 1, -1, -1):
        out = np.kron(out, op if k == i else np.eye(2))
    return out


def dense_hamiltonian(jmat, field):
    n = jmat.shape[0]
    dim = 2 ** n
    h = np.zeros((dim, dim))
    for i in range(n):
        h -= field * site_op(SZ, i, n)
        for jj in range(i + 1, n):
            if jmat[i, jj] != 0.0:
                h -= jmat[i, jj] * site_op(SX, i, n) @ site_op(SX, jj, n)
    return h


def x_product_state(signs):
    """Tensor product of (|up> + s_i |down>)/sqrt(2) over sites."""
    v = np.ones(1)
    for s in signs[::-1]:  # site 0 innermost (least significant bit)
        v = np.kron(v, np.array([1.0, s]) / np.sqrt(2.0))
    return v


def classical_manifold_signs(jmat, tol_scale=1e-9):
    """All sign strings minimizing -sum_{i<j} J_ij s_i s_j."""
    n = jmat.shape[0]
    configs = []
    energies = []
    for k in range(2 ** n):
        s = np.array([1 - 2 * ((k >> i) & 1) for i in range(n)])
        configs.append(s)
        energies.append(-0.5 * s @ jmat @ s)
    energies = np.array(energies)
    e_min = energies.min()
    scale = max(np.max(np.abs(jmat)), 1.0)
    return [configs[k] for k in np.flatnonzero(energies <= e_min + tol_scale * scale)]


def ground_projection(psi, jmat):
    """Total weight of psi on the classical ground-manifold x-states."""
    return float(sum(abs(np.vdot(x_product_state(s), psi)) ** 2
                     for s in classical_manifold_signs(jmat)))


def bangbang_probability(jmat, b_q_over_j0, tau_ms, j0):
    """Quench-hold-quench run via full eigendecomposition."""
    n = jmat.shape[0]
    h = dense_hamiltonian(jmat, b_q_over_j0 * abs(j0))
    evals, evecs = np.linalg.eigh(h)
    psi0 = np.zeros(2 ** n, dtype=complex)
    psi0[0] = 1.0
    c = evecs.conj().T @ psi0
    psi = evecs @ (c * np.exp(-1j * RAD * evals * tau_ms))
    return ground_projection(psi, jmat)


def cn_sweep(jmat, times, fields, psi):
    """Midpoint-field Crank-Nicolson with direct solves and the
    mean-energy phase split used by the production scheme."""
    dim = psi.shape[0]
    eye = np.eye(dim)
    # field-independent split: H(b) = H_xx - b * M, assembled once
    h_xx = dense_hamiltonian(jmat, 0.0)
    mag = dense_hamiltonian(np.zeros_like(jmat), 1.0)
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        if dt == 0:
            continue
        h = h_xx + 0.5 * (fields[i] + fields[i + 1]) * mag
        shift = (np.vdot(psi, h @ psi).real / np.vdot(psi, psi).real)
        hs = h - shift * eye
        z = 1j * (RAD / 2.0) * dt
        psi = np.linalg.solve(eye + z * hs, psi - z * (hs @ psi))
        psi = np.exp(-1j * RAD * shift * dt) * psi
    return psi


def halve_schedule(times, fields):
    t2 = np.empty(2 * len(times) - 1)
    f2 = np.empty_like(t2)
    t2[::2], f2[::2] = times, fields
    t2[1::2] = 0.5 * (times[:-1] + times[1:])
    f2[1::2] = 0.5 * (fields[:-1] + fields[1:])
    return t2, f2


def ramp_probability(jmat, times, fields, p_tol=1e-6, max_halvings=6):
    """Propagate a ramp schedule, halving until P settles below p_tol."""
    n = jmat.shape[0]
    psi0 = np.zeros(2 ** n, dtype=complex)
    psi0[0] = 1.0
    prev = None
    for _ in range(max_halvings + 1):
        psi = cn_sweep(jmat, times, fields, psi0.copy())
        p = ground_projection(psi / np.linalg.norm(psi), jmat)
        if prev is not None and abs(p - prev) < p_tol:
            return p
        prev = p
        times, fields = halve_schedule(times, fields)
    raise RuntimeError("reference Crank-Nicolson did not settle")


def power_law_matrix(n, j0, alpha):
    j = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            j[i, k] = j[k, i] = j0 / (k - i) ** alpha
    return j
