"""Coupled-oscillator bath: quadratic couplings, normal modes, couplings g.

Every bath mode carries an X = a + a+ quadrature; mode-mode interactions
are V_kk' X_k X_k' with V built from two-electron integrals pairing the
two transition densities. Diagonalizing

    m[k,k'] = omega_k^2 delta_kk' + 4 sqrt(omega_k omega_k') V_kk'

gives normal frequencies Omega = sqrt(eig m) and the rotated linear
couplings g to the system. hbar = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENSE_EIG_CAP = 8192


class PositiveDefinitenessError(ValueError):
    """The bath quadratic form has a non-positive normal frequency."""


@dataclass
class CouplingMatrix:
    """Quadratic-coupling data for the bath oscillators.

    v holds the X_k X_k' coefficients (symmetric, diagonal = self-pairing
    terms); m is the normal-mode matrix derived from v and the bare
    frequencies; omegas are the bare mode frequencies in mode order.
    """

    dim: int
    m: np.ndarray
    v: np.ndarray
    omegas: np.ndarray

    @classmethod
    def from_quadratic(cls, omegas, v):
        """Build directly from bare frequencies and X-X coefficients."""
        omegas = np.asarray(omegas, dtype=float)
        v = np.asarray(v, dtype=float)
        n = len(omegas)
        if v.shape != (n, n):
            raise ValueError(f"V shape {v.shape} does not match {n} modes")
        m = np.diag(omegas ** 2) + 4.0 * np.sqrt(np.outer(omegas, omegas)) * v
        return cls(dim=n, m=m, v=v, omegas=omegas)


def build_coupling_matrix(modes, s, model=None):
    """CouplingMatrix for a bath-mode list.

    V_kk' = amp_k amp_k' h_pair / 2 with h_pair the two-electron integral
    pairing the (upper, lower) orbital densities of the two transitions;
    the amplitudes amp carry the model-specific sqrt(2) r or unit
    prefactors fixed at enumeration time. Diagonal entries appear only
    for self-coupled families (transitions sharing a system orbital).
    The `model` argument is accepted for symmetry with the enumeration
    call but unused: the modes already encode the model.
    """
    n = len(modes)
    if n == 0:
        z = np.zeros((0, 0))
        return CouplingMatrix(dim=0, m=z.copy(), v=z.copy(), omegas=np.zeros(0))
    ups = np.array([md.up - 1 for md in modes])
    lows = np.array([md.low - 1 for md in modes])
    amps = np.array([md.x_amp for md in modes])
    self_coupled = np.array([md.self_coupled for md in modes])
    omegas = np.array([md.omega for md in modes])

    pair = s.two_body[ups[:, None], lows[:, None], ups[None, :], lows[None, :]]
    v = 0.5 * np.outer(amps, amps) * pair
    diag = np.where(self_coupled, v.diagonal(), 0.0)
    np.fill_diagonal(v, diag)
    m = np.diag(omegas ** 2) + 4.0 * np.sqrt(np.outer(omegas, omegas)) * v
    return CouplingMatrix(dim=n, m=m, v=v, omegas=omegas)


@dataclass
class NormalModeBasis:
    """Eigenbasis of the coupled bath.

    omega_big: normal frequencies ascending. s_matrix: orthonormal
    eigenvector columns with a fixed sign convention. omega: bare
    frequencies in mode order. g: (3, dim) rows (g_11, g_12, g_22) of
    system couplings per normal mode, filled by transform_couplings.
    """

    omega_big: np.ndarray
    s_matrix: np.ndarray
    omega: np.ndarray
    g: np.ndarray = None


def diagonalize(cm):
    """Normal modes of the coupling matrix.

    Raises PositiveDefinitenessError when any eigenvalue of m is <= 0
    (an RPA instability: the quadratic bath Hamiltonian is unbounded).
    """
    if cm.dim > DENSE_EIG_CAP:
        raise ValueError(
            f"bath dimension {cm.dim} exceeds the dense eigensolver cap "
            f"{DENSE_EIG_CAP}; truncate the virtual space")
    if cm.dim == 0:
        return NormalModeBasis(omega_big=np.zeros(0), s_matrix=np.zeros((0, 0)),
                               omega=cm.omegas.copy(), g=np.zeros((3, 0)))
    if not np.allclose(cm.m, cm.m.T, rtol=1e-12, atol=1e-12):
        raise ValueError("coupling matrix is not symmetric")
    vals, vecs = np.linalg.eigh(cm.m)
    if vals[0] <= 0.0:
        raise PositiveDefinitenessError(
            f"normal-mode matrix has eigenvalue {vals[0]:.6g} <= 0 "
            "(RPA instability)")
    # sign convention: largest-magnitude component of each column positive
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0.0] = 1.0
    vecs = vecs * signs
    return NormalModeBasis(omega_big=np.sqrt(vals), s_matrix=vecs,
                           omega=cm.omegas.copy())


def lambda_table(modes):
    """(3, N) table of bare linear couplings (rows lambda_11/12/22)."""
    if not modes:
        return np.zeros((3, 0))
    return np.column_stack([md.lambda_coeffs for md in modes])


def transform_couplings(modes, nm):
    """Rotate the linear couplings into the normal-mode basis.

    g_pq^n = sum_k sqrt(omega_k / Omega_n) lambda_pq,k S_kn. Also stored
    on nm.g for downstream use.
    """
    lam = lambda_table(modes)
    if nm.omega_big.size == 0:
        nm.g = np.zeros((3, 0))
        return nm.g
    weighted = lam * np.sqrt(nm.omega)[None, :]
    nm.g = (weighted @ nm.s_matrix) / np.sqrt(nm.omega_big)[None, :]
    return nm.g


def environment_ground_energy(modes, nm, e_hf_env):
    """Ground-state energy of the decoupled environment.

    E_HF plus the pair correlation energies plus the zero-point shift
    (sum Omega - sum omega)/2 from the quadratic coupling.
    """
    e_corr = sum(md.e_corr for md in modes)
    zp = 0.5 * (np.sum(nm.omega_big) - np.sum(nm.omega))
    return float(e_hf_env + e_corr + zp)


# coordinate maps between bare (a) and normal (b) ladder operators; the
# position- and momentum-quadrature maps must compose to the identity
def forward_position_map(nm):
    return np.sqrt(nm.omega_big)[:, None] * nm.s_matrix.T / np.sqrt(nm.omega)[None, :]


def backward_position_map(nm):
    return np.sqrt(nm.omega)[:, None] * nm.s_matrix / np.sqrt(nm.omega_big)[None, :]


def forward_momentum_map(nm):
    return nm.s_matrix.T * np.sqrt(nm.omega)[None, :] / np.sqrt(nm.omega_big)[:, None]


def backward_momentum_map(nm):
    return nm.s_matrix * np.sqrt(nm.omega_big)[None, :] / np.sqrt(nm.omega)[:, None]


def spectral_density(nm, gamma, grid):
    """Lorentzian-broadened transition-strength density on an energy grid.

    S(E) = sum_n (g_12^n)^2 (gamma/pi) / ((E - Omega_n)^2 + gamma^2),
    unit-area peaks. Energies and gamma must share one unit system;
    S then carries that unit (integral of S ~ sum g_12^2).
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty energy grid")
    if nm.g is None:
        raise ValueError("couplings not transformed yet")
    g12 = nm.g[1]
    diff = grid[:, None] - nm.omega_big[None, :]
    peaks = (gamma / np.pi) / (diff ** 2 + gamma ** 2)
    return peaks @ (g12 ** 2)
