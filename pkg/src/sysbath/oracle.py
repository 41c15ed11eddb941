"""Brute-force reference implementations for tests and ad-hoc verification.

Nothing here is used by the production pipeline. Conventions (spin-orbital
antisymmetrization, Kronecker ordering, oscillator truncation) are derived
from scratch so agreement with the production modules is a genuine check.

Size caps keep everything dense and exact: FCI up to 8 orbitals, qubit
spectra up to 14 qubits, oscillator baths up to 4 modes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

FCI_MAX_NORB = 8
DENSE_MAX_QUBITS = 14
FOCK_MAX_MODES = 4
FOCK_MAX_NMAX = 8


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact diagonalization of the electronic Hamiltonian (Slater-Condon rules)

@dataclass
class DeterminantBasis:
    """Complete set of Slater determinants for an (nelec, ms2) sector.

    Determinants are stored as pairs of occupation bitmasks (alpha, beta)
    over spatial orbitals, bit p set = orbital p occupied (0-based).
    """

    norb: int
    nelec: int
    ms2: int
    dets: list  # list of (alpha_mask, beta_mask)

    @classmethod
    def build(cls, norb, nelec, ms2):
        if norb > FCI_MAX_NORB:
            raise OracleError(f"fci oracle capped at {FCI_MAX_NORB} orbitals")
        n_a, rem = divmod(nelec + ms2, 2)
        n_b = nelec - n_a
        if rem or n_a < 0 or n_b < 0 or n_a > norb or n_b > norb:
            raise OracleError(f"empty sector: nelec={nelec}, ms2={ms2}, norb={norb}")
        dets = []
        for occ_a in itertools.combinations(range(norb), n_a):
            mask_a = sum(1 << p for p in occ_a)
            for occ_b in itertools.combinations(range(norb), n_b):
                dets.append((mask_a, sum(1 << p for p in occ_b)))
        return cls(norb=norb, nelec=nelec, ms2=ms2, dets=dets)


def _occ_list(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _cre_des_sign(p, q, mask):
    """Sign of a+_p a_q applied to |mask> (q occupied, p unoccupied after)."""
    lo, hi = (p, q) if p < q else (q, p)
    between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    return -1 if bin(between).count("1") % 2 else 1


def _fci_matrix(s, basis):
    """Dense Hamiltonian over the determinant basis via Slater-Condon rules.

    Spin orbitals are interleaved P = 2p + sigma. The antisymmetrized
    element <AB||CD> reduces to chemist integrals as
    <AB|CD> = delta(sA,sC) delta(sB,sD) (ac|bd).
    """
    t = s.one_body
    h = s.two_body
    dets = basis.dets
    dim = len(dets)

    def so_mask(det):
        a, b = det
        m = 0
        for p in _occ_list(a):
            m |= 1 << (2 * p)
        for p in _occ_list(b):
            m |= 1 << (2 * p + 1)
        return m

    def pair_int(A, B, C, D):
        # <AB|CD> in physicist order, spin orbitals
        if (A ^ C) & 1 or (B ^ D) & 1:
            return 0.0
        return h[A >> 1, C >> 1, B >> 1, D >> 1]

    masks = [so_mask(d) for d in dets]
    H = np.zeros((dim, dim))
    for i in range(dim):
        occ_i = _occ_list(masks[i])
        # diagonal
        e = s.core_energy
        for P in occ_i:
            e += t[P >> 1, P >> 1]
        for P, Q in itertools.combinations(occ_i, 2):
            e += pair_int(P, Q, P, Q) - pair_int(P, Q, Q, P)
        H[i, i] = e
        for j in range(i + 1, dim):
            diff = masks[i] ^ masks[j]
            nd = bin(diff).count("1")
            if nd == 2:
                P = _occ_list(diff & masks[j])[0]   # occupied in j, not i
                R = _occ_list(diff & masks[i])[0]   # occupied in i, not j
                sign = _cre_des_sign(R, P, masks[j])
                if (P ^ R) & 1:
                    continue
                val = t[R >> 1, P >> 1]
                for Q in occ_i:
                    if Q == R:
                        continue
                    val += pair_int(R, Q, P, Q) - pair_int(R, Q, Q, P)
                H[i, j] = H[j, i] = sign * val
            elif nd == 4:
                P, Q = _occ_list(diff & masks[j])
                R, S = _occ_list(diff & masks[i])
                s1 = _cre_des_sign(R, P, masks[j])
                mid = (masks[j] ^ (1 << P)) | (1 << R)
                s2 = _cre_des_sign(S, Q, mid)
                val = pair_int(R, S, P, Q) - pair_int(R, S, Q, P)
                H[i, j] = H[j, i] = s1 * s2 * val
    return H


def fci_lowest(s, n_states):
    """Lowest eigenvalues of the exact many-body Hamiltonian of `s`.

    Diagonalizes the (nelec, ms2) sector given by the IntegralSet metadata,
    including core_energy. Capped at 8 orbitals.
    """
    basis = DeterminantBasis.build(s.norb, s.nelec, s.ms2)
    H = _fci_matrix(s, basis)
    vals = np.linalg.eigvalsh(H)
    return vals[:n_states]


# ---------------------------------------------------------------------------
# dense reconstruction of Pauli-term sums

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def dense_pauli_matrix(h):
    """2^n dense matrix of a Pauli-term sum, naive Kronecker products.

    Accepts any object with n_qubits, constant_offset, and a terms mapping
    {string: coefficient}. String position 0 is the most significant qubit.
    """
    n = h.n_qubits
    if n > DENSE_MAX_QUBITS:
        raise OracleError(f"dense reconstruction capped at {DENSE_MAX_QUBITS} qubits")
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for string, coeff in h.terms.items():
        if len(string) != n or any(c not in _PAULI for c in string):
            raise OracleError(f"bad Pauli string {string!r} for {n} qubits")
        mat = np.ones((1, 1), dtype=complex)
        for c in string:
            mat = np.kron(mat, _PAULI[c])
        out += coeff * mat
    out += h.constant_offset * np.eye(dim)
    return out


def dense_qubit_diag(h):
    """All eigenvalues of the dense reconstruction of a Pauli-term sum."""
    return np.linalg.eigvalsh(dense_pauli_matrix(h))


# ---------------------------------------------------------------------------
# coupled-oscillator ground state in a truncated Fock space

def _fock_ground(omegas, v, n_max):
    n_modes = len(omegas)
    dim1 = n_max + 1
    a = sp.diags(np.sqrt(np.arange(1, dim1)), 1, format="csr")
    x = a + a.T
    nop = sp.diags(np.arange(dim1, dtype=float), format="csr")
    eye = sp.identity(dim1, format="csr")

    def embed(op, k):
        mats = [eye] * n_modes
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = sp.kron(out, m, format="csr")
        return out

    H = sp.csr_matrix((dim1 ** n_modes,) * 2)
    xs = [embed(x, k) for k in range(n_modes)]
    for k in range(n_modes):
        H = H + omegas[k] * embed(nop, k)
        H = H + v[k, k] * (xs[k] @ xs[k])
        for kp in range(k + 1, n_modes):
            H = H + (2.0 * v[k, kp]) * (xs[k] @ xs[kp])
    if H.shape[0] <= 512:
        return float(np.linalg.eigvalsh(H.toarray())[0])
    v0 = np.full(H.shape[0], 1.0 / np.sqrt(H.shape[0]))
    vals = spla.eigsh(H, k=1, which="SA", v0=v0, return_eigenvectors=False)
    return float(vals[0])


def fock_oscillator_ground(omegas, v, n_max=8):
    """Ground energy of sum_k omega_k a+_k a_k + sum_kk' V_kk' X_k X_k'.

    X = a + a+, the double sum runs over ordered pairs including k = k',
    and V must be symmetric. Solved in a product Fock space truncated at
    n_max quanta per mode; the truncation is verified by doubling n_max
    and requiring agreement below 1e-7.
    """
    omegas = np.asarray(omegas, dtype=float)
    v = np.asarray(v, dtype=float)
    if len(omegas) > FOCK_MAX_MODES:
        raise OracleError(f"fock oracle capped at {FOCK_MAX_MODES} modes")
    if n_max > FOCK_MAX_NMAX:
        raise OracleError(f"n_max capped at {FOCK_MAX_NMAX}")
    if not np.allclose(v, v.T, atol=1e-13):
        raise OracleError("V must be symmetric")
    e_coarse = _fock_ground(omegas, v, n_max)
    e_fine = _fock_ground(omegas, v, 2 * n_max)
    if abs(e_fine - e_coarse) >= 1e-7:
        raise OracleError(
            f"Fock-space ground energy not converged at n_max={n_max}: "
            f"{e_coarse!r} vs {e_fine!r} after doubling")
    return e_fine


# ---------------------------------------------------------------------------
# direct dense construction of the coupled system-bath qubit Hamiltonian

def dense_mixed_hamiltonian(params, omegas, g, constant):
    """Dense system+bath-qubit Hamiltonian built from explicit matrices.

    An independent counterpart of the production Pauli assembly: the
    two-qubit system block is written out entry by entry, bath qubits are
    appended via literal Kronecker products with number and flip matrices,
    and the quadratic counter terms are added as dense blocks.

    params carries eps1/eps2/u1/u2/j12/k12/t1_tilde/t2_tilde; omegas are
    the retained normal-mode frequencies, g the (3, N_q) coupling rows
    (g11, g12, g22), constant the scalar energy offset.

    Qubit order matches the production convention: system qubit pair is
    most significant, bath qubits follow in the given mode order.
    """
    eps1, eps2 = params.eps1, params.eps2
    u1, u2 = params.u1, params.u2
    j12, k12 = params.j12, params.k12
    t1, t2 = params.t1_tilde, params.t2_tilde
    e_pair = eps1 + eps2 + j12

    # basis: |dd,0>, |0,dd>, |ud,du>, |du,ud>  (doubly occ HOMO, doubly occ
    # LUMO, and the two antiparallel singly occupied configurations)
    h4 = np.array([
        [2.0 * (eps1 + u1), k12, t1, -t1],
        [k12, 2.0 * (eps2 + u2), t2, -t2],
        [t1, t2, e_pair, -k12],
        [-t1, -t2, -k12, e_pair],
    ])

    # mode-k system-side coupling block: densities plus the spin-summed hop
    hop = np.array([
        [0.0, 0.0, 1.0, -1.0],
        [0.0, 0.0, 1.0, -1.0],
        [1.0, 1.0, 0.0, 0.0],
        [-1.0, -1.0, 0.0, 0.0],
    ])

    def coupling_block(g11, g12, g22):
        return np.diag([2.0 * g11, 2.0 * g22, g11 + g22, g11 + g22]) + g12 * hop

    n_q = len(omegas)
    dim_b = 2 ** n_q
    dim = 4 * dim_b
    H = np.kron(h4, np.eye(dim_b)) + constant * np.eye(dim)

    number = np.diag([0.0, 1.0])
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])

    def bath_embed(op, k):
        left = np.eye(2 ** k)
        right = np.eye(2 ** (n_q - k - 1))
        return np.kron(np.kron(left, op), right)

    for k in range(n_q):
        w = omegas[k]
        g11, g12, g22 = g[0, k], g[1, k], g[2, k]
        H += np.kron(np.eye(4), w * (bath_embed(number, k) + 0.5 * np.eye(dim_b)))
        H += np.kron(coupling_block(g11, g12, g22), bath_embed(flip, k))
        # counter terms restoring normal ordering of the eliminated quadratics
        H += (g11 ** 2 + 2.0 * g12 ** 2 + g22 ** 2) / w * np.eye(dim)
        H += np.kron(coupling_block(0.0, (g11 * g12 + g12 * g22) / w, 0.0),
                     np.eye(dim_b))
        c_long = (g11 ** 2 - g22 ** 2) / (2.0 * w)
        H += np.kron(np.diag([2.0 * c_long, -2.0 * c_long, 0.0, 0.0]),
                     np.eye(dim_b))
    return H
