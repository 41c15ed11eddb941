"""Pauli-term sums, excitation-truncated subspaces, and the sparse solver.

Conventions, fixed once and used everywhere:
  - string position i is qubit i; qubit 0 is the most significant bit of
    a computational basis index. Qubits 0 and 1 are the system pair, the
    rest are bath qubits.
  - the all-zero bitstring is the reference (system |ud,0>-type sector,
    every bath qubit in its vacuum state).
  - basis states are stored as two uint64 limbs (hi, lo) so up to 128
    qubits fit; states are ordered by (excitation count, value).

The solver projects the Pauli sum onto the bounded-Hamming-weight basis
(a Galerkin projection: amplitudes leaving the subspace are dropped) and
runs a restarted Lanczos iteration on the resulting sparse operator.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

_M64 = (1 << 64) - 1
_STATE_DT = np.dtype([("hi", "<u8"), ("lo", "<u8")])

SCHEMA_VERSION = 1


class SolverConvergenceError(RuntimeError):
    """Iterative eigensolver ran out of matvecs; partial results attached."""

    def __init__(self, message, eigenvalues=None, vectors=None, report=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.vectors = vectors
        self.report = report or {}


@dataclass
class PauliTermSum:
    """Real-coefficient sum of Pauli strings plus a scalar offset.

    terms maps strings over {I, X, Y, Z} (length n_qubits) to real
    coefficients; identity strings are folded into constant_offset on
    add(), so the mapping never holds the all-I key.
    """

    n_qubits: int
    terms: dict = field(default_factory=dict)
    constant_offset: float = 0.0

    def add(self, string, coeff):
        if len(string) != self.n_qubits or any(c not in "IXYZ" for c in string):
            raise ValueError(f"bad Pauli string {string!r} for {self.n_qubits} qubits")
        coeff = float(coeff)
        if set(string) == {"I"}:
            self.constant_offset += coeff
            return
        new = self.terms.get(string, 0.0) + coeff
        if new == 0.0:
            self.terms.pop(string, None)
        else:
            self.terms[string] = new

    def n_terms(self):
        return len(self.terms)

    def sorted_items(self):
        """Terms ordered by bath support then string (deterministic)."""
        def key(item):
            string = item[0]
            support = tuple(i for i, c in enumerate(string[2:]) if c != "I")
            return (support, string)
        return sorted(self.terms.items(), key=key)

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "n_qubits": self.n_qubits,
            "constant_offset_hartree": self.constant_offset,
            "terms": [{"string": s, "coeff_hartree": c}
                      for s, c in self.sorted_items()],
        }

    @classmethod
    def from_json_dict(cls, data):
        out = cls(n_qubits=int(data["n_qubits"]),
                  constant_offset=float(data["constant_offset_hartree"]))
        for item in data["terms"]:
            out.add(item["string"], item["coeff_hartree"])
        return out

    def dumps(self, **kw):
        return json.dumps(self.to_json_dict(), **kw)

    @classmethod
    def loads(cls, text):
        return cls.from_json_dict(json.loads(text))


def _split_mask(value):
    return np.uint64(value >> 64), np.uint64(value & _M64)


def _compile_term(string, n):
    """Masks for one Pauli string: bit of qubit i is 2^(n-1-i)."""
    flip = 0
    zy = 0
    n_y = 0
    for i, c in enumerate(string):
        bit = 1 << (n - 1 - i)
        if c in "XY":
            flip |= bit
        if c in "ZY":
            zy |= bit
        if c == "Y":
            n_y += 1
    return flip, zy, n_y


@dataclass
class TruncatedSubspace:
    """Computational basis states with bounded excitation count.

    Excitations are set bits relative to the all-zero reference. By
    default every qubit counts toward the cap; count_bath_only frees the
    two system qubits. states is a structured (hi, lo) array ordered by
    (excitation count, value), so the basis for cap k is a prefix of the
    basis for cap k+1.
    """

    n_qubits: int
    max_excitations: int
    states: np.ndarray
    count_bath_only: bool = False
    _sorted: np.ndarray = field(default=None, repr=False)
    _perm: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self):
        return len(self.states)

    def lookup_tables(self):
        if self._sorted is None:
            self._perm = np.argsort(self.states, kind="stable")
            self._sorted = self.states[self._perm]
        return self._sorted, self._perm

    def positions(self, queries):
        """Subspace positions of structured query states; -1 if outside."""
        srt, perm = self.lookup_tables()
        pos = np.searchsorted(srt, queries)
        # out-of-range insert points alias to 0; the equality test below
        # rejects them because srt[0] < any such query
        pos[pos == self.dim] = 0
        hit = srt[pos] == queries
        return np.where(hit, perm[pos], -1)


def _pack_states(values):
    out = np.empty(len(values), dtype=_STATE_DT)
    out["hi"] = [v >> 64 for v in values]
    out["lo"] = [v & _M64 for v in values]
    return out


def build_subspace(n_qubits, k, count_bath_only=False, n_system=2):
    """Basis of bitstrings with at most k excitations.

    k counts set bits over all qubits, or over bath qubits only when
    count_bath_only is set (system configurations then enter unrestricted).
    """
    if k < 0:
        raise ValueError("excitation cap must be nonnegative")
    if n_qubits > 128:
        raise ValueError("subspace machinery capped at 128 qubits")
    values = []
    if count_bath_only:
        n_bath = n_qubits - n_system
        kb = min(k, n_bath)
        sys_configs = [c << (n_qubits - n_system) for c in range(2 ** n_system)]
        for j in range(kb + 1):
            per_weight = []
            for combo in itertools.combinations(range(n_bath), j):
                bath = sum(1 << (n_qubits - n_system - 1 - b) for b in combo)
                per_weight.extend(s | bath for s in sys_configs)
            per_weight.sort()
            values.extend(per_weight)
    else:
        ke = min(k, n_qubits)
        for j in range(ke + 1):
            per_weight = sorted(
                sum(1 << (n_qubits - 1 - q) for q in combo)
                for combo in itertools.combinations(range(n_qubits), j))
            values.extend(per_weight)
    return TruncatedSubspace(n_qubits=n_qubits, max_excitations=k,
                             states=_pack_states(values),
                             count_bath_only=count_bath_only)


def projected_matrix(h, sub):
    """Sparse CSR of the Pauli sum restricted to the subspace.

    The constant offset is NOT included; callers add it to eigenvalues.
    Matrix elements <dst|P|src> are accumulated per term: dst = src XOR
    flip-mask, amplitude i^{n_Y} (-1)^{popcount(src AND zy-mask)}.
    """
    n = h.n_qubits
    states = sub.states
    dim = sub.dim
    hi, lo = states["hi"], states["lo"]
    src = np.arange(dim)
    any_complex = any(_compile_term(s, n)[2] % 2 for s in h.terms)
    dtype = np.complex128 if any_complex else np.float64

    rows, cols, data = [], [], []
    queries = np.empty(dim, dtype=_STATE_DT)
    for string, coeff in h.sorted_items():
        flip, zy, n_y = _compile_term(string, n)
        f_hi, f_lo = _split_mask(flip)
        z_hi, z_lo = _split_mask(zy)
        queries["hi"] = hi ^ f_hi
        queries["lo"] = lo ^ f_lo
        parity = (np.bitwise_count(hi & z_hi)
                  + np.bitwise_count(lo & z_lo)) & 1
        sign = 1.0 - 2.0 * parity.astype(np.float64)
        pos = sub.positions(queries)
        valid = pos >= 0
        factor = coeff * (1j ** n_y)
        if not any_complex:
            factor = factor.real
        rows.append(pos[valid])
        cols.append(src[valid])
        data.append(factor * sign[valid])
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(data),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim), dtype=dtype).tocsr()
    else:
        mat = sp.csr_matrix((dim, dim), dtype=dtype)
    return mat


DENSE_SOLVE_CUTOFF = 32


def lowest_eigenvalues(h, sub, n_eigs=6, tol=1e-9, max_matvecs_per_eig=5000):
    """Lowest eigenpairs of the projected Pauli sum.

    Returns (energies ascending incl. constant offset, vectors as columns,
    report dict). Small blocks fall back to a dense solve; otherwise a
    restarted Lanczos iteration runs matrix-free over the sparse
    projection. Non-convergence raises SolverConvergenceError carrying
    whatever eigenpairs did converge.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dim = sub.dim
    n_eigs = min(n_eigs, dim)
    mat = projected_matrix(h, sub)
    offset = h.constant_offset
    if dim <= max(DENSE_SOLVE_CUTOFF, 2 * n_eigs + 2):
        vals, vecs = np.linalg.eigh(mat.toarray())
        report = {"method": "dense", "dim": dim, "n_matvecs": 0,
                  "converged": True, "residuals": [0.0] * n_eigs}
        return vals[:n_eigs] + offset, vecs[:, :n_eigs], report

    counter = {"n": 0}

    def matvec(v):
        counter["n"] += 1
        return mat @ v

    op = spla.LinearOperator(shape=mat.shape, matvec=matvec, dtype=mat.dtype)
    ncv = min(dim, max(2 * n_eigs + 1, 20))
    budget = max_matvecs_per_eig * n_eigs
    maxiter = max(3, budget // ncv)
    rng = np.random.default_rng(1234)
    v0 = rng.standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    try:
        vals, vecs = spla.eigsh(op, k=n_eigs, which="SA", tol=tol,
                                v0=v0, ncv=ncv, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        got = np.sort(exc.eigenvalues) + offset if exc.eigenvalues is not None else None
        report = {"method": "lanczos", "dim": dim, "n_matvecs": counter["n"],
                  "converged": False, "residuals": []}
        raise SolverConvergenceError(
            f"eigensolver did not converge within {counter['n']} matvecs "
            f"({len(exc.eigenvalues)} of {n_eigs} eigenpairs ready)",
            eigenvalues=got, vectors=exc.eigenvectors, report=report) from exc
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    residuals = [float(np.linalg.norm(mat @ vecs[:, i] - vals[i] * vecs[:, i]))
                 for i in range(n_eigs)]
    report = {"method": "lanczos", "dim": dim, "n_matvecs": counter["n"],
              "converged": True, "residuals": residuals}
    return vals + offset, vecs, report


def reduced_system_density(sub, vec):
    """4x4 density over the system-qubit pair traced over bath qubits."""
    n = sub.n_qubits
    hi = sub.states["hi"]
    lo = sub.states["lo"]
    shift = n - 2
    if shift >= 64:
        cfg = (hi >> np.uint64(shift - 64)) & np.uint64(3)
    elif shift == 63:
        # system bits straddle the limb boundary
        cfg = ((hi & np.uint64(1)) << np.uint64(1)) | (lo >> np.uint64(63))
    else:
        cfg = (lo >> np.uint64(shift)) & np.uint64(3)
    cfg = cfg.astype(np.int64)

    mask = (1 << shift) - 1
    m_hi, m_lo = _split_mask(mask)
    bath = np.empty(sub.dim, dtype=_STATE_DT)
    bath["hi"] = hi & m_hi
    bath["lo"] = lo & m_lo
    _, ginv = np.unique(bath, return_inverse=True)
    amp = np.zeros((4, int(ginv.max()) + 1 if sub.dim else 1), dtype=complex)
    amp[cfg, ginv] = vec
    rho = amp @ amp.conj().T
    return rho.real if np.allclose(rho.imag, 0.0, atol=1e-14) else rho


TRIPLET_VECTOR_SYS = np.array([0.0, 0.0, 1.0, 1.0]) / np.sqrt(2.0)


def triplet_weight(sub, vec):
    """Overlap of the system-qubit reduced density with the Sz=0 triplet."""
    rho = reduced_system_density(sub, vec)
    return float(np.real(TRIPLET_VECTOR_SYS @ rho @ TRIPLET_VECTOR_SYS))
