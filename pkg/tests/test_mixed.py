"""Explicit-mode solver: ranking, subspaces, assembly, eigensolver."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sysbath.bath import CouplingMatrix, diagonalize
from sysbath.constants import HARTREE_TO_EV
from sysbath.mixed import (CouplingRank, assemble_hamiltonian,
                           excitation_energies, mode_leverage, rank_modes,
                           renormalize_remainder, solve_mixed)
from sysbath.oracle import dense_mixed_hamiltonian, dense_pauli_matrix
from sysbath.pauli import (PauliTermSum, SolverConvergenceError,
                           TRIPLET_VECTOR_SYS, build_subspace,
                           lowest_eigenvalues, projected_matrix,
                           reduced_system_density, triplet_weight)
from sysbath.screening import (apply_screening, screening_correction,
                               static_solve)

from conftest import positive_definite_bath, stable_context


def _nm_stub(rng, dim, g=None):
    omegas, v = positive_definite_bath(rng, dim)
    nm = diagonalize(CouplingMatrix.from_quadratic(omegas, v))
    nm.g = rng.normal(scale=0.05, size=(3, dim)) if g is None else g
    return nm


# ---------------------------------------------------------------------------
# leverage ranking

def test_leverage_frozen_value(rng):
    nm = _nm_stub(rng, 1, g=np.array([[0.02], [0.03], [0.01]]))
    nm.omega_big = np.array([0.5])
    assert mode_leverage(nm)[0] == pytest.approx(2.0e-3, rel=1e-12)


def test_rank_matches_brute_force_sort(rng):
    nm = _nm_stub(rng, 25)
    rank = rank_modes(nm, 7)
    lev = mode_leverage(nm)
    brute = sorted(range(25), key=lambda i: (-lev[i], i))
    assert list(rank.order) == brute
    assert rank.explicit == tuple(brute[:7])
    assert rank.renormalized == tuple(sorted(brute[7:]))
    assert set(rank.explicit) | set(rank.renormalized) == set(range(25))


def test_rank_tie_keeps_natural_order(rng):
    nm = _nm_stub(rng, 4, g=np.zeros((3, 4)))
    rank = rank_modes(nm, 2)
    assert rank.order == (0, 1, 2, 3)
    assert rank.explicit == (0, 1)


def test_rank_clamps_and_validates(rng):
    nm = _nm_stub(rng, 3)
    assert rank_modes(nm, 10).n_explicit == 3
    assert rank_modes(nm, 0).explicit == ()
    with pytest.raises(ValueError, match="nonnegative"):
        rank_modes(nm, -1)


# ---------------------------------------------------------------------------
# truncated subspaces

def test_subspace_dimensions():
    assert build_subspace(10, 2).dim == 1 + 10 + 45
    assert build_subspace(4, 4).dim == 16
    assert build_subspace(4, 9).dim == 16      # cap at n set bits
    assert build_subspace(6, 0).dim == 1
    for k in range(4):
        expect = sum(math.comb(8, j) for j in range(k + 1))
        assert build_subspace(8, k).dim == expect


def test_subspace_prefix_nesting():
    prev = build_subspace(9, 0)
    for k in range(1, 5):
        cur = build_subspace(9, k)
        assert np.array_equal(cur.states[:prev.dim], prev.states)
        prev = cur


def test_subspace_bath_only_counting():
    sub = build_subspace(5, 1, count_bath_only=True)
    # all 4 system configurations x (empty + 3 single bath excitations)
    assert sub.dim == 4 * (1 + 3)
    full = build_subspace(5, 3, count_bath_only=True)
    assert full.dim == 32


def test_subspace_input_guards():
    with pytest.raises(ValueError, match="nonnegative"):
        build_subspace(4, -1)
    with pytest.raises(ValueError, match="128"):
        build_subspace(129, 1)


def test_subspace_wide_registers():
    # past 64 qubits the state packing spills into the second limb
    sub = build_subspace(70, 1)
    assert sub.dim == 71
    assert sub.states["hi"].max() > 0
    pos = sub.positions(sub.states)
    assert np.array_equal(pos, np.arange(71))


def test_positions_miss_returns_minus_one():
    sub = build_subspace(6, 1)
    queries = sub.states.copy()
    queries["lo"][0] = 0b011000   # weight 2, not in the k=1 basis
    pos = sub.positions(queries)
    assert pos[0] == -1
    assert np.array_equal(pos[1:], np.arange(1, sub.dim))


# ---------------------------------------------------------------------------
# Pauli-term container

def test_term_sum_add_merge_and_fold():
    h = PauliTermSum(n_qubits=2)
    h.add("XZ", 0.25)
    h.add("XZ", 0.25)
    h.add("II", 0.7)
    assert h.terms == {"XZ": 0.5}
    assert h.constant_offset == 0.7
    h.add("XZ", -0.5)
    assert h.n_terms() == 0


def test_term_sum_validates_strings():
    h = PauliTermSum(n_qubits=2)
    with pytest.raises(ValueError, match="bad Pauli string"):
        h.add("XYZ", 1.0)
    with pytest.raises(ValueError, match="bad Pauli string"):
        h.add("XQ", 1.0)


def test_term_sum_json_round_trip(rng):
    h = PauliTermSum(n_qubits=4)
    for _ in range(12):
        h.add("".join(rng.choice(list("IXYZ"), size=4)), rng.normal())
    h.constant_offset = -2.125
    back = PauliTermSum.loads(h.dumps())
    assert back.n_qubits == 4
    assert back.constant_offset == h.constant_offset
    assert back.terms == h.terms
    d = h.to_json_dict()
    assert d["schema_version"] == 1
    strings = [t["string"] for t in d["terms"]]
    assert strings == sorted(strings, key=lambda s: (
        tuple(i for i, c in enumerate(s[2:]) if c != "I"), s))


# ---------------------------------------------------------------------------
# projection and eigensolver

def _random_sum(rng, n, n_terms=30, ensure_y=False):
    h = PauliTermSum(n_qubits=n)
    letters = list("IXYZ")
    for _ in range(n_terms):
        h.add("".join(rng.choice(letters, size=n)), rng.normal())
    if ensure_y and not any(s.count("Y") % 2 for s in h.terms):
        h.add("Y" + "I" * (n - 1), 0.3)
    h.constant_offset = rng.normal()
    return h


def test_projected_matrix_matches_dense_restriction(rng):
    for trial in range(5):
        h = _random_sum(rng, 6, ensure_y=(trial % 2 == 0))
        dense = dense_pauli_matrix(h) - h.constant_offset * np.eye(64)
        for k in (1, 3, 6):
            sub = build_subspace(6, k)
            idx = sub.states["lo"].astype(int)
            ref = dense[np.ix_(idx, idx)]
            got = projected_matrix(h, sub).toarray()
            assert np.max(np.abs(got - ref)) < 1e-13


def test_projected_matrix_real_without_odd_y(rng):
    h = PauliTermSum(n_qubits=4)
    h.add("XYYZ", 0.5)       # even Y count stays real
    h.add("ZZII", -0.25)
    sub = build_subspace(4, 4)
    m = projected_matrix(h, sub)
    assert m.dtype == np.float64
    h.add("YIII", 0.1)
    assert projected_matrix(h, sub).dtype == np.complex128


def test_lowest_eigenvalues_dense_vs_iterative(rng):
    h = _random_sum(rng, 8, n_terms=25)
    sub = build_subspace(8, 2)           # dim 37 forces the Lanczos path
    vals, vecs, report = lowest_eigenvalues(h, sub, n_eigs=4)
    assert report["method"] == "lanczos"
    assert report["converged"] and report["n_matvecs"] > 0
    assert max(report["residuals"]) < 1e-6
    ref = np.linalg.eigvalsh(projected_matrix(h, sub).toarray())
    assert list(vals) == pytest.approx(list(ref[:4] + h.constant_offset),
                                       abs=1e-9)
    # orthonormal eigenvectors (complex: the sum holds odd-Y strings)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-8)


def test_lowest_eigenvalues_dense_path_offset(rng):
    h = _random_sum(rng, 4, n_terms=10)
    sub = build_subspace(4, 4)
    vals, vecs, report = lowest_eigenvalues(h, sub, n_eigs=3)
    assert report["method"] == "dense"
    ref = np.linalg.eigvalsh(dense_pauli_matrix(h))
    assert list(vals) == pytest.approx(list(ref[:3]), abs=1e-12)


def test_solver_convergence_error_carries_partial_results():
    rng = np.random.default_rng(11)
    h = _random_sum(rng, 14, n_terms=40)
    sub = build_subspace(14, 3)
    with pytest.raises(SolverConvergenceError, match="did not converge"):
        try:
            lowest_eigenvalues(h, sub, n_eigs=6, tol=1e-13,
                               max_matvecs_per_eig=1)
        except SolverConvergenceError as exc:
            assert exc.report["converged"] is False
            assert exc.report["method"] == "lanczos"
            assert exc.report["n_matvecs"] > 0
            raise


def test_lowest_eigenvalues_rejects_bad_tol(rng):
    h = _random_sum(rng, 4, n_terms=5)
    with pytest.raises(ValueError, match="tol"):
        lowest_eigenvalues(h, build_subspace(4, 2), tol=0.0)


# ---------------------------------------------------------------------------
# assembly against the dense oracle

def test_assembly_matches_dense_oracle(rng):
    ctx, _ = stable_context(rng, 6)
    for n_q in (1, 2, 3):
        rank = rank_modes(ctx.nm, n_q)
        scr = renormalize_remainder(ctx.params, rank, ctx.nm)
        h = assemble_hamiltonian(ctx.params, scr, rank, ctx.nm,
                                 ctx.env_const)
        omegas = ctx.nm.omega_big[list(rank.explicit)]
        g = ctx.nm.g[:, list(rank.explicit)]
        constant = ctx.env_const - 0.5 * omegas.sum()
        ref = dense_mixed_hamiltonian(apply_screening(ctx.params, scr),
                                      omegas, g, constant)
        got = dense_pauli_matrix(h)
        assert np.max(np.abs(got - ref)) < 1e-12
        assert np.max(np.abs(got.imag)) < 1e-14


def test_assembly_vacuum_reference(rng):
    # with couplings zeroed, the bath vacuum sits exactly at env_const
    # plus the system block
    ctx, _ = stable_context(rng, 5)
    nm = ctx.nm
    nm.g = np.zeros_like(nm.g)
    rank = rank_modes(nm, 2)
    scr = renormalize_remainder(ctx.params, rank, nm)
    h = assemble_hamiltonian(ctx.params, scr, rank, nm, ctx.env_const)
    dense = dense_pauli_matrix(h)
    sys_block = dense[:16:4, :16:4]      # bath qubits in |00>
    from sysbath.system import build_system_matrix
    ref = build_system_matrix(ctx.params)[:4, :4] + ctx.env_const * np.eye(4)
    assert np.allclose(sys_block, ref, atol=1e-12)


def test_zero_coupling_tensor_product_spectrum(rng):
    ctx, _ = stable_context(rng, 5)
    nm = ctx.nm
    nm.g = np.zeros_like(nm.g)
    rank = rank_modes(nm, 2)
    scr = renormalize_remainder(ctx.params, rank, nm)
    h = assemble_hamiltonian(ctx.params, scr, rank, nm, ctx.env_const)
    from sysbath.oracle import dense_qubit_diag
    from sysbath.system import build_system_matrix
    sys_vals = np.linalg.eigvalsh(build_system_matrix(ctx.params)[:4, :4])
    om = nm.omega_big[list(rank.explicit)]
    expect = np.sort([e + ctx.env_const + n1 * om[0] + n2 * om[1]
                      for e in sys_vals for n1 in (0, 1) for n2 in (0, 1)])
    assert np.allclose(dense_qubit_diag(h), expect, atol=1e-11)


def test_explicit_plus_renormalized_equals_full(rng):
    ctx, _ = stable_context(rng, 6)
    for n_q in (0, 1, 3, 5):
        rank = rank_modes(ctx.nm, n_q)
        full = screening_correction(ctx.nm)
        split = (screening_correction(ctx.nm, list(rank.explicit))
                 + screening_correction(ctx.nm, list(rank.renormalized)))
        assert np.max(np.abs(split - full)) < 1e-12


# ---------------------------------------------------------------------------
# solve_mixed

def test_no_explicit_modes_delegates_to_static(rng):
    ctx, _ = stable_context(rng, 5)
    res = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 0)
    st = static_solve(ctx.params, ctx.modes, ctx.nm)
    assert res.triplet_gap == st["lowest_triplet_gap"]
    assert res.singlet_gap == st["lowest_singlet_gap"]
    assert np.array_equal(res.energies,
                          st["spectrum"].sz0_energies + ctx.env_const)
    assert res.labels == ("static",) * 4
    assert res.static is not None
    assert res.static["screened_params"] == st["screened_params"]


def test_solve_mixed_deterministic(rng):
    ctx, _ = stable_context(rng, 5)
    a = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 2,
                    max_exc=3)
    b = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 2,
                    max_exc=3)
    assert np.array_equal(a.energies, b.energies)
    assert a.labels == b.labels


@pytest.mark.filterwarnings("ignore:no triplet-labeled state")
def test_solve_mixed_variational_nesting(rng):
    # at the tightest truncation the two converged states may both be
    # singlets; only the ground energy matters here
    ctx, _ = stable_context(rng, 6)
    ground = []
    for k in (1, 2, 3, 4):
        res = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 3,
                          max_exc=k, n_eigs=2)
        ground.append(res.energies[0])
    assert all(b <= a + 1e-12 for a, b in zip(ground, ground[1:]))


def test_solve_mixed_labels_and_weights(rng):
    ctx, _ = stable_context(rng, 5)
    res = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 2,
                      max_exc=3)
    assert res.n_explicit == 2
    assert set(res.labels) <= {"singlet", "triplet"}
    assert all(0.0 <= w <= 1.0 + 1e-12 for w in res.triplet_weights)
    assert res.triplet_gap > 0
    assert res.singlet_gap > 0
    if res.rank.renormalized:
        implicit_min = ctx.nm.omega_big[list(res.rank.renormalized)].min()
        assert res.singlet_gap <= implicit_min + 1e-12


def test_excitation_energies_consistent_with_solver(rng):
    ctx, _ = stable_context(rng, 5)
    rank = rank_modes(ctx.nm, 2)
    scr = renormalize_remainder(ctx.params, rank, ctx.nm)
    h = assemble_hamiltonian(ctx.params, scr, rank, ctx.nm, ctx.env_const)
    sub = build_subspace(h.n_qubits, 3)
    implicit = ctx.nm.omega_big[list(rank.renormalized)]
    out = excitation_energies(h, sub, ctx.bare_class, implicit_omegas=implicit)
    res = solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const, 2,
                      max_exc=3)
    assert out["triplet_gap"] == pytest.approx(
        res.triplet_gap * HARTREE_TO_EV, abs=1e-9)
    assert out["singlet_gap"] == pytest.approx(
        res.singlet_gap * HARTREE_TO_EV, abs=1e-9)


# ---------------------------------------------------------------------------
# reduced density diagnostics

def _basis_index(sub, value):
    return int(np.flatnonzero(sub.states["lo"] == value)[0])


def test_reduced_density_pure_triplet():
    sub = build_subspace(4, 4)
    vec = np.zeros(sub.dim)
    # (|10> + |11>)/sqrt(2) on the system pair, bath in vacuum
    vec[_basis_index(sub, 0b1000)] = 1 / math.sqrt(2)
    vec[_basis_index(sub, 0b1100)] = 1 / math.sqrt(2)
    rho = reduced_system_density(sub, vec)
    assert rho.shape == (4, 4)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-14)
    assert triplet_weight(sub, vec) == pytest.approx(1.0, abs=1e-14)
    # the orthogonal combination is a pure singlet
    vec[_basis_index(sub, 0b1100)] *= -1
    assert triplet_weight(sub, vec) == pytest.approx(0.0, abs=1e-14)


def test_reduced_density_traces_out_bath_entanglement():
    sub = build_subspace(4, 4)
    vec = np.zeros(sub.dim)
    # bath tags the two branches, killing the coherence
    vec[_basis_index(sub, 0b1001)] = 1 / math.sqrt(2)
    vec[_basis_index(sub, 0b1110)] = 1 / math.sqrt(2)
    rho = reduced_system_density(sub, vec)
    assert rho[2, 2] == pytest.approx(0.5, abs=1e-14)
    assert rho[3, 3] == pytest.approx(0.5, abs=1e-14)
    assert abs(rho[2, 3]) < 1e-14
    assert triplet_weight(sub, vec) == pytest.approx(0.5, abs=1e-14)
    assert TRIPLET_VECTOR_SYS @ rho @ TRIPLET_VECTOR_SYS == pytest.approx(
        0.5, abs=1e-14)
