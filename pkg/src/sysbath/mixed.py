"""Mixed treatment: strongest-coupled modes explicit, the rest screened.

Normal modes are ranked by the leverage L = (g12^2 + (g11 - g22)^2) /
Omega. The top N_q become bath qubits in a combined Pauli Hamiltonian;
the remainder renormalize the system parameters exactly as in the full
static limit. N_q = 0 therefore reproduces static screening, and N_q =
N_RPA removes the renormalization entirely.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import HARTREE_TO_EV
from .pauli import (PauliTermSum, build_subspace, lowest_eigenvalues,
                    triplet_weight)
from .screening import screened_params, static_solve
from .system import classify_ground_state

log = logging.getLogger(__name__)

AMBIGUOUS_BAND = (0.4, 0.6)


@dataclass(frozen=True)
class CouplingRank:
    """Ranking of normal modes by coupling leverage.

    leverage holds L per mode in natural order; order lists every mode
    index by descending L (ties broken by index); the first n_explicit
    entries are promoted to bath qubits.
    """

    leverage: np.ndarray
    order: tuple
    n_explicit: int

    @property
    def explicit(self):
        """Mode indices promoted to qubits, strongest first."""
        return self.order[:self.n_explicit]

    @property
    def renormalized(self):
        """Mode indices folded into screening, ascending."""
        return tuple(sorted(self.order[self.n_explicit:]))


def mode_leverage(nm):
    """L = (g12^2 + (g11 - g22)^2) / Omega per normal mode."""
    if nm.g is None:
        raise ValueError("couplings not transformed yet")
    g11, g12, g22 = nm.g
    return (g12 ** 2 + (g11 - g22) ** 2) / nm.omega_big


def rank_modes(nm, n_q):
    """Rank modes by descending leverage and keep the top n_q explicit.

    n_q larger than the mode count is clamped. Ties preserve natural
    mode order, so the ranking is deterministic.
    """
    if n_q < 0:
        raise ValueError("number of explicit modes must be nonnegative")
    lev = mode_leverage(nm)
    order = tuple(int(i) for i in np.argsort(-lev, kind="stable"))
    n_explicit = min(int(n_q), lev.size)
    if n_q > lev.size:
        log.info("requested %d explicit modes, only %d exist", n_q, lev.size)
    return CouplingRank(leverage=lev, order=order, n_explicit=n_explicit)


def renormalize_remainder(sp, rank, nm):
    """ScreenedParams from the non-explicit modes only."""
    return screened_params(sp, nm, mode_mask=rank.renormalized)


def assemble_hamiltonian(sp, screened, rank, nm, env_const):
    """Pauli-term sum for the system plus the explicit bath qubits.

    Qubits 0, 1 carry the renormalized system block (bare orbital
    energies, screened interactions); qubits 2.. are the explicit modes
    in ranking order, each a two-level truncation of its oscillator.
    env_const is the full environment ground-state reference energy; the
    explicit oscillator terms enter relative to their zero point (which
    env_const already contains), so the vacuum expectation value of the
    assembled operator equals env_const plus the system diagonal.
    Per-mode counter terms restore normal ordering of the quadratics
    eliminated by the two-level truncation.
    """
    n_q = rank.n_explicit
    h = PauliTermSum(n_qubits=2 + n_q)
    pad = "I" * n_q

    eps1, eps2 = sp.eps1, sp.eps2
    u1, u2 = screened.u1_t, screened.u2_t
    j12, k12 = screened.j12_t, screened.k12_t
    t1, t2 = screened.tau1_t, screened.tau2_t
    delta = eps2 + u2 - eps1 - u1

    h.constant_offset += env_const + eps1 + eps2 + 0.5 * (u1 + u2 + j12)
    h.add("ZI" + pad, 0.5 * (u1 + u2 - j12))
    h.add("IZ" + pad, -0.5 * delta)
    h.add("ZZ" + pad, -0.5 * delta)
    h.add("ZX" + pad, k12)
    h.add("XZ" + pad, 0.5 * (t1 + t2))
    h.add("YY" + pad, 0.5 * (t1 + t2))
    h.add("XI" + pad, 0.5 * (t1 - t2))
    h.add("XX" + pad, 0.5 * (t2 - t1))

    for slot, mode in enumerate(rank.explicit):
        om = float(nm.omega_big[mode])
        g11, g12, g22 = (float(x) for x in nm.g[:, mode])
        z_bath = "".join("Z" if i == slot else "I" for i in range(n_q))
        x_bath = "".join("X" if i == slot else "I" for i in range(n_q))

        # oscillator: Omega (n + 1/2), vacuum part folded into env_const
        h.constant_offset += 0.5 * om
        h.add("II" + z_bath, -0.5 * om)

        # linear coupling X_mode (x) system densities / hop
        h.add("XZ" + x_bath, g12)
        h.add("YY" + x_bath, g12)
        h.add("II" + x_bath, g11 + g22)
        h.add("IZ" + x_bath, 0.5 * (g11 - g22))
        h.add("ZZ" + x_bath, 0.5 * (g11 - g22))

        # counter terms (system-only strings)
        h.constant_offset += (g11 ** 2 + 2.0 * g12 ** 2 + g22 ** 2) / om
        ct = (g11 * g12 + g12 * g22) / om
        h.add("XZ" + pad, ct)
        h.add("YY" + pad, ct)
        cl = (g11 ** 2 - g22 ** 2) / (2.0 * om)
        h.add("IZ" + pad, cl)
        h.add("ZZ" + pad, cl)
    return h


def _label_states(sub, vecs, n_states):
    """Per-state singlet/triplet labels from the system-qubit density."""
    labels = []
    weights = []
    for i in range(n_states):
        w = triplet_weight(sub, vecs[:, i])
        weights.append(w)
        if AMBIGUOUS_BAND[0] <= w <= AMBIGUOUS_BAND[1]:
            warnings.warn(
                f"state {i}: triplet weight {w:.3f} is ambiguous; labeling "
                f"{'triplet' if w >= 0.5 else 'singlet'}, the alternative "
                "assignment is plausible", stacklevel=2)
        labels.append("triplet" if w >= 0.5 else "singlet")
    return tuple(labels), tuple(weights)


def _gaps_from_levels(energies, labels, model_label, implicit_omegas):
    """Excitation gaps (Hartree) from labeled eigenvalues.

    Triplet gap: lowest triplet-labeled state above the ground state
    (first excitation if the ground state itself is the triplet).
    Singlet gap: lowest singlet-labeled excitation; when the molecule is
    singlet-class the renormalized modes compete as well, since each
    implicit normal frequency is itself a singlet excitation energy.
    """
    e0 = energies[0]
    trip = [energies[i] - e0 for i in range(1, len(energies))
            if labels[i] == "triplet"]
    sing = [energies[i] - e0 for i in range(1, len(energies))
            if labels[i] == "singlet"]
    if labels[0] == "triplet":
        triplet_gap = float(energies[1] - e0) if len(energies) > 1 else float("nan")
    elif trip:
        triplet_gap = float(min(trip))
    else:
        warnings.warn("no triplet-labeled state among converged eigenpairs",
                      stacklevel=2)
        triplet_gap = float("nan")
    candidates = []
    if sing:
        candidates.append(min(sing))
    if model_label == "singlet" and len(implicit_omegas):
        candidates.append(float(np.min(implicit_omegas)))
    singlet_gap = float(min(candidates)) if candidates else float("nan")
    return triplet_gap, singlet_gap


@dataclass
class MixedResult:
    """Converged low-energy data for one (N_q, k) point."""

    n_explicit: int
    max_excitations: int
    dim: int
    energies: np.ndarray        # absolute, Hartree
    labels: tuple
    triplet_weights: tuple
    triplet_gap: float          # Hartree
    singlet_gap: float          # Hartree
    screened: object
    rank: CouplingRank
    report: dict
    static: dict = None


def solve_mixed(sp, modes, nm, env_const, n_q, max_exc=4, n_eigs=6,
                tol=1e-9, count_bath_only=False, model=None):
    """Excitation gaps with n_q explicit bath qubits.

    n_q = 0 delegates to the static path so both approximations agree
    identically there; otherwise the assembled Pauli sum is solved in
    the excitation-truncated subspace. Returned energies are absolute
    (they include env_const); gaps are differences, in Hartree.
    """
    model_class = model if model is not None else classify_ground_state(sp)
    model_label = getattr(model_class, "label", model_class)
    n_modes = nm.omega_big.size
    rank = rank_modes(nm, n_q)

    if rank.n_explicit == 0:
        st = static_solve(sp, modes, nm)
        spectrum = st["spectrum"]
        return MixedResult(
            n_explicit=0, max_excitations=max_exc, dim=4,
            energies=spectrum.sz0_energies + env_const,
            labels=("static",) * 4, triplet_weights=(),
            triplet_gap=st["lowest_triplet_gap"],
            singlet_gap=st["lowest_singlet_gap"],
            screened=st["screened_params"], rank=rank,
            report={"method": "static", "dim": 4, "n_matvecs": 0,
                    "converged": True, "residuals": []},
            static=st)

    scr = renormalize_remainder(sp, rank, nm)
    h = assemble_hamiltonian(sp, scr, rank, nm, env_const)
    sub = build_subspace(h.n_qubits, max_exc, count_bath_only=count_bath_only)
    vals, vecs, report = lowest_eigenvalues(h, sub, n_eigs=n_eigs, tol=tol)
    labels, weights = _label_states(sub, vecs, vals.size)
    implicit_om = nm.omega_big[list(rank.renormalized)] if rank.renormalized else np.zeros(0)
    triplet_gap, singlet_gap = _gaps_from_levels(vals, labels, model_label,
                                                 implicit_om)
    if n_q > n_modes:
        log.debug("explicit set saturated the %d available modes", n_modes)
    return MixedResult(
        n_explicit=rank.n_explicit, max_excitations=max_exc, dim=sub.dim,
        energies=vals, labels=labels, triplet_weights=weights,
        triplet_gap=triplet_gap, singlet_gap=singlet_gap,
        screened=scr, rank=rank, report=report)


def excitation_energies(h, sub, model, n_eigs=6, tol=1e-9,
                        implicit_omegas=()):
    """Triplet and singlet gaps (eV) of an assembled Pauli sum.

    Labels the converged eigenstates through the system-qubit reduced
    density and applies the same gap conventions as solve_mixed.
    """
    vals, vecs, _report = lowest_eigenvalues(h, sub, n_eigs=n_eigs, tol=tol)
    labels, _weights = _label_states(sub, vecs, vals.size)
    model_label = getattr(model, "label", model)
    t_gap, s_gap = _gaps_from_levels(vals, labels, model_label,
                                     np.asarray(implicit_omegas, dtype=float))
    return {"triplet_gap": t_gap * HARTREE_TO_EV,
            "singlet_gap": s_gap * HARTREE_TO_EV}
