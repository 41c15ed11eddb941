"""End-to-end pipelines from integral file to excitation gaps.

Single preparation step shared by every front end: partition orbitals,
extract system parameters, classify the ground-state sector, enumerate
bath modes, diagonalize the coupled bath, and rotate the couplings.
Everything downstream (static solve, mixed solve, sweeps, spectra,
Pauli export) consumes the prepared context.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .bath import (build_coupling_matrix, diagonalize,
                   environment_ground_energy, transform_couplings)
from .constants import HARTREE_TO_EV
from .mixed import assemble_hamiltonian, rank_modes, renormalize_remainder, solve_mixed
from .pauli import SolverConvergenceError
from .screening import static_solve
from .system import (classify_ground_state, default_partition,
                     environment_hf_energy, enumerate_bath_modes,
                     expected_mode_count, system_params)

log = logging.getLogger(__name__)

MODEL_ALIASES = {"auto": "auto", "sg": "singlet", "tr": "triplet",
                 "singlet": "singlet", "triplet": "triplet"}


@dataclass
class PipelineContext:
    """Everything derived from one integral set and one model choice."""

    integrals: object
    partition: object
    params: object
    bare_class: object
    model_label: str          # "singlet" or "triplet" (resolved)
    modes: list
    cm: object
    nm: object
    e_hf_env: float
    env_const: float          # environment ground reference + core energy
    n_rpa: int

    @property
    def n_rpa_expected(self):
        return expected_mode_count(self.partition.n_db,
                                   self.partition.n_empt, self.model_label)


def prepare(s, homo=None, lumo=None, model="auto", drop_unstable=False,
            partition=None):
    """Build the pipeline context for an integral set.

    model: "auto" resolves the environment model from the bare system
    ground state; "sg"/"singlet" or "tr"/"triplet" force it.
    partition: explicit OrbitalPartition overriding the homo/lumo rule.
    """
    if partition is None:
        p = default_partition(s, homo=homo, lumo=lumo)
    else:
        p = partition
        p.validate(s.norb)
    sp = system_params(s, p)
    bare = classify_ground_state(sp)
    try:
        label = MODEL_ALIASES[str(model).lower()]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; expected auto, sg or tr")
    if label == "auto":
        label = bare.label
    modes = enumerate_bath_modes(s, p, label, drop_unstable=drop_unstable)
    cm = build_coupling_matrix(modes, s)
    nm = diagonalize(cm)
    transform_couplings(modes, nm)
    e_hf_env = environment_hf_energy(s, p)
    env_const = environment_ground_energy(modes, nm, e_hf_env) + s.core_energy
    return PipelineContext(
        integrals=s, partition=p, params=sp, bare_class=bare,
        model_label=label, modes=modes, cm=cm, nm=nm,
        e_hf_env=e_hf_env, env_const=env_const, n_rpa=len(modes))


def run_static(ctx):
    """Full static screening; returns the static_solve dict."""
    return static_solve(ctx.params, ctx.modes, ctx.nm)


def run_mixed(ctx, n_q, max_exc=4, n_eigs=6, tol=1e-9,
              count_bath_only=False):
    """Mixed solve with n_q explicit modes; returns MixedResult."""
    return solve_mixed(ctx.params, ctx.modes, ctx.nm, ctx.env_const,
                       n_q=n_q, max_exc=max_exc, n_eigs=n_eigs, tol=tol,
                       count_bath_only=count_bath_only,
                       model=ctx.model_label)


def build_pauli_sum(ctx, n_q):
    """Assembled PauliTermSum (with the leverage ranking used)."""
    rank = rank_modes(ctx.nm, n_q)
    scr = renormalize_remainder(ctx.params, rank, ctx.nm)
    h = assemble_hamiltonian(ctx.params, scr, rank, ctx.nm, ctx.env_const)
    return h, rank, scr


def default_excitation_cap(n_q):
    """Excitation cap schedule: 4 explicit-mode counts up to 62, 2 above."""
    return 4 if n_q <= 62 else 2


def convergence_sweep(ctx, nq_list, k_schedule=None, n_eigs=6, tol=1e-9,
                      count_bath_only=False):
    """Gaps versus the number of explicit modes.

    nq_list must be ascending. k_schedule: None (default cap schedule),
    a single int, or a per-point list. Per-point failures are recorded
    in the row and the sweep continues.
    """
    nq_list = [int(n) for n in nq_list]
    if any(b < a for a, b in zip(nq_list, nq_list[1:])):
        raise ValueError("nq_list must be ascending")
    if k_schedule is None:
        ks = [default_excitation_cap(n) for n in nq_list]
    elif np.isscalar(k_schedule):
        ks = [int(k_schedule)] * len(nq_list)
    else:
        ks = [int(k) for k in k_schedule]
        if len(ks) != len(nq_list):
            raise ValueError("k_schedule length does not match nq_list")
    rows = []
    for n_q, k in zip(nq_list, ks):
        t0 = time.perf_counter()
        row = {"n_q": n_q, "k": k, "triplet_gap_ev": float("nan"),
               "singlet_gap_ev": float("nan"), "n_matvecs": 0,
               "wall_time_s": 0.0, "converged": False, "error": ""}
        try:
            res = run_mixed(ctx, n_q, max_exc=k, n_eigs=n_eigs, tol=tol,
                            count_bath_only=count_bath_only)
            row["triplet_gap_ev"] = res.triplet_gap * HARTREE_TO_EV
            row["singlet_gap_ev"] = res.singlet_gap * HARTREE_TO_EV
            row["n_matvecs"] = res.report.get("n_matvecs", 0)
            row["converged"] = bool(res.report.get("converged", False))
        except SolverConvergenceError as exc:
            row["error"] = str(exc)
            row["n_matvecs"] = exc.report.get("n_matvecs", 0)
            log.warning("sweep point n_q=%d failed: %s", n_q, exc)
        row["wall_time_s"] = time.perf_counter() - t0
        rows.append(row)
    return rows


def spectrum_table(ctx, gamma_ev=0.02, n_points=2001):
    """Lorentzian transition-strength density on a uniform eV grid.

    Returns (grid_ev, s_ev): unit-area peaks of width gamma_ev at the
    normal frequencies, weighted by the squared transverse couplings
    (both converted to eV). Grid spans [0, max frequency + 10 gamma].
    """
    if gamma_ev <= 0.0:
        raise ValueError("gamma must be positive")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    om_ev = ctx.nm.omega_big * HARTREE_TO_EV
    top = (float(np.max(om_ev)) if om_ev.size else 0.0) + 10.0 * gamma_ev
    grid = np.linspace(0.0, top, int(n_points))
    if om_ev.size == 0:
        return grid, np.zeros_like(grid)
    w = (ctx.nm.g[1] * HARTREE_TO_EV) ** 2
    diff = grid[:, None] - om_ev[None, :]
    peaks = (gamma_ev / np.pi) / (diff ** 2 + gamma_ev ** 2)
    return grid, peaks @ w
