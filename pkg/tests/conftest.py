"""Shared generators for randomized tests.

Instances are built diagonal-dominant so the environment stays stable
(every bath frequency positive) for most draws; callers that need
guaranteed stability use the retry helpers.
"""

from __future__ import annotations

import numpy as np
import pytest

from sysbath.bath import PositiveDefinitenessError
from sysbath.fcidump import IntegralSet
from sysbath.system import SystemParams, UnstableModeError

ERI_TRANSPOSES = ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
                  (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0))


def symmetrize_eri(h):
    """Average over the 8-fold permutation group.

    Applied pairwise over the three generators so equivalent slots come
    out bit-identical, not merely equal to rounding; emit/parse round
    trips rely on that.
    """
    h = h + h.transpose(1, 0, 2, 3)
    h = h + h.transpose(0, 1, 3, 2)
    h = h + h.transpose(2, 3, 0, 1)
    return h / 8.0


def random_integral_set(rng, norb, nelec=None, core=None, noise=0.01,
                        spread=2.0):
    """Closed-shell integral set with controlled off-diagonal structure.

    Diagonal one-body energies span `spread` Hartree; charging, direct
    and exchange integrals sit in chemically plausible windows; `noise`
    scales a dense symmetric perturbation that makes every transition
    integral (and hence every bath coupling) nonzero.
    """
    if nelec is None:
        nelec = norb - norb % 2
    eps = np.sort(rng.uniform(-spread / 2, spread / 2, norb))
    t = np.diag(eps) + noise * 0.1 * rng.standard_normal((norb, norb))
    t = 0.5 * (t + t.T)
    h = noise * rng.standard_normal((norb,) * 4)
    for p in range(norb):
        h[p, p, p, p] = rng.uniform(0.2, 0.6)
        for q in range(norb):
            if p != q:
                h[p, p, q, q] = rng.uniform(0.05, 0.15)
                h[p, q, p, q] = rng.uniform(0.005, 0.03)
    h = symmetrize_eri(h)
    return IntegralSet(norb=norb, nelec=nelec, ms2=0,
                       core_energy=float(rng.uniform(-2, 2)) if core is None else core,
                       one_body=t, two_body=h)


def random_system_params(rng, hoppings=False):
    eps1 = rng.uniform(-1.0, 0.0)
    eps2 = eps1 + rng.uniform(0.1, 1.5)
    return SystemParams(
        eps1=eps1, eps2=eps2,
        u1=rng.uniform(0.1, 0.5), u2=rng.uniform(0.1, 0.5),
        j12=rng.uniform(0.02, 0.2), k12=rng.uniform(0.002, 0.05),
        t1_tilde=rng.uniform(-0.1, 0.1) if hoppings else 0.0,
        t2_tilde=rng.uniform(-0.1, 0.1) if hoppings else 0.0,
    )


def stable_context(rng, norb, model="auto", max_tries=50, noise=0.01,
                   **kwargs):
    """Pipeline context on a random instance, retrying unstable draws."""
    from sysbath import workflows
    last = None
    for _ in range(max_tries):
        s = random_integral_set(rng, norb, noise=noise, **kwargs)
        try:
            return workflows.prepare(s, model=model), s
        except (UnstableModeError, PositiveDefinitenessError) as exc:
            last = exc
    raise RuntimeError(f"no stable instance in {max_tries} draws: {last}")


def positive_definite_bath(rng, dim, omega_lo=0.5, omega_hi=3.0,
                           v_scale=0.05):
    """Random (omegas, V) pair whose normal-mode matrix is PD."""
    from sysbath.bath import CouplingMatrix
    omegas = rng.uniform(omega_lo, omega_hi, dim)
    v = v_scale * rng.standard_normal((dim, dim))
    v = 0.5 * (v + v.T)
    for _ in range(40):
        cm = CouplingMatrix.from_quadratic(omegas, v)
        if np.linalg.eigvalsh(cm.m)[0] > 1e-10:
            return omegas, v
        v *= 0.5
    raise RuntimeError("could not reach positive definiteness")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
