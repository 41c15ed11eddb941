"""Orbital partition, two-orbital system parameters, and bath-mode catalog.

The molecule is split into a two-orbital HOMO/LUMO "system" holding two
electrons and an environment of doubly occupied (alpha, beta, ...) and
empty (m, n, ...) orbitals. Environment electron-hole transitions become
harmonic bath modes; which transition families appear depends on whether
the isolated system ground state is a singlet or a triplet.

Orbital indices in the public types are 1-based (file convention);
internal numpy access subtracts 1.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


class PartitionError(ValueError):
    pass


class UnstableModeError(ValueError):
    """A bath transition came out with a non-positive bare frequency."""


@dataclass(frozen=True)
class OrbitalPartition:
    """Assignment of every orbital to system (homo, lumo) or environment.

    doubly_occupied are the environment orbitals below the Fermi level
    (size N_db), empty the virtuals above the LUMO (size N_empt).
    """

    homo: int
    lumo: int
    doubly_occupied: tuple
    empty: tuple

    @property
    def n_db(self):
        return len(self.doubly_occupied)

    @property
    def n_empt(self):
        return len(self.empty)

    def validate(self, norb):
        groups = [{self.homo}, {self.lumo},
                  set(self.doubly_occupied), set(self.empty)]
        union = set().union(*groups)
        if sum(len(g) for g in groups) != len(union):
            raise PartitionError("partition sets overlap")
        if union != set(range(1, norb + 1)):
            raise PartitionError(f"partition does not cover orbitals 1..{norb}")
        if self.n_db + self.n_empt + 2 != norb:
            raise PartitionError("partition sizes inconsistent with norb")
        return self


def default_partition(s, homo=None, lumo=None):
    """HOMO/LUMO assignment assuming energy-ordered orbitals.

    Defaults place two electrons in the system: homo = ceil(nelec/2),
    lumo = homo+1, everything below doubly occupied, everything above
    empty. Overrides must keep those two blocks contiguous; arbitrary
    reorderings go through OrbitalPartition directly.
    """
    norb = s.norb
    if norb < 2:
        raise PartitionError("need at least two orbitals for a HOMO/LUMO system")
    if homo is None and lumo is None:
        homo = (s.nelec + 1) // 2
        lumo = homo + 1
    elif homo is None or lumo is None:
        raise PartitionError("override requires both homo and lumo")
    if not (1 <= homo < lumo <= norb):
        raise PartitionError(f"homo={homo}, lumo={lumo} invalid for norb={norb}")
    if lumo != homo + 1:
        raise PartitionError(
            "override leaves orbitals between homo and lumo unassigned; "
            "use an explicit partition listing all sets")
    part = OrbitalPartition(
        homo=homo, lumo=lumo,
        doubly_occupied=tuple(range(1, homo)),
        empty=tuple(range(lumo + 1, norb + 1)),
    )
    return part.validate(norb)


@dataclass(frozen=True)
class SystemParams:
    """Coefficients of the two-orbital system Hamiltonian (Hartree).

    eps1/eps2 are HOMO/LUMO energies including mean-field corrections from
    the doubly occupied environment, u1/u2 the charging energies, j12/k12
    the direct and exchange integrals, t1_tilde/t2_tilde the two effective
    hopping amplitudes.
    """

    eps1: float
    eps2: float
    u1: float
    u2: float
    j12: float
    k12: float
    t1_tilde: float = 0.0
    t2_tilde: float = 0.0

    @property
    def delta12(self):
        return self.eps2 + self.u2 - self.eps1 - self.u1


def corrected_hoppings(s, p):
    """t_pq plus the mean-field environment correction, system block only.

    Returns the 2x2 table over (homo, lumo): t_pq + sum over doubly
    occupied k of (2 h_pqkk - h_pkqk). The HOMO itself never enters the
    correction sum; its double occupancy is part of the system.
    """
    idx = [p.homo - 1, p.lumo - 1]
    occ = [k - 1 for k in p.doubly_occupied]
    h = s.two_body
    t = s.one_body[np.ix_(idx, idx)].copy()
    for k in occ:
        coul = h[np.ix_(idx, idx, [k], [k])][:, :, 0, 0]
        exch = h[np.ix_(idx, [k], idx, [k])][:, 0, :, 0]
        t += 2.0 * coul - exch
    return t


def system_params(s, p):
    """System parameters from the integrals and partition.

    Warns (without failing) when the charging or exchange integrals come
    out negative, which physical Coulomb kernels do not produce.
    """
    h = s.two_body
    h0, l0 = p.homo - 1, p.lumo - 1
    if h[h0, h0, h0, h0] < 0 or h[l0, l0, l0, l0] < 0:
        warnings.warn("negative charging energy in system block", stacklevel=2)
    if h[h0, l0, h0, l0] < 0:
        warnings.warn("negative exchange integral K12", stacklevel=2)
    tt = corrected_hoppings(s, p)
    return SystemParams(
        eps1=tt[0, 0],
        eps2=tt[1, 1],
        u1=h[h0, h0, h0, h0] / 2.0,
        u2=h[l0, l0, l0, l0] / 2.0,
        j12=h[h0, h0, l0, l0],
        k12=h[h0, l0, h0, l0],
        t1_tilde=tt[0, 1] + h[h0, h0, h0, l0],
        t2_tilde=tt[0, 1] + h[h0, l0, l0, l0],
    )


def hf_orbital_energies(s, p):
    """Mean-field orbital energies, one per orbital (0-based array).

    eps_k = t_kk + sum over doubly occupied alpha of (2 h_kkaa - h_kaka).
    Meaningful for environment orbitals; computed for all for convenience.
    """
    occ = [k - 1 for k in p.doubly_occupied]
    h = s.two_body
    eps = np.diag(s.one_body).copy()
    for a in occ:
        eps += 2.0 * h[:, :, a, a].diagonal() - h[:, a, :, a].diagonal()
    return eps


def environment_hf_energy(s, p):
    """Closed-shell mean-field energy of the doubly occupied environment.

    2 sum_a t_aa + sum_ab (2 h_aabb - h_abab), both sums over the
    doubly occupied set only.
    """
    occ = [k - 1 for k in p.doubly_occupied]
    if not occ:
        return 0.0
    t = s.one_body
    h = s.two_body
    e = 2.0 * sum(t[a, a] for a in occ)
    for a in occ:
        for b in occ:
            e += 2.0 * h[a, a, b, b] - h[a, b, a, b]
    return float(e)


# ---------------------------------------------------------------------------
# six-state system Hamiltonian and its closed forms

# basis order used throughout:
#   0 |ud, 0>   both electrons in the HOMO
#   1 |0, ud>   both electrons in the LUMO
#   2 |u, d>    HOMO up,   LUMO down
#   3 |d, u>    HOMO down, LUMO up
#   4 |u, u>    polarized triplet Sz=+1
#   5 |d, d>    polarized triplet Sz=-1
BASIS_LABELS = ("|ud,0>", "|0,ud>", "|u,d>", "|d,u>", "|u,u>", "|d,d>")

# Sz=0 triplet combination within the 4x4 block, (|u,d>+|d,u>)/sqrt(2)
TRIPLET_VECTOR_4 = np.array([0.0, 0.0, 1.0, 1.0]) / SQRT2


def build_system_matrix(sp):
    """Dense 6x6 system Hamiltonian in the BASIS_LABELS order."""
    e_pair = sp.eps1 + sp.eps2 + sp.j12
    k = sp.k12
    t1, t2 = sp.t1_tilde, sp.t2_tilde
    m = np.zeros((6, 6))
    m[0, 0] = 2.0 * (sp.eps1 + sp.u1)
    m[1, 1] = 2.0 * (sp.eps2 + sp.u2)
    m[2, 2] = m[3, 3] = e_pair
    m[4, 4] = m[5, 5] = e_pair - k
    m[0, 1] = m[1, 0] = k
    m[0, 2] = m[2, 0] = t1
    m[0, 3] = m[3, 0] = -t1
    m[1, 2] = m[2, 1] = t2
    m[1, 3] = m[3, 1] = -t2
    m[2, 3] = m[3, 2] = -k
    return m


def closed_form_energies(sp):
    """Analytic eigenvalues at t1_tilde = t2_tilde = 0.

    Returns (e_triplet, e_sg1, e_sg2, e_sg3): the triply degenerate
    triplet and the three singlets, e_sg1 <= e_sg3.
    """
    root = np.hypot(sp.delta12, sp.k12)
    base = sp.eps1 + sp.eps2
    e_tr = base + sp.j12 - sp.k12
    e_sg1 = base + sp.u1 + sp.u2 - root
    e_sg2 = base + sp.j12 + sp.k12
    e_sg3 = base + sp.u1 + sp.u2 + root
    return e_tr, e_sg1, e_sg2, e_sg3


def mixing_angle(sp):
    """(cos, sin) of the angle rotating |ud,0>, |0,ud> into the singlets."""
    root = np.hypot(sp.delta12, sp.k12)
    num = root + sp.delta12
    den = np.hypot(sp.k12, num)
    if den == 0.0:
        return 1.0, 0.0
    return num / den, sp.k12 / den


@dataclass
class SystemSpectrum:
    """Eigensystem of the six-state block with spin labels.

    energies ascending; vectors[:, i] is the eigenvector of energies[i]
    in the BASIS_LABELS order; sz0_energies are the four eigenvalues of
    the Sz=0 block alone; analytic marks the closed-form path.
    """

    energies: np.ndarray
    labels: tuple
    vectors: np.ndarray
    sz0_energies: np.ndarray
    analytic: bool


def label_sz0_states(vecs4):
    """singlet/triplet labels for 4x4-block eigenvectors via overlap with
    the analytic Sz=0 triplet combination. Ambiguous overlaps get a warning."""
    labels = []
    for i in range(vecs4.shape[1]):
        w = float(np.dot(TRIPLET_VECTOR_4, vecs4[:, i]) ** 2)
        if 0.4 <= w <= 0.6:
            warnings.warn(
                f"ambiguous spin character: triplet weight {w:.3f} for state {i}",
                stacklevel=3)
        labels.append("triplet" if w > 0.5 else "singlet")
    return labels


def _assemble_spectrum(vals4, vecs4, sp, analytic):
    e_polar = sp.eps1 + sp.eps2 + sp.j12 - sp.k12
    energies = np.concatenate([vals4, [e_polar, e_polar]])
    vectors = np.zeros((6, 6))
    vectors[:4, :4] = vecs4
    vectors[4, 4] = 1.0
    vectors[5, 5] = 1.0
    labels = label_sz0_states(vecs4) + ["triplet", "triplet"]
    order = np.argsort(energies, kind="stable")
    return SystemSpectrum(
        energies=energies[order],
        labels=tuple(labels[i] for i in order),
        vectors=vectors[:, order],
        sz0_energies=np.sort(vals4),
        analytic=analytic,
    )


def analytic_eigensystem(sp):
    """Closed-form spectrum when both hoppings vanish; dense fallback else."""
    if abs(sp.t1_tilde) >= 1e-12 or abs(sp.t2_tilde) >= 1e-12:
        log.debug("hoppings nonzero, falling back to dense diagonalization")
        return dense_eigensystem(sp)
    e_tr, e_sg1, e_sg2, e_sg3 = closed_form_energies(sp)
    c, s_ = mixing_angle(sp)
    vals4 = np.array([e_sg1, e_sg2, e_sg3, e_tr])
    vecs4 = np.array([
        [c, 0.0, s_, 0.0],
        [-s_, 0.0, c, 0.0],
        [0.0, 1.0 / SQRT2, 0.0, 1.0 / SQRT2],
        [0.0, -1.0 / SQRT2, 0.0, 1.0 / SQRT2],
    ])
    order = np.argsort(vals4, kind="stable")
    return _assemble_spectrum(vals4[order], vecs4[:, order], sp, analytic=True)


def dense_eigensystem(sp):
    """Spectrum via dense diagonalization of the Sz=0 block."""
    m4 = build_system_matrix(sp)[:4, :4]
    vals4, vecs4 = np.linalg.eigh(m4)
    return _assemble_spectrum(vals4, vecs4, sp, analytic=False)


@dataclass(frozen=True)
class GroundStateClass:
    """Singlet-vs-triplet call for the isolated system ground state."""

    label: str
    e_singlet_lowest: float
    e_triplet: float


def classify_ground_state(sp):
    """Compare the lowest singlet against the triplet energy.

    The Sz=0 triplet combination decouples exactly for any hoppings, so
    the singlet sector reduces to a 3x3 block over |ud,0>, |0,ud>, and
    (|u,d>-|d,u>)/sqrt(2); its lowest eigenvalue is the singlet candidate.
    """
    e_triplet = sp.eps1 + sp.eps2 + sp.j12 - sp.k12
    h3 = np.array([
        [2.0 * (sp.eps1 + sp.u1), sp.k12, SQRT2 * sp.t1_tilde],
        [sp.k12, 2.0 * (sp.eps2 + sp.u2), SQRT2 * sp.t2_tilde],
        [SQRT2 * sp.t1_tilde, SQRT2 * sp.t2_tilde, sp.eps1 + sp.eps2 + sp.j12 + sp.k12],
    ])
    e_singlet = float(np.linalg.eigvalsh(h3)[0])
    label = "triplet" if e_triplet < e_singlet else "singlet"
    return GroundStateClass(label=label, e_singlet_lowest=e_singlet, e_triplet=e_triplet)


# ---------------------------------------------------------------------------
# bath-mode catalog

# singlet-model transition families
KIND_ENV_ENV = "env_env"                    # alpha -> m, environment only
KIND_HOMO_TO_VIRTUAL = "homo_to_virtual"    # HOMO -> m        (singlet extra)
KIND_OCC_TO_LUMO = "occ_to_lumo"            # alpha -> LUMO    (singlet extra)
# triplet-model extra families
KIND_HOMO_EXC_TR = "homo_excitation_triplet"   # HOMO -> m
KIND_INTO_HOMO_TR = "into_homo_triplet"        # alpha -> HOMO
KIND_LUMO_EXC_TR = "lumo_excitation_triplet"   # LUMO -> m
KIND_INTO_LUMO_TR = "into_lumo_triplet"        # alpha -> LUMO

SINGLET_KINDS = (KIND_ENV_ENV, KIND_HOMO_TO_VIRTUAL, KIND_OCC_TO_LUMO)
TRIPLET_KINDS = (KIND_ENV_ENV, KIND_HOMO_EXC_TR, KIND_INTO_HOMO_TR,
                 KIND_LUMO_EXC_TR, KIND_INTO_LUMO_TR)


@dataclass
class BathMode:
    """One electron-hole transition treated as a harmonic mode.

    up/low are the 1-based (upper, lower) orbitals of the transition.
    omega is the bare frequency, r the RPA rotation factor, e_corr the
    pair correlation energy. lambda_coeffs are the three linear coupling
    coefficients (lambda_11, lambda_12, lambda_22) to the system, with
    all sqrt(2) and r prefactors baked in. x_amp carries the same
    prefactor for the quadratic mode-mode couplings; self_coupled marks
    families whose own pairing integral enters the diagonal.
    """

    kind: str
    up: int
    low: int
    omega: float
    r: float
    e_corr: float
    lambda_coeffs: np.ndarray
    x_amp: float
    self_coupled: bool


def expected_mode_count(n_db, n_empt, label):
    """Mode-count formulas for the two environment models."""
    if label == "singlet":
        return (n_db + 1) * (n_empt + 1) - 1
    if label == "triplet":
        return (n_db + 2) * (n_empt + 2) - 4
    raise ValueError(f"unknown model label {label!r}")


def _r_factor(delta, k):
    root = np.hypot(delta, k)
    num = root + delta - k
    den = np.hypot(k, root + delta)
    if den == 0.0:
        if delta > 0.0:
            return 1.0
        if delta < 0.0:
            return -1.0
        return 0.0
    return num / den


def enumerate_bath_modes(s, p, model, drop_unstable=False):
    """Full bath-mode list for the chosen environment model.

    `model` is a GroundStateClass or a plain "singlet"/"triplet" label.
    The list is ordered lexicographically by (kind, up, low); its length
    matches expected_mode_count unless drop_unstable removes entries.
    Modes with omega <= 0 raise UnstableModeError by default.
    """
    label = getattr(model, "label", model)
    if label not in ("singlet", "triplet"):
        raise ValueError(f"unknown model label {label!r}")

    sp = system_params(s, p)
    eps = hf_orbital_energies(s, p)
    h = s.two_body
    h0, l0 = p.homo - 1, p.lumo - 1

    def u_of(x):
        return h[x, x, x, x] / 2.0

    modes = []

    def add(kind, up, low, omega, r, e_corr, x_amp, self_coupled):
        lam = x_amp * np.array([
            h[h0, h0, up - 1, low - 1],
            h[h0, l0, up - 1, low - 1],
            h[l0, l0, up - 1, low - 1],
        ])
        modes.append(BathMode(kind=kind, up=up, low=low, omega=float(omega),
                              r=float(r), e_corr=float(e_corr),
                              lambda_coeffs=lam, x_amp=float(x_amp),
                              self_coupled=self_coupled))

    # environment-internal transitions, common to both models
    for m in (x - 1 for x in p.empty):
        for a in (x - 1 for x in p.doubly_occupied):
            j = h[m, m, a, a]
            k = h[m, a, m, a]
            delta = eps[m] - eps[a] + u_of(m) + u_of(a) - 2.0 * j + k
            root = np.hypot(delta, k)
            omega = root - u_of(a) - u_of(m) + j + k
            r = _r_factor(delta, k)
            add(KIND_ENV_ENV, m + 1, a + 1, omega, r, delta - root,
                x_amp=SQRT2 * r, self_coupled=False)

    if label == "singlet":
        # HOMO -> virtual transitions (HOMO -> LUMO itself excluded)
        for m in (x - 1 for x in p.empty):
            j = h[m, m, h0, h0]
            k = h[m, h0, m, h0]
            delta = eps[m] + u_of(m) - sp.eps1 - sp.u1
            root = np.hypot(delta, k)
            omega = j - sp.u1 - u_of(m) + k + root
            r = _r_factor(delta, k)
            add(KIND_HOMO_TO_VIRTUAL, m + 1, p.homo, omega, r, delta - root,
                x_amp=SQRT2 * r, self_coupled=True)
        # occupied -> LUMO transitions
        for a in (x - 1 for x in p.doubly_occupied):
            j = h[l0, l0, a, a]
            k = h[l0, a, l0, a]
            delta = sp.eps2 - eps[a] + sp.u2 + u_of(a) - 2.0 * j + k
            root = np.hypot(delta, k)
            omega = j - u_of(a) - sp.u2 + k + root
            r = _r_factor(delta, k)
            add(KIND_OCC_TO_LUMO, p.lumo, a + 1, omega, r, delta - root,
                x_amp=SQRT2 * r, self_coupled=True)
    else:
        # triplet-channel transitions touching the singly occupied system
        # orbitals; harmonic with unit amplitude, no correlation shift
        for m in (x - 1 for x in p.empty):
            omega = (eps[m] - sp.eps1 + h[m, m, l0, l0] - h[m, l0, m, l0]
                     - sp.j12 + sp.k12)
            add(KIND_HOMO_EXC_TR, m + 1, p.homo, omega, 1.0, 0.0,
                x_amp=1.0, self_coupled=True)
            omega = (eps[m] - sp.eps2 + h[m, m, h0, h0] - h[m, h0, m, h0]
                     - sp.j12 + sp.k12)
            add(KIND_LUMO_EXC_TR, m + 1, p.lumo, omega, 1.0, 0.0,
                x_amp=1.0, self_coupled=True)
        for a in (x - 1 for x in p.doubly_occupied):
            j1a = h[h0, h0, a, a]
            j2a = h[l0, l0, a, a]
            omega = (sp.eps1 - eps[a] + 2.0 * sp.u1 - 2.0 * j1a
                     + h[h0, a, h0, a] - j2a + sp.j12)
            add(KIND_INTO_HOMO_TR, p.homo, a + 1, omega, 1.0, 0.0,
                x_amp=1.0, self_coupled=True)
            omega = (sp.eps2 - eps[a] + 2.0 * sp.u2 - 2.0 * j2a
                     + h[l0, a, l0, a] - j1a + sp.j12)
            add(KIND_INTO_LUMO_TR, p.lumo, a + 1, omega, 1.0, 0.0,
                x_amp=1.0, self_coupled=True)

    modes.sort(key=lambda md: (md.kind, md.up, md.low))

    bad = [md for md in modes if md.omega <= 0.0]
    if bad:
        desc = ", ".join(f"{md.kind}({md.up},{md.low}) omega={md.omega:.6g}"
                         for md in bad)
        if not drop_unstable:
            raise UnstableModeError(
                f"{len(bad)} bath mode(s) with non-positive frequency: {desc}")
        log.warning("dropping %d unstable bath mode(s): %s", len(bad), desc)
        modes = [md for md in modes if md.omega > 0.0]
    return modes
