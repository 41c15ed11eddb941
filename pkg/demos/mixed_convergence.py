"""Gap convergence as bath modes are promoted to explicit qubits.

The mixed solver keeps the highest-leverage collective modes as qubits
and folds the rest into statically screened parameters. With zero
explicit modes it reduces to pure static screening; adding modes
lets the wavefunction build system-bath entanglement. The synthetic
molecule is small enough to watch the gaps settle within a few modes.
"""

from _common import synthetic_integrals
from sysbath import HARTREE_TO_EV, prepare, run_mixed, run_static
from sysbath.mixed import mode_leverage, rank_modes

if __name__ == "__main__":
    ctx = prepare(synthetic_integrals(norb=6))
    st = run_static(ctx)
    print(f"molecule: norb=6, {ctx.n_rpa} collective modes, "
          f"bare ground state {ctx.bare_class.label}")

    lev = mode_leverage(ctx.nm)
    order = rank_modes(ctx.nm, 4).explicit
    print("\nmode leverage ranking (top 4)")
    for n in order:
        print(f"  mode {n:2d}: leverage {lev[n]:.3e} Ha at "
              f"{ctx.nm.omega_big[n] * HARTREE_TO_EV:7.4f} eV")

    print(f"\n{'n_q':>4} {'dim':>6} {'triplet gap (eV)':>17} "
          f"{'singlet gap (eV)':>17}")
    print(f"{'':>4} {'':>6} {st['lowest_triplet_gap'] * HARTREE_TO_EV:17.6f} "
          f"{st['lowest_singlet_gap'] * HARTREE_TO_EV:17.6f}   static reference")
    for n_q in range(0, 5):
        res = run_mixed(ctx, n_q, max_exc=4)
        print(f"{n_q:4d} {res.dim:6d} "
              f"{res.triplet_gap * HARTREE_TO_EV:17.6f} "
              f"{res.singlet_gap * HARTREE_TO_EV:17.6f}")
    print("\nn_q=0 reproduces the static reference exactly. With explicit"
          "\nmodes the solver resolves the pair's own singlet excitation,"
          "\nwhich sits below the lowest collective mode that the static"
          "\nconvention reports; the residual drift with n_q is genuine"
          "\nsystem-bath correlation.")
