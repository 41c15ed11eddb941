"""Command-line front end.

Heavy imports happen inside command bodies so that SYSBATH_THREADS can
cap the BLAS/OpenMP pools before numpy initializes. Exit codes: 0 on
success, 2 for input problems (parse, partition, bad flags), 3 for
numerical failures (instabilities, non-convergence).
"""

from __future__ import annotations

import json
import logging
import os
import sys
from dataclasses import dataclass, field

import click

SCHEMA_VERSION = 1

EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _setup_threads():
    n = os.environ.get("SYSBATH_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "MKL_NUM_THREADS",
                    "OPENBLAS_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, n)


@dataclass
class RunConfig:
    """Validated knobs for one command invocation."""

    input_path: str
    homo: int = None
    lumo: int = None
    partition_json: str = None
    model: str = "auto"
    n_q: int = 62
    max_excitations: int = 4
    n_eigs: int = 6
    tol: float = 1e-9
    gamma_ev: float = 0.02
    output_format: str = "json"
    unit: str = "ev"
    drop_unstable_modes: bool = False
    count_bath_only: bool = False
    output: str = None
    extras: dict = field(default_factory=dict)

    def validate(self):
        if self.n_q < 0:
            raise ValueError("--nq must be nonnegative")
        if self.max_excitations < 0:
            raise ValueError("--max-exc must be nonnegative")
        if self.n_eigs < 1:
            raise ValueError("--n-eigs must be positive")
        if self.tol <= 0:
            raise ValueError("--tol must be positive")
        if self.gamma_ev <= 0:
            raise ValueError("--gamma must be positive")
        return self


def _numerical_errors():
    from .bath import PositiveDefinitenessError
    from .pauli import SolverConvergenceError
    from .system import UnstableModeError
    return PositiveDefinitenessError, UnstableModeError, SolverConvergenceError


def _emit(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        click.echo(text)


def _emit_json(payload, output):
    _emit(json.dumps(payload, indent=2), output)


def _error_payload(exc):
    return {"schema_version": SCHEMA_VERSION,
            "error": {"type": type(exc).__name__, "message": str(exc)}}


def _run_guarded(cfg, body):
    """Run a command body, translating exceptions to exit codes."""
    numerical = _numerical_errors()
    try:
        cfg.validate()
        return body()
    except numerical as exc:
        _emit_json(_error_payload(exc), cfg.output)
        click.echo(f"numerical failure: {exc}", err=True)
        raise SystemExit(EXIT_NUMERICAL)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        _emit_json(_error_payload(exc), cfg.output)
        click.echo(f"input error: {exc}", err=True)
        raise SystemExit(EXIT_INPUT)


def _load_context(cfg):
    from . import workflows
    from .fcidump import load_fcidump
    from .system import OrbitalPartition

    s = load_fcidump(cfg.input_path)
    partition = None
    if cfg.partition_json:
        raw = json.loads(cfg.partition_json)
        partition = OrbitalPartition(
            homo=int(raw["homo"]), lumo=int(raw["lumo"]),
            doubly_occupied=tuple(int(i) for i in raw.get("doubly_occupied", ())),
            empty=tuple(int(i) for i in raw.get("empty", ())))
    return workflows.prepare(s, homo=cfg.homo, lumo=cfg.lumo, model=cfg.model,
                             drop_unstable=cfg.drop_unstable_modes,
                             partition=partition)


def _unit_scale(unit):
    from .constants import HARTREE_TO_EV
    return (HARTREE_TO_EV, "ev") if unit == "ev" else (1.0, "hartree")


def _model_code(label):
    return {"singlet": "sg", "triplet": "tr"}[label]


def _screened_dict(scr):
    return {
        "u1_hartree": scr.u1_t, "u2_hartree": scr.u2_t,
        "j12_hartree": scr.j12_t, "k12_hartree": scr.k12_t,
        "tau1_hartree": scr.tau1_t, "tau2_hartree": scr.tau2_t,
    }


# ---------------------------------------------------------------------------
# shared option decorators

def input_argument(f):
    return click.argument("input_path", metavar="INPUT")(f)


def partition_options(f):
    for opt in (
        click.option("--homo", type=int, default=None,
                     help="System HOMO index (1-based); requires --lumo."),
        click.option("--lumo", type=int, default=None,
                     help="System LUMO index; must equal HOMO+1."),
        click.option("--explicit-partition", "partition_json", default=None,
                     help="JSON partition {homo, lumo, doubly_occupied, empty}."),
        click.option("--model", type=click.Choice(["auto", "sg", "tr"]),
                     default="auto", show_default=True,
                     help="Environment model; auto classifies the ground state."),
        click.option("--drop-unstable-modes", is_flag=True,
                     help="Drop non-positive-frequency bath modes instead of failing."),
    ):
        f = opt(f)
    return f


def output_options(f):
    for opt in (
        click.option("-o", "--output", default=None,
                     help="Write to file instead of stdout."),
        click.option("--unit", type=click.Choice(["ev", "hartree"]),
                     default="ev", show_default=True),
    ):
        f = opt(f)
    return f


def solver_options(f):
    for opt in (
        click.option("--nq", "n_q", type=int, default=62, show_default=True,
                     help="Number of explicit bath qubits (clamped to the mode count)."),
        click.option("--max-exc", "max_excitations", type=int, default=4,
                     show_default=True, help="Excitation cap of the truncated subspace."),
        click.option("--n-eigs", type=int, default=6, show_default=True),
        click.option("--tol", type=float, default=1e-9, show_default=True),
        click.option("--count-bath-only", is_flag=True,
                     help="Excitation cap counts bath qubits only."),
    ):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="sysbath")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """Vertical excitation gaps of a two-orbital system in an RPA bath."""
    _setup_threads()
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# inspect

@main.command()
@input_argument
@partition_options
@click.option("-o", "--output", default=None)
def inspect(input_path, homo, lumo, partition_json, model,
            drop_unstable_modes, output):
    """Summarize an integral file: partition, parameters, bath profile."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes,
                    output=output)

    def body():
        from .constants import HARTREE_TO_EV
        ctx = _load_context(cfg)
        s, p, sp = ctx.integrals, ctx.partition, ctx.params
        lines = []
        add = lines.append
        add(f"input: {cfg.input_path}")
        add(f"norb: {s.norb}   nelec: {s.nelec}   ms2: {s.ms2}")
        add(f"partition: HOMO={p.homo} LUMO={p.lumo} "
            f"N_db={p.n_db} N_empt={p.n_empt}")
        add(f"ground-state class: {ctx.bare_class.label} "
            f"(E_sg={ctx.bare_class.e_singlet_lowest:.6f} Ha, "
            f"E_tr={ctx.bare_class.e_triplet:.6f} Ha)")
        add(f"environment model: {ctx.model_label} "
            f"({'auto' if cfg.model == 'auto' else 'forced'})")
        add(f"N_RPA: {ctx.n_rpa} (expected {ctx.n_rpa_expected})")
        add("system parameters (Hartree | eV):")
        for name in ("eps1", "eps2", "u1", "u2", "j12", "k12",
                     "t1_tilde", "t2_tilde"):
            v = getattr(sp, name)
            add(f"  {name:9s} {v: .8f} | {v * HARTREE_TO_EV: .3f}")
        if ctx.n_rpa == 0:
            add("environment absent: no bath modes for this partition")
        else:
            om_ev = ctx.nm.omega_big * HARTREE_TO_EV
            lowest = ", ".join(f"{w:.3f}" for w in om_ev[:5])
            add(f"five lowest normal frequencies (eV): {lowest}")
            d12 = sp.delta12
            if d12 != 0.0:
                ratio = float(ctx.nm.omega_big[0]) / abs(d12)
                add(f"Markovian diagnostic min(Omega)/|delta12|: {ratio:.3f}")
            else:
                add("Markovian diagnostic min(Omega)/|delta12|: undefined "
                    "(delta12 = 0)")
        _emit("\n".join(lines), cfg.output)

    _run_guarded(cfg, body)


# ---------------------------------------------------------------------------
# solve group

@main.group()
def solve():
    """Compute excitation gaps (static screening or mixed treatment)."""


@solve.command("static")
@input_argument
@partition_options
@output_options
def solve_static(input_path, homo, lumo, partition_json, model,
                 drop_unstable_modes, output, unit):
    """Full static screening: every bath mode renormalizes the system."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes,
                    output=output, unit=unit)

    def body():
        from . import workflows
        ctx = _load_context(cfg)
        st = workflows.run_static(ctx)
        scale, tag = _unit_scale(cfg.unit)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "solve-static",
            "model": _model_code(ctx.model_label),
            f"gaps_{tag}": {
                "triplet_gap": st["lowest_triplet_gap"] * scale,
                "singlet_gap": st["lowest_singlet_gap"] * scale,
            },
            "screened_params_hartree": _screened_dict(st["screened_params"]),
            "n_rpa": ctx.n_rpa,
            "excluded_modes": list(st["screened_params"].excluded_mode_set),
            "diagnostics": {
                "bare_class": ctx.bare_class.label,
                "env_ground_hartree": ctx.env_const,
            },
        }
        _emit_json(payload, cfg.output)

    _run_guarded(cfg, body)


@solve.command("mixed")
@input_argument
@partition_options
@output_options
@solver_options
def solve_mixed_cmd(input_path, homo, lumo, partition_json, model,
                    drop_unstable_modes, output, unit, n_q,
                    max_excitations, n_eigs, tol, count_bath_only):
    """Keep the strongest-coupled modes explicit, screen the rest."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes, output=output,
                    unit=unit, n_q=n_q, max_excitations=max_excitations,
                    n_eigs=n_eigs, tol=tol,
                    count_bath_only=count_bath_only)

    def body():
        from . import workflows
        from .pauli import SolverConvergenceError
        ctx = _load_context(cfg)
        scale, tag = _unit_scale(cfg.unit)
        try:
            res = workflows.run_mixed(
                ctx, cfg.n_q, max_exc=cfg.max_excitations,
                n_eigs=cfg.n_eigs, tol=cfg.tol,
                count_bath_only=cfg.count_bath_only)
        except SolverConvergenceError as exc:
            payload = _error_payload(exc)
            payload["partial"] = {
                f"energies_{tag}": [v * scale for v in exc.eigenvalues]
                if exc.eigenvalues is not None else [],
                "report": exc.report,
            }
            _emit_json(payload, cfg.output)
            click.echo(f"numerical failure: {exc}", err=True)
            raise SystemExit(EXIT_NUMERICAL)
        lev = res.rank.leverage
        explicit = [{"mode": int(m),
                     "leverage_hartree": float(lev[m]),
                     "omega_hartree": float(ctx.nm.omega_big[m])}
                    for m in res.rank.explicit]
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "solve-mixed",
            "model": _model_code(ctx.model_label),
            "n_q": res.n_explicit,
            "max_excitations": res.max_excitations,
            "subspace_dim": res.dim,
            f"gaps_{tag}": {
                "triplet_gap": res.triplet_gap * scale,
                "singlet_gap": res.singlet_gap * scale,
            },
            f"energies_{tag}": [float(e) * scale for e in res.energies],
            "state_labels": list(res.labels),
            "triplet_weights": [float(w) for w in res.triplet_weights],
            "explicit_modes": explicit,
            "screened_params_hartree": _screened_dict(res.screened),
            "n_rpa": ctx.n_rpa,
            "convergence": res.report,
        }
        _emit_json(payload, cfg.output)

    _run_guarded(cfg, body)


# ---------------------------------------------------------------------------
# sweep

@main.command()
@input_argument
@partition_options
@click.option("--nq-list", required=True,
              help="Comma-separated ascending explicit-mode counts, e.g. 0,2,4.")
@click.option("--k-schedule", default=None,
              help="Excitation caps: one int or comma list matching --nq-list "
                   "(default: 4 up to 62 modes, 2 above).")
@click.option("--n-eigs", type=int, default=6, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--count-bath-only", is_flag=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("-o", "--output", default=None)
def sweep(input_path, homo, lumo, partition_json, model, drop_unstable_modes,
          nq_list, k_schedule, n_eigs, tol, count_bath_only, fmt, output):
    """Gap convergence versus the number of explicit bath qubits."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes,
                    n_eigs=n_eigs, tol=tol, count_bath_only=count_bath_only,
                    output=output, output_format=fmt)

    def body():
        from . import workflows
        ctx = _load_context(cfg)
        nqs = [int(x) for x in nq_list.split(",") if x.strip() != ""]
        schedule = None
        if k_schedule is not None:
            parts = [int(x) for x in k_schedule.split(",") if x.strip() != ""]
            schedule = parts[0] if len(parts) == 1 else parts
        rows = workflows.convergence_sweep(
            ctx, nqs, k_schedule=schedule, n_eigs=cfg.n_eigs, tol=cfg.tol,
            count_bath_only=cfg.count_bath_only)
        if cfg.output_format == "json":
            _emit_json({"schema_version": SCHEMA_VERSION, "command": "sweep",
                        "model": _model_code(ctx.model_label), "rows": rows},
                       cfg.output)
        else:
            cols = ["n_q", "k", "triplet_gap_ev", "singlet_gap_ev",
                    "n_matvecs", "wall_time_s", "converged", "error"]
            lines = [",".join(cols)]
            for row in rows:
                lines.append(",".join(_csv_cell(row[c]) for c in cols))
            _emit("\n".join(lines), cfg.output)

    _run_guarded(cfg, body)


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    text = str(value)
    if "," in text or '"' in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


# ---------------------------------------------------------------------------
# spectrum

@main.command()
@input_argument
@partition_options
@click.option("--gamma", "gamma_ev", type=float, default=0.02,
              show_default=True, help="Lorentzian half-width (eV).")
@click.option("--points", type=int, default=2001, show_default=True)
@click.option("-o", "--output", default=None)
def spectrum(input_path, homo, lumo, partition_json, model,
             drop_unstable_modes, gamma_ev, points, output):
    """Transition-strength density of the bath modes as two-column CSV."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes,
                    gamma_ev=gamma_ev, output=output,
                    extras={"points": points})

    def body():
        from . import workflows
        ctx = _load_context(cfg)
        grid, dens = workflows.spectrum_table(ctx, gamma_ev=cfg.gamma_ev,
                                              n_points=cfg.extras["points"])
        lines = ["energy_ev,spectral_density_ev"]
        lines.extend(f"{e:.6f},{s:.12g}" for e, s in zip(grid, dens))
        _emit("\n".join(lines), cfg.output)

    _run_guarded(cfg, body)


# ---------------------------------------------------------------------------
# export-pauli

@main.command("export-pauli")
@input_argument
@partition_options
@click.option("--nq", "n_q", type=int, default=62, show_default=True)
@click.option("-o", "--output", default=None)
def export_pauli(input_path, homo, lumo, partition_json, model,
                 drop_unstable_modes, n_q, output):
    """Serialize the assembled qubit Hamiltonian as JSON Pauli terms."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes, n_q=n_q,
                    output=output)

    def body():
        from . import workflows
        ctx = _load_context(cfg)
        h, rank, _scr = workflows.build_pauli_sum(ctx, cfg.n_q)
        payload = h.to_json_dict()
        payload["command"] = "export-pauli"
        payload["model"] = _model_code(ctx.model_label)
        payload["explicit_modes"] = [int(m) for m in rank.explicit]
        _emit_json(payload, cfg.output)

    _run_guarded(cfg, body)


# ---------------------------------------------------------------------------
# verify

@main.command()
@input_argument
@partition_options
@click.option("--nq", "n_q", type=int, default=4, show_default=True,
              help="Explicit modes for the dense cross-check (small).")
@click.option("-o", "--output", default=None)
def verify(input_path, homo, lumo, partition_json, model,
           drop_unstable_modes, n_q, output):
    """Run brute-force oracle cross-checks against the production path."""
    cfg = RunConfig(input_path=input_path, homo=homo, lumo=lumo,
                    partition_json=partition_json, model=model,
                    drop_unstable_modes=drop_unstable_modes, n_q=n_q,
                    output=output)

    def body():
        checks = _verify_checks(cfg)
        lines = []
        failed = False
        for name, ok, detail in checks:
            status = "OK" if ok else "FAIL"
            failed = failed or not ok
            lines.append(f"[{status}] {name}: {detail}")
        lines.append("verification " + ("FAILED" if failed else "passed")
                     + f" ({len(checks)} checks)")
        _emit("\n".join(lines), cfg.output)
        if failed:
            raise SystemExit(EXIT_NUMERICAL)

    _run_guarded(cfg, body)


def _verify_checks(cfg):
    """Oracle cross-checks at desk scale; returns (name, ok, detail) rows."""
    import numpy as np

    from . import oracle, workflows
    from .mixed import rank_modes
    from .pauli import build_subspace, lowest_eigenvalues
    from .screening import screened_integrals_eig, screened_integrals_inv

    ctx = _load_context(cfg)
    s = ctx.integrals
    checks = []

    # parser round trip
    if s.norb <= 32:
        from .fcidump import emit_fcidump, parse_fcidump
        again = parse_fcidump(emit_fcidump(s))
        ok = again.allclose(s, tol=1e-14)
        checks.append(("fcidump round-trip", ok, f"norb={s.norb}"))

    # dual-route screening
    if ctx.n_rpa > 0:
        h_eig = screened_integrals_eig(s, ctx.partition, ctx.nm)
        h_inv = screened_integrals_inv(s, ctx.partition, ctx.modes, ctx.cm)
        diff = float(np.max(np.abs(h_eig - h_inv)))
        checks.append(("dual-route screening", diff <= 1e-10,
                       f"max |eig-inv| = {diff:.3e}"))

        # normal-mode algebra
        smat = ctx.nm.s_matrix
        orth = float(np.max(np.abs(smat.T @ smat - np.eye(ctx.n_rpa))))
        resid = float(np.max(np.abs(ctx.cm.m @ smat
                                    - smat @ np.diag(ctx.nm.omega_big ** 2))))
        rel = resid / max(1.0, float(np.max(np.abs(ctx.cm.m))))
        ok = orth <= 1e-10 and rel <= 1e-9
        checks.append(("normal-mode algebra", ok,
                       f"|S^T S - I| = {orth:.3e}, eig residual = {rel:.3e}"))

    # static vs mixed at n_q = 0
    st = workflows.run_static(ctx)
    mx0 = workflows.run_mixed(ctx, 0)
    d_t = abs(st["lowest_triplet_gap"] - mx0.triplet_gap)
    d_s = abs(st["lowest_singlet_gap"] - mx0.singlet_gap)
    d_s = 0.0 if (np.isnan(st["lowest_singlet_gap"])
                  and np.isnan(mx0.singlet_gap)) else d_s
    checks.append(("static/mixed consistency (n_q=0)",
                   d_t <= 1e-12 and d_s <= 1e-12,
                   f"gap diffs = {d_t:.3e}, {d_s:.3e}"))

    # iterative vs dense qubit diagonalization
    nq_eff = min(cfg.n_q, ctx.n_rpa, 8)
    if nq_eff > 0:
        h, rank, _scr = workflows.build_pauli_sum(ctx, nq_eff)
        sub = build_subspace(h.n_qubits, h.n_qubits)
        vals, _vecs, _rep = lowest_eigenvalues(h, sub, n_eigs=4)
        dense = oracle.dense_qubit_diag(h)[:4]
        diff = float(np.max(np.abs(vals - dense)))
        checks.append((f"iterative vs dense (n_q={nq_eff})", diff <= 1e-9,
                       f"max |diff| = {diff:.3e} Ha"))
        lev = rank.leverage
        brute = tuple(sorted(range(ctx.n_rpa),
                             key=lambda i: (-lev[i], i))[:nq_eff])
        checks.append(("leverage ranking vs brute-force sort",
                       brute == rank.explicit,
                       f"top {nq_eff} modes {list(rank.explicit)}"))

    # FCI reference for tiny systems
    if s.norb <= 8 and s.nelec >= 1:
        fci = oracle.fci_lowest(s, 1)[0]
        if s.norb == 2:
            model_ground = float(min(ctx.bare_class.e_singlet_lowest,
                                     ctx.bare_class.e_triplet)) + s.core_energy
            diff = abs(fci - model_ground)
            checks.append(("FCI exactness (2 orbitals)", diff <= 1e-10,
                           f"|FCI - model| = {diff:.3e} Ha"))
        else:
            approx = mx0.energies[0]
            checks.append(("FCI reference (informational)", True,
                           f"FCI E0 = {fci:.8f} Ha, model E0 = "
                           f"{approx:.8f} Ha, diff = {approx - fci:+.3e}"))
    return checks


if __name__ == "__main__":
    main()
