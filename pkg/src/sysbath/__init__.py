"""Two-orbital electronic system coupled to an RPA-style bosonic bath.

Pipeline: parse a molecular integral file, split orbitals into a
HOMO/LUMO system pair plus an environment, map environment excitations
onto coupled oscillators, then compute vertical excitation gaps either
by static screening of the system parameters or with the strongest
modes kept as explicit bath qubits.

Submodules are imported lazily so that process-level knobs (thread
counts) can be set before numpy loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "IntegralSet": "fcidump",
    "FcidumpError": "fcidump",
    "parse_fcidump": "fcidump",
    "load_fcidump": "fcidump",
    "emit_fcidump": "fcidump",
    "OrbitalPartition": "system",
    "PartitionError": "system",
    "UnstableModeError": "system",
    "default_partition": "system",
    "SystemParams": "system",
    "system_params": "system",
    "classify_ground_state": "system",
    "enumerate_bath_modes": "system",
    "expected_mode_count": "system",
    "BathMode": "system",
    "CouplingMatrix": "bath",
    "NormalModeBasis": "bath",
    "PositiveDefinitenessError": "bath",
    "build_coupling_matrix": "bath",
    "diagonalize": "bath",
    "transform_couplings": "bath",
    "environment_ground_energy": "bath",
    "spectral_density": "bath",
    "ScreenedParams": "screening",
    "screened_params": "screening",
    "screened_integrals_eig": "screening",
    "screened_integrals_inv": "screening",
    "static_solve": "screening",
    "PauliTermSum": "pauli",
    "TruncatedSubspace": "pauli",
    "SolverConvergenceError": "pauli",
    "build_subspace": "pauli",
    "lowest_eigenvalues": "pauli",
    "CouplingRank": "mixed",
    "rank_modes": "mixed",
    "renormalize_remainder": "mixed",
    "assemble_hamiltonian": "mixed",
    "solve_mixed": "mixed",
    "excitation_energies": "mixed",
    "MixedResult": "mixed",
    "PipelineContext": "workflows",
    "prepare": "workflows",
    "run_static": "workflows",
    "run_mixed": "workflows",
    "build_pauli_sum": "workflows",
    "convergence_sweep": "workflows",
    "spectrum_table": "workflows",
    "HARTREE_TO_EV": "constants",
    "CHEMICAL_ACCURACY_EV": "constants",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module_name = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib
    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
