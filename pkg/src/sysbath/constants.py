"""Physical constants and unit conversions.

Internal energies are Hartree throughout (hbar = 1). Conversion to eV
happens only at reporting boundaries (CLI output, spectral density CSV).
"""

HARTREE_TO_EV = 27.211386245988

# 1 kcal/mol, the usual chemical-accuracy yardstick for gap errors
CHEMICAL_ACCURACY_EV = 0.043


def hartree_to_ev(value):
    return value * HARTREE_TO_EV


def ev_to_hartree(value):
    return value / HARTREE_TO_EV
