"""spinwigner - Wigner functions for arbitrary spin systems.

Displaced-parity kernels for qubits, spin-j, multiqubit and SU(N) systems,
phase-space fields, and numerical Stratonovich-Weyl verification.
"""

__version__ = "0.1.0"
