"""Forward models and parameter extraction for a linear quadruple quantum dot.

The array is treated as two double-dot charge qubits coupled capacitively.
Submodules:

* ``capnet``: constant-interaction electrostatics of the four-dot network.
* ``hamiltonian``: the two-qubit Hamiltonian and thermal polarizations.
* ``diagram``: synthesis of polarization diagrams and honeycombs.
* ``fitters``: linecut, shift-curve, curvature, thermal and transition fits.
* ``geometry``: boundary-element capacitance of discs under a ground plane.
* ``cli``: the ``qdcoupling`` command.
"""
__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402

__all__ = ["__version__", "BACKEND"]
