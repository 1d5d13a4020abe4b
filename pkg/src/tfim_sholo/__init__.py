"""Semi-discrete observables of the critical transverse-field Ising chain.

Geometry and configurations on the semi-discrete lattice, interface tracing,
the birth-death sampler, FK and spin observables, the H primitive of
s-holomorphic fields, an exact-diagonalization oracle and a CLI.
"""
__version__ = "0.1.0"
