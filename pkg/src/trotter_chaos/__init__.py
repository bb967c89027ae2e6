"""Digital quantum simulation of chaotic Hamiltonians with Trotter product formulas.

Submodules: :mod:`linalg`, :mod:`operators`, :mod:`models`, :mod:`evolution`,
:mod:`signatures`, :mod:`rmt`, :mod:`errors` and the :mod:`runner` package.
"""
__version__ = "0.1.0"
