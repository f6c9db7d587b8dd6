"""Frequency-comb photon correlations and entanglement from modulated qubit arrays.

Three mutually cross-validating computational routes: diagrammatic
scattering amplitudes, a Lindblad master equation with quantum regression,
and closed-form comb analytics, plus inverse modulation design.
"""

__version__ = "0.1.0"

from . import comb, design, entangle, lindblad, model, numerics, spectral, twophoton  # noqa: F401
