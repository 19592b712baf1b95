"""Decoherence-filtered critical spin chains: system-environment entanglement,
Renyi-2 correlators and g-function extraction on dense and MPS backends."""

__version__ = "0.1.0"
