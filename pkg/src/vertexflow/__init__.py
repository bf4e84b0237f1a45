"""Stochastic colored vertex models: lattices, samplers, and exact q-moment integrals."""

__all__ = ["errors", "hecke", "lattice", "qmoments", "sampler", "verify", "weights", "contours", "cli"]
__version__ = "0.1.0"
