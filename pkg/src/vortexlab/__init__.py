"""Singular S^1-valued harmonic maps, renormalized energy and stationary p-harmonic maps on planar domains."""
