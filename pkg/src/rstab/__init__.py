"""Newton tensors, r-stability operators and principal eigenvalues of discrete hypersurfaces."""

__version__ = "0.1.0"
