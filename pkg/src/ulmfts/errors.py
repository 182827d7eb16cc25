"""Shared exception types."""


class SingularInfluenceError(ValueError):
    """An influence or mismatch matrix is singular or too ill-conditioned to invert."""


class DegeneratePencilError(ValueError):
    """The characteristic pencil vanishes identically (no isolated roots exist)."""
