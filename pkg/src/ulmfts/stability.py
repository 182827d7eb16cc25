"""Analytic stability engine for the coupled tracking/estimation error dynamics.

When the designed influence matrix differs from the true one, the tracking
error and the estimation error form a coupled linear recursion whose system
matrix A depends on the mismatch matrix ``H = G_design @ inv(G_true)`` and on
the two scalar gains ``c`` (controller) and ``d`` (observer).  Each eigenvalue
``alpha`` of H contributes one quadratic factor to the characteristic
polynomial of A,

    alpha * lam**2 + (1 - c - d - alpha) * lam + d * c = 0,

so the spectral radius of A is the largest root modulus over the alphas.  This
module computes those roots in a cancellation-safe way, sweeps them over
grids of alpha or (c, d), traces the unit-modulus boundary contour in the
alpha plane, and cross-checks the quadratic prediction against the assembled
block matrix via determinant residuals.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePencilError, SingularInfluenceError

#: Condition-number threshold for rejecting a mismatch matrix as singular.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class GainPair:
    """Scalar gain values (c, d) of controller and observer.

    Physically reachable gains lie in [-1, 1); the closed square [-1, 1] is
    accepted so stability maps can include their edges.
    """

    c: float
    d: float

    def __post_init__(self):
        if not (-1.0 <= self.c <= 1.0 and -1.0 <= self.d <= 1.0):
            raise ValueError(f"gains must lie in [-1, 1], got c={self.c}, d={self.d}")


@dataclass(frozen=True)
class AxisSpec:
    """One rectangular-grid axis: ``count`` evenly spaced values in [start, stop]."""

    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"axis count must be >= 1, got {self.count}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("axis endpoints must be finite")
        if self.start > self.stop:
            raise ValueError(f"axis start {self.start} exceeds stop {self.stop}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class StabilityGrid:
    """Spectral radii sampled on a rectangular grid (row-major over axis1, axis2)."""

    axis1: AxisSpec
    axis2: AxisSpec
    values: np.ndarray


def _stable_quadratic(a, b, q):
    """Both roots of ``a x**2 + b x + q = 0`` for nonzero array ``a``.

    The larger-magnitude root is computed from the non-cancelling branch of
    the quadratic formula; the other follows from the root product q/a.
    Where both roots are zero (b == 0 and q == 0) the division guard below
    yields exact zeros.
    """
    disc = b * b - 4.0 * a * q
    s = np.sqrt(disc)
    s = np.where((np.conj(-b) * s).real < 0.0, -s, s)
    t = -b + s
    tzero = t == 0.0
    safe_t = np.where(tzero, 1.0, t)
    r1 = np.where(tzero, 0.0, t / (2.0 * a))
    r2 = np.where(tzero, 0.0, (2.0 * q) / safe_t)
    return r1, r2


def lambda_roots(alpha, g: GainPair) -> tuple[complex, complex]:
    """Both characteristic roots for one eigenvalue ``alpha`` of the mismatch matrix.

    For ``alpha == 0`` the quadratic degenerates to a linear equation and the
    single root is returned twice; if additionally ``1 - c - d == 0`` the
    pencil vanishes identically and DegeneratePencilError is raised.
    """
    a = complex(alpha)
    b = 1.0 - g.c - g.d - a
    q = g.d * g.c
    if a == 0:
        if b == 0:
            raise DegeneratePencilError(
                f"characteristic pencil is identically degenerate (alpha=0, c+d=1) "
                f"for c={g.c}, d={g.d}"
            )
        root = -q / b
        return root, root
    disc = b * b - 4.0 * a * q
    s = cmath.sqrt(disc)
    if ((-b).conjugate() * s).real < 0.0:
        s = -s
    t = -b + s
    if t == 0:
        return 0.0j, 0.0j
    return t / (2.0 * a), (2.0 * q) / t


def max_root_norm(alpha, g: GainPair) -> float:
    """Larger modulus of the two characteristic roots at ``alpha``."""
    r1, r2 = lambda_roots(alpha, g)
    return max(abs(r1), abs(r2))


def max_root_norm_grid(alpha, c, d) -> np.ndarray:
    """Vectorized ``max_root_norm`` over broadcastable arrays of alpha, c, d.

    Doubly degenerate nodes (alpha == 0 and c + d == 1) are recorded as inf.
    """
    a = np.asarray(alpha, dtype=complex)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    b = (1.0 - c - d - a).astype(complex)
    q = (c * d).astype(complex)
    a, b, q = np.broadcast_arrays(a, b, q)
    azero = a == 0.0
    bzero = b == 0.0
    r1, r2 = _stable_quadratic(np.where(azero, 1.0, a), b, q)
    norm_quad = np.maximum(np.abs(r1), np.abs(r2))
    norm_lin = np.abs(q / np.where(bzero, 1.0, b))
    out = np.where(azero, np.where(bzero, np.inf, norm_lin), norm_quad)
    return out.astype(float)


def boundary_alpha(theta: float, g: GainPair) -> complex:
    """Mismatch eigenvalue placing a characteristic root on the unit circle.

    Evaluates ``alpha = ((1-c-d) lam + d c) / (lam - lam**2)`` at
    ``lam = exp(1j theta)``.  The map has a pole at theta = 0 (mod 2 pi).
    """
    if theta % (2.0 * math.pi) == 0.0:
        raise ValueError("boundary map has a pole at theta = 0 (mod 2*pi)")
    lam = cmath.exp(1j * theta)
    return ((1.0 - g.c - g.d) * lam + g.d * g.c) / (lam - lam * lam)


def pole_map(re_axis: AxisSpec, im_axis: AxisSpec, g: GainPair) -> StabilityGrid:
    """Spectral radius over a rectangular grid of complex mismatch eigenvalues."""
    re = re_axis.values()
    im = im_axis.values()
    alpha = re[:, None] + 1j * im[None, :]
    return StabilityGrid(re_axis, im_axis, max_root_norm_grid(alpha, g.c, g.d))


def cd_map(alpha, c_axis: AxisSpec, d_axis: AxisSpec) -> StabilityGrid:
    """Spectral radius over a rectangular grid of gain values at fixed ``alpha``."""
    c = c_axis.values()
    d = d_axis.values()
    return StabilityGrid(c_axis, d_axis, max_root_norm_grid(complex(alpha), c[:, None], d[None, :]))


def assemble_A(H, g: GainPair) -> np.ndarray:
    """System matrix of the coupled error recursion for a constant mismatch H.

    Block layout (error state ordered tracking error then estimation error)::

        [ c I - (inv(H) - I)(1 - c)    -d inv(H) ]
        [     (inv(H) - I)(1 - c)       d inv(H) ]

    The eigenvalues of the result are exactly the roots produced by
    ``lambda_roots`` over the eigenvalues of H.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"mismatch matrix must be square, got shape {H.shape}")
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularInfluenceError(f"mismatch matrix is effectively singular (cond ~ {cond:.3e})")
    n = H.shape[0]
    eye = np.eye(n, dtype=H.dtype)
    Hinv = np.linalg.inv(H)
    K = (Hinv - eye) * (1.0 - g.c)
    return np.block([[g.c * eye - K, -g.d * Hinv], [K, g.d * Hinv]])


def char_poly_residual(A, lam) -> float:
    """``abs(det(A - lam I))`` via pivoted LU; zero (to rounding) iff lam is an eigenvalue."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    M = A.astype(complex) - complex(lam) * np.eye(A.shape[0])
    return float(abs(np.linalg.det(M)))


def perturbation_R(f_k, f_k1, y_d_k, y_d_k1, delta_F, H, H_next=None) -> np.ndarray:
    """Forcing term of the coupled error recursion.

    ``f_k, f_k1`` are consecutive lumped ULM dynamics values, ``y_d_k, y_d_k1``
    the corresponding future reference values, and ``delta_F`` the one-step
    increment of the true drift.  ``H_next`` defaults to ``H`` (time-invariant
    mismatch); vanishes when H is the identity and the drift is constant.
    """
    f_k = np.asarray(f_k, dtype=float)
    f_k1 = np.asarray(f_k1, dtype=float)
    y_d_k = np.asarray(y_d_k, dtype=float)
    y_d_k1 = np.asarray(y_d_k1, dtype=float)
    delta_F = np.asarray(delta_F, dtype=float)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    H2 = H if H_next is None else np.atleast_2d(np.asarray(H_next, dtype=float))
    n = H.shape[0]
    shapes = {f_k.shape, f_k1.shape, y_d_k.shape, y_d_k1.shape, delta_F.shape}
    if shapes != {(n,)} or H.shape != (n, n) or H2.shape != (n, n):
        raise ValueError("perturbation term inputs have inconsistent dimensions")
    eye = np.eye(n)
    return H2 @ ((eye - H) @ (y_d_k - f_k) - (eye - H2) @ (y_d_k1 - f_k1) - delta_F)
