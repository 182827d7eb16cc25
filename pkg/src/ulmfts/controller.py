"""Model-free finite-time-stable tracking controller with input saturation.

The control input solves the linear system

    G_design @ u = y_desired_future - f_hat + gain(e_y_prev) * e_y_prev

where ``f_hat`` is the current estimate of the lumped ULM dynamics and
``e_y_prev`` is the most recent available tracking error.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularInfluenceError
from .gains import GainParams, holder_gain

#: Condition-number threshold beyond which the designed influence matrix is
#: rejected as effectively singular.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ControllerConfig:
    """Designed influence matrix, gain parameters, and optional input bound."""

    g_design: np.ndarray
    params: GainParams
    u_max: float | None = None

    def __post_init__(self):
        g = np.asarray(self.g_design, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"designed influence matrix must be square, got shape {g.shape}")
        if self.u_max is not None and not self.u_max > 0.0:
            raise ValueError(f"u_max must be > 0 when set, got {self.u_max}")
        object.__setattr__(self, "g_design", g)


def control_law(cfg: ControllerConfig, y_desired_future, f_hat, e_y_prev) -> np.ndarray:
    """Input solving ``g_design @ u = y_desired_future - f_hat + gain(e) * e``.

    Solved by LU factorization with partial pivoting.  Raises
    SingularInfluenceError if the designed matrix is singular or its condition
    number exceeds CONDITION_LIMIT.
    """
    g = cfg.g_design
    y_desired_future = np.asarray(y_desired_future, dtype=float)
    f_hat = np.asarray(f_hat, dtype=float)
    e_y_prev = np.asarray(e_y_prev, dtype=float)
    n = g.shape[0]
    if y_desired_future.shape != (n,) or f_hat.shape != (n,) or e_y_prev.shape != (n,):
        raise ValueError(
            f"shape mismatch: G {g.shape}, y_d {y_desired_future.shape}, "
            f"f_hat {f_hat.shape}, e_y {e_y_prev.shape}"
        )
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularInfluenceError(
            f"designed influence matrix is effectively singular (cond ~ {cond:.3e})"
        )
    rhs = y_desired_future - f_hat + holder_gain(e_y_prev, cfg.params) * e_y_prev
    return np.linalg.solve(g, rhs)


def saturate(u, u_max: float) -> tuple[np.ndarray, bool]:
    """Componentwise clamp of ``u`` to ``[-u_max, u_max]``.

    Returns the clamped vector and a flag that is True iff any component
    was clipped.
    """
    u = np.asarray(u, dtype=float)
    clamped = np.clip(u, -u_max, u_max)
    return clamped, bool(np.any(np.abs(u) > u_max))
