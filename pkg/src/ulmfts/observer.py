"""Model-free finite-time-stable estimator of the lumped ULM dynamics.

The ultra-local model writes the plant as ``y[k+v] = F_ulm[k] + G_design @ u[k]``
with a designed influence matrix.  Once ``y[k+v]`` is measured, the realized
lumped dynamics ``F_ulm[k]`` is known exactly and the observer tracks it with
Holder-gain feedback, converging in finitely many steps when the target is
constant and to a bounded neighborhood when it drifts slowly.
"""

from dataclasses import dataclass

import numpy as np

from .gains import GainParams, holder_gain


@dataclass(frozen=True)
class ObserverState:
    """Current estimate of the lumped ULM dynamics plus its gain parameters."""

    f_hat: np.ndarray
    params: GainParams

    @classmethod
    def initial(cls, dim: int, params: GainParams, f_hat0=None) -> "ObserverState":
        """Fresh state; the initial estimate defaults to the zero vector."""
        if f_hat0 is None:
            f_hat0 = np.zeros(dim)
        f_hat0 = np.asarray(f_hat0, dtype=float)
        if f_hat0.shape != (dim,):
            raise ValueError(f"initial estimate must have shape ({dim},), got {f_hat0.shape}")
        return cls(f_hat=f_hat0, params=params)


def measure_ulm_dynamics(y_future, g_design, u_applied) -> np.ndarray:
    """Realized lumped dynamics ``y_future - g_design @ u_applied``.

    ``y_future`` is the output measured v steps after ``u_applied`` was issued;
    ``u_applied`` must be the input that actually excited the plant (after
    saturation), otherwise the measurement absorbs the clamping error.
    """
    y_future = np.asarray(y_future, dtype=float)
    g_design = np.asarray(g_design, dtype=float)
    u_applied = np.asarray(u_applied, dtype=float)
    if g_design.ndim != 2 or g_design.shape != (y_future.size, u_applied.size):
        raise ValueError(
            f"shape mismatch: y {y_future.shape}, G {g_design.shape}, u {u_applied.shape}"
        )
    return y_future - g_design @ u_applied


def observer_update(state: ObserverState, f_measured) -> ObserverState:
    """Advance the estimate: ``f_hat <- gain(e) * e + f_measured, e = f_hat - f_measured``.

    ``f_measured`` is a fixed point: if the estimate already matches, it stays.
    """
    f_measured = np.asarray(f_measured, dtype=float)
    if f_measured.shape != state.f_hat.shape:
        raise ValueError(
            f"shape mismatch: estimate {state.f_hat.shape}, measurement {f_measured.shape}"
        )
    e = state.f_hat - f_measured
    new_f_hat = holder_gain(e, state.params) * e + f_measured
    return ObserverState(f_hat=new_f_hat, params=state.params)


def estimation_error(state: ObserverState, f_true) -> np.ndarray:
    """Estimation error ``f_hat - f_true``."""
    f_true = np.asarray(f_true, dtype=float)
    if f_true.shape != state.f_hat.shape:
        raise ValueError(f"shape mismatch: estimate {state.f_hat.shape}, truth {f_true.shape}")
    return state.f_hat - f_true
