"""Discrete control-affine benchmark plants with oracle access to (F, G).

Both built-in plants advance as a second-order difference system

    y[k+2] = F[k] + G[k] @ u[k],      F[k] = 2 y[k+1] - y[k],

so the input influences the output two steps ahead (order v = 2).  The planar
rigid body has a state-dependent G (body-frame forces rotated by the heading
angle); the linear test plant keeps G constant so the designed-to-true
mismatch matrix is exactly time-invariant.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RigidBodyParams:
    """Mass [kg], rotational inertia [kg m^2], and step size [s]."""

    mass: float = 2.0
    inertia: float = 3.0
    dt: float = 0.05

    def __post_init__(self):
        if not (self.mass > 0.0 and self.inertia > 0.0 and self.dt > 0.0):
            raise ValueError("mass, inertia, and dt must all be > 0")


@dataclass(frozen=True)
class PlantState:
    """Two most recent outputs, ``y_prev = y[k]`` and ``y_curr = y[k+1]``."""

    y_prev: np.ndarray
    y_curr: np.ndarray

    @classmethod
    def from_outputs(cls, y0, y1) -> "PlantState":
        y0 = np.asarray(y0, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        if y0.shape != y1.shape or y0.ndim != 1:
            raise ValueError(f"outputs must be equal-length vectors, got {y0.shape}, {y1.shape}")
        if not (np.all(np.isfinite(y0)) and np.all(np.isfinite(y1))):
            raise ValueError("plant state entries must be finite")
        return cls(y_prev=y0, y_curr=y1)


def rigid_body_G(theta: float, p: RigidBodyParams) -> np.ndarray:
    """Input influence matrix of the planar rigid body at heading ``theta``.

    dt**2 times a rotation of the body-frame forces scaled by 1/mass, with
    1/inertia acting on the torque channel; invertible for every angle.
    """
    c = np.cos(theta) / p.mass
    s = np.sin(theta) / p.mass
    return p.dt ** 2 * np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0 / p.inertia]])


def rigid_body_F(state: PlantState) -> np.ndarray:
    """Drift term ``2 y[k+1] - y[k]`` of the double-integrator recursion."""
    return 2.0 * state.y_curr - state.y_prev


def plant_step(state: PlantState, u, p: RigidBodyParams) -> PlantState:
    """Advance the rigid body one step: ``y[k+2] = F[k] + G(theta[k]) @ u``.

    G is evaluated at the heading of the older stored output ``y_prev``.
    """
    u = np.asarray(u, dtype=float)
    F, G = true_dynamics_oracle(state, u, p)
    return PlantState(y_prev=state.y_curr, y_curr=F + G @ u)


def true_dynamics_oracle(state: PlantState, u, p: RigidBodyParams):
    """Exact (F, G) pair used by ``plant_step`` at this state.

    Ground truth for error-identity checks; the controller never reads it.
    """
    return rigid_body_F(state), rigid_body_G(state.y_prev[2], p)


class RigidBodyPlant:
    """Planar rigid body: outputs (x [m], z [m], theta [rad]), inputs (fx, fz, tau)."""

    def __init__(self, params: RigidBodyParams = RigidBodyParams()):
        self.params = params
        self.n = 3
        self.v = 2

    @property
    def dt(self) -> float:
        return self.params.dt

    def dynamics(self, state: PlantState):
        return true_dynamics_oracle(state, None, self.params)

    def step(self, state: PlantState, u) -> PlantState:
        return plant_step(state, u, self.params)


class LinearPlant:
    """Double integrator with a constant influence matrix.

    With a fixed designed matrix the mismatch ``G_design @ inv(G)`` is exactly
    constant in time, matching the assumption of the stability analysis.
    """

    def __init__(self, g: np.ndarray, dt: float = 0.05):
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"influence matrix must be square, got shape {g.shape}")
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        self.g = g
        self.dt = dt
        self.n = g.shape[0]
        self.v = 2

    def dynamics(self, state: PlantState):
        return 2.0 * state.y_curr - state.y_prev, self.g

    def step(self, state: PlantState, u) -> PlantState:
        u = np.asarray(u, dtype=float)
        F, G = self.dynamics(state)
        return PlantState(y_prev=state.y_curr, y_curr=F + G @ u)
