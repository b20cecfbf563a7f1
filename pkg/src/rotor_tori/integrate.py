"""Symplectic validation harness for the coupled-rotator system.

Integrates theta'' = -eps grad f(theta) with a leapfrog (kick-drift-kick)
scheme on the finite window and compares the trajectory started on the
synthesized torus against its quasi-periodic prediction, using the torus
metric dist(a, b) = sup_j min_k |a_j - b_j - 2 pi k|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .modes import FourierSeries, Frequency, Window, ZERO_MODE
from .torus import SeriesSolution, action_curve, evaluate_displacement, \
    evaluate_displacement_many

TWO_PI = 2.0 * math.pi


class PotentialField:
    """Dense-window evaluation of f and grad f from the sparse series."""

    def __init__(self, f: FourierSeries, window: Window):
        self.window = window
        self.constant = float(f.terms.get(ZERO_MODE, 0j).real)
        rows, coefs = [], []
        for nu, c in sorted(f.terms.items(), key=lambda t: t[0].entries):
            if not nu or nu.entries[0][1] < 0:
                continue  # one representative per Hermitian pair
            rows.append(nu.dense(window))
            coefs.append(complex(c))
        self.modes = np.array(rows) if rows else np.zeros((0, window.dim))
        self.coefs = np.array(coefs) if coefs else np.zeros(0, dtype=complex)

    def value(self, theta: np.ndarray) -> float:
        if not len(self.coefs):
            return self.constant
        return self.constant + 2.0 * float(
            np.sum((self.coefs * np.exp(1j * (self.modes @ theta))).real))

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        if not len(self.coefs):
            return np.zeros(self.window.dim)
        weights = (self.coefs * np.exp(1j * (self.modes @ theta))).imag
        return -2.0 * (weights @ self.modes)


@dataclass
class Trajectory:
    times: np.ndarray
    theta: np.ndarray      # (S, dim), unreduced angles
    action: np.ndarray     # (S, dim)
    energy: np.ndarray     # (S,)

    @property
    def energy_drift(self) -> float:
        e0 = self.energy[0]
        scale = max(abs(e0), 1e-300)
        return float(np.max(np.abs(self.energy - e0)) / scale)


def integrate_ode(f: FourierSeries, eps: float, theta0: np.ndarray, action0: np.ndarray,
                  dt: float, t_final: float, window: Window,
                  sample_stride: int = 100) -> Trajectory:
    """Leapfrog trajectory of theta'' = -eps grad f(theta).

    Angles are kept unreduced; the energy H = I.I/2 + eps f(theta) is
    recorded at every stored sample."""
    if dt == 0.0 or t_final <= 0.0:
        raise DomainError("need nonzero dt and positive final time")
    field = PotentialField(f, window)
    steps = int(round(t_final / abs(dt)))
    theta = np.array(theta0, dtype=float)
    momentum = np.array(action0, dtype=float)
    if theta.shape != (window.dim,) or momentum.shape != (window.dim,):
        raise DomainError("state vectors must fill the window")

    times, thetas, actions, energies = [], [], [], []

    def record(step: int):
        times.append(step * dt)
        thetas.append(theta.copy())
        actions.append(momentum.copy())
        energies.append(0.5 * float(momentum @ momentum) + eps * field.value(theta))

    record(0)
    half_kick = 0.5 * dt * eps
    for step in range(1, steps + 1):
        momentum = momentum - half_kick * field.gradient(theta)
        theta = theta + dt * momentum
        momentum = momentum - half_kick * field.gradient(theta)
        if step % sample_stride == 0 or step == steps:
            record(step)
    return Trajectory(np.array(times), np.array(thetas), np.array(actions),
                      np.array(energies))


def torus_distance(a: np.ndarray, b: np.ndarray) -> float:
    """sup_j inf_k |a_j - b_j - 2 pi k|."""
    d = np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi
    return float(np.max(np.abs(d)))


@dataclass
class TorusValidation:
    sup_error: float
    times: np.ndarray
    errors: np.ndarray
    energy_drift: float


def validate_torus(sol: SeriesSolution, dt: float, t_final: float,
                   sample_stride: int = 100) -> TorusValidation:
    """Integrate from the torus point at phi = 0 and measure the torus-metric
    distance to omega t + u(omega t) at each sample."""
    window = sol.window
    om = sol.omega.as_array()
    phi0 = np.zeros(window.dim)
    theta0 = phi0 + evaluate_displacement(sol, phi0)
    action0 = action_curve(sol, phi0[None, :]).values[0]
    traj = integrate_ode(sol.f, sol.eps, theta0, action0, dt, t_final, window,
                         sample_stride)
    targets = traj.times[:, None] * om[None, :]
    targets = targets + evaluate_displacement_many(sol, targets)
    diffs = np.mod(traj.theta - targets + math.pi, TWO_PI) - math.pi
    errors = np.max(np.abs(diffs), axis=1)
    return TorusValidation(float(np.max(errors)), traj.times, errors,
                           traj.energy_drift)
