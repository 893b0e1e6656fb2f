"""Weibull failure intensity of a plane elastic body.

The intensity is the expected number of critical cracks at unit load,

    J = 1/(2 pi) * sigma0**-m * sum_K area(K) * T_n(sigma_K),

where ``T_n`` is the n-point trapezoidal rule over crack orientations of
``((n . sigma n)^+)^m``. The survival probability at load scale ``F`` is
``exp(-J F^m)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import Material, element_geometry, displacement_gradients
from .mesh import Mesh


@dataclass(frozen=True)
class WeibullParams:
    m: float = 10.0
    sigma0: float = 1.0e3
    n_angles: int = 128

    def __post_init__(self):
        if not self.m >= 2:
            raise ValueError("Weibull modulus must be >= 2 for a differentiable objective")
        if self.n_angles < 4 or self.n_angles % 2:
            raise ValueError("n_angles must be even and >= 4")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")

    @property
    def prefactor(self) -> float:
        return 1.0 / (2.0 * np.pi)

    @property
    def scale(self) -> float:
        """Multiplier turning ``sum area * T_n`` into ``J``."""
        return self.prefactor * self.sigma0 ** (-self.m)


def _directions(n: int):
    phi = 2.0 * np.pi * np.arange(n) / n
    c, s = np.cos(phi), np.sin(phi)
    return c * c, 2.0 * c * s, s * s


def normal_stresses(sigma: np.ndarray, n: int) -> np.ndarray:
    """``n . sigma n`` at the n trapezoid angles, shape ``(..., n)``."""
    sigma = np.asarray(sigma, dtype=float)
    cc, cs2, ss = _directions(n)
    return (
        sigma[..., 0, 0, None] * cc
        + sigma[..., 0, 1, None] * cs2
        + sigma[..., 1, 1, None] * ss
    )


def angular_integral(sigma: np.ndarray, m: float, n: int) -> np.ndarray:
    """Trapezoidal ``int_0^{2pi} ((n . sigma n)^+)^m dphi`` for one or many 2x2 stresses."""
    p = np.maximum(normal_stresses(sigma, n), 0.0)
    return (2.0 * np.pi / n) * np.sum(p**m, axis=-1)


def angular_integral_and_grad(sigma: np.ndarray, m: float, n: int):
    """``T_n(sigma)`` and the symmetric ``D`` with ``dT = D : dsigma``.

    The positive part has derivative zero at the kink.
    """
    p = np.maximum(normal_stresses(sigma, n), 0.0)
    cc, cs2, ss = _directions(n)
    w = 2.0 * np.pi / n
    pm1 = p ** (m - 1.0)
    T = w * np.sum(pm1 * p, axis=-1)
    dp = (w * m) * pm1
    D = np.empty(p.shape[:-1] + (2, 2))
    D[..., 0, 0] = dp @ cc
    D[..., 1, 1] = dp @ ss
    D[..., 0, 1] = D[..., 1, 0] = 0.5 * (dp @ cs2)
    return T, D


def angular_integral_grad(sigma: np.ndarray, m: float, n: int) -> np.ndarray:
    return angular_integral_and_grad(sigma, m, n)[1]


@dataclass(frozen=True, eq=False)
class ObjectiveReport:
    J: float
    per_element_intensity: np.ndarray  # density w.r.t. dx
    m: float

    @property
    def eta(self) -> float:
        return float(self.J ** (-1.0 / self.m)) if self.J > 0 else float("inf")

    def survival(self, F):
        return survival_curve(self, F)


def evaluate_objective(mesh: Mesh, U: np.ndarray, material: Material, params: WeibullParams) -> ObjectiveReport:
    sigma = material.stress(displacement_gradients(mesh, U))
    density = params.scale * angular_integral(sigma, params.m, params.n_angles)
    area = element_geometry(mesh).area
    J = float(np.sum(area * density))
    return ObjectiveReport(J, density, params.m)


def survival_curve(report: ObjectiveReport, loads) -> np.ndarray:
    F = np.asarray(loads, dtype=float)
    if np.any(F < 0):
        raise ValueError("load scale must be non-negative")
    return np.exp(-report.J * F**report.m)


def failure_curve(report: ObjectiveReport, loads) -> np.ndarray:
    return -np.expm1(-report.J * np.asarray(loads, dtype=float) ** report.m)
