"""Quadrature rules on the reference triangle and the reference edge.

The reference triangle is ``{(s, t): s >= 0, t >= 0, s + t <= 1}`` (area 1/2),
the reference edge is ``[0, 1]``. Weights are scaled to these domains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)


def triangle_1point() -> QuadratureRule:
    return QuadratureRule(np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5]), degree=1)


def triangle_7point() -> QuadratureRule:
    """Degree-5 rule (Radon / Dunavant)."""
    r = np.sqrt(15.0)
    a1, b1 = (9.0 + 2.0 * r) / 21.0, (6.0 - r) / 21.0
    a2, b2 = (9.0 - 2.0 * r) / 21.0, (6.0 + r) / 21.0
    w1, w2 = (155.0 - r) / 1200.0, (155.0 + r) / 1200.0
    bary = np.array(
        [
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [a1, b1, b1],
            [b1, a1, b1],
            [b1, b1, a1],
            [a2, b2, b2],
            [b2, a2, b2],
            [b2, b2, a2],
        ]
    )
    weights = np.array([9.0 / 40.0, w1, w1, w1, w2, w2, w2]) * 0.5
    return QuadratureRule(bary[:, 1:].copy(), weights, degree=5)


def edge_gauss3() -> QuadratureRule:
    r = np.sqrt(3.0 / 5.0) / 2.0
    points = np.array([[0.5 - r], [0.5], [0.5 + r]])
    weights = np.array([5.0, 8.0, 5.0]) / 18.0
    return QuadratureRule(points, weights, degree=5)


def triangle_shape_values(points: np.ndarray) -> np.ndarray:
    """Linear hat functions at reference points, shape ``(q, 3)``."""
    s, t = points[:, 0], points[:, 1]
    return np.stack([1.0 - s - t, s, t], axis=1)


# gradients of the three linear hats w.r.t. the reference coordinates
REFERENCE_GRADIENTS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
