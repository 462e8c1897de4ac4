"""Named built-in maps for problem files and benchmarks.

Smooth maps carry an analytic Jacobian; nonsmooth g maps do not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Affine:
    matrix: np.ndarray
    offset: np.ndarray

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def jacobian(self, x):
        return self.matrix.copy()


@dataclass(frozen=True)
class ScaledAbs:
    scale: float = 1.0

    def __call__(self, x):
        return self.scale * np.abs(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PerturbedAffine:
    """x -> M x + c + 0.5 (x - x_ref)**2 componentwise; Jacobian M + diag(x - x_ref)."""

    matrix: np.ndarray
    offset: np.ndarray
    x_ref: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.x_ref
        return self.matrix @ x + self.offset + 0.5 * d * d

    def jacobian(self, x):
        return self.matrix + np.diag(np.asarray(x, dtype=float) - self.x_ref)


def circle_line(x):
    x = np.asarray(x, dtype=float)
    return np.array([x[0] + x[1] - 3.0, x[0] ** 2 + x[1] ** 2 - 9.0])


def circle_line_jacobian(x):
    x = np.asarray(x, dtype=float)
    return np.array([[1.0, 1.0], [2.0 * x[0], 2.0 * x[1]]])


def square_coupled(x):
    """(x1^2, x1 x2, ..., x1 xn)."""
    x = np.asarray(x, dtype=float)
    out = x[0] * x
    return out


def square_coupled_jacobian(x):
    x = np.asarray(x, dtype=float)
    J = x[0] * np.eye(x.size)
    J[:, 0] += x
    return J


def positive_part(x):
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def cyclic_abs_diff(x):
    """g_i = |x_i - x_{i+1}| / 2 with cyclic indexing."""
    x = np.asarray(x, dtype=float)
    return 0.5 * np.abs(x - np.roll(x, -1))


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Builtin:
    func: Callable
    jacobian: Callable | None = None
    dimension: int | None = None
    smooth: bool = True


BUILTIN_F = {
    "circle_line": Builtin(circle_line, circle_line_jacobian, dimension=2),
    "square_coupled": Builtin(square_coupled, square_coupled_jacobian),
}

BUILTIN_G = {
    "zero": Builtin(zero, lambda x: np.zeros((len(x), len(x)))),
    "square_coupled": Builtin(square_coupled, square_coupled_jacobian),
    "positive_part": Builtin(positive_part, smooth=False),
    "cyclic_abs_diff": Builtin(cyclic_abs_diff, smooth=False),
    "half_abs": Builtin(ScaledAbs(0.5), smooth=False),
}
