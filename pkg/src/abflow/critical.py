"""Stagnation point, vortex singularity, linearization, and separatrix level."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError, SingularPointError
from .field import FlowParams, _check_regular, _point

__all__ = [
    "PointKind",
    "CriticalPoint",
    "stagnation_point",
    "vortex_singularity",
    "jacobian",
    "local_quadratic_potential",
    "separatrix_level",
]


class PointKind(enum.Enum):
    SADDLE_STAGNATION = "saddle_stagnation"
    VORTEX_SINGULARITY = "vortex_singularity"


@dataclass(frozen=True)
class CriticalPoint:
    """A stagnation point (regular saddle) or the singular vortex core.

    For a saddle, ``eigenvalues`` is (+c, -c) with c = hbar*k^2/(delta*mass),
    ``eigenvectors`` holds the matching unit directions (unstable first, sign
    fixed by positive x component), and ``level`` is the Hamiltonian there.
    The vortex carries no eigenstructure and no finite level.
    """

    location: np.ndarray
    kind: PointKind
    eigenvalues: tuple[float, float] | None = None
    eigenvectors: tuple[np.ndarray, np.ndarray] | None = None
    level: float | None = None


def stagnation_point(params: FlowParams) -> CriticalPoint | None:
    """The saddle at (0, delta/k), or None when delta = 0 or k = 0.

    With delta = 0 the velocity is constant and nonzero everywhere; with
    k = 0 the flow is a pure rotation with no stagnation point.
    """
    if params.delta == 0.0 or params.k == 0.0:
        return None
    y0 = params.saddle_height
    c = params.b / (y0 * y0)  # = hbar*k^2/(delta*mass), in rounded arithmetic
    unstable = np.array([1.0, -1.0]) / math.sqrt(2.0)
    stable = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return CriticalPoint(
        location=np.array([0.0, y0]),
        kind=PointKind.SADDLE_STAGNATION,
        eigenvalues=(c, -c),
        eigenvectors=(unstable, stable),
        level=separatrix_level(params),
    )


def vortex_singularity(params: FlowParams) -> CriticalPoint | None:
    """The singular vortex at the origin, or None when delta = 0."""
    if params.delta == 0.0:
        return None
    return CriticalPoint(location=np.zeros(2), kind=PointKind.VORTEX_SINGULARITY)


def jacobian(params: FlowParams, p) -> np.ndarray:
    """Analytic Jacobian of the current at a regular point.

    The matrix is symmetric and trace-free for this field (divergence- and
    curl-free): [[alpha, beta], [beta, -alpha]].
    """
    x, y = _point(p)
    _check_regular(params, x, y)
    b = params.b
    if b == 0.0:
        return np.zeros((2, 2))
    if x == 0.0 and y == 0.0:
        raise SingularPointError("jacobian is singular at the origin")
    r2 = x * x + y * y
    r4 = r2 * r2
    alpha = -2.0 * b * x * y / r4
    beta = b * (x * x - y * y) / r4
    return np.array([[alpha, beta], [beta, -alpha]])


def local_quadratic_potential(params: FlowParams, z: complex) -> complex:
    """Quadratic model of the potential near the saddle:
    i*(hbar*k^2/(2*delta*mass))*(z - z0)^2 with z0 = i*delta/k."""
    if params.delta == 0.0 or params.k == 0.0:
        raise InvalidParamsError("local quadratic model requires delta > 0 and k > 0")
    z0 = 1j * params.saddle_height
    coeff = params.hbar * params.k * params.k / (2.0 * params.delta * params.mass)
    w = complex(z) - z0
    return 1j * coeff * w * w


def separatrix_level(params: FlowParams) -> float:
    """Stream-function value on the separatrix: (hbar*delta/mass)*(log(delta/k) - 1).

    Coincides with the Hamiltonian at the stagnation point.
    """
    if params.delta == 0.0 or params.k == 0.0:
        raise InvalidParamsError("separatrix level requires delta > 0 and k > 0")
    return params.b * (math.log(params.saddle_height) - 1.0)
