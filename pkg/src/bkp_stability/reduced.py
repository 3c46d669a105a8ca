"""Leading-order 2x2 reductions predicting the eigenvalues that leave the imaginary axis.

Only leading-order terms are kept. The neglected remainders are reported as
order-of-magnitude bounds (``error_bound``) without constants, since none are
available in closed form.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from . import criteria
from .params import DomainError, PhysicalParams, Sigma


class Regime(str, Enum):
    PERIODIC_ORIGIN = "PERIODIC_ORIGIN"
    BLOCH_COLLISION = "BLOCH_COLLISION"


@dataclass(frozen=True)
class ReducedPrediction:
    lambda_pair: Tuple[complex, complex]
    regime: Regime
    inputs: dict
    discriminant: Optional[float] = None
    error_bound: float = 0.0
    matrix: Optional[np.ndarray] = None
    note: str = ""

    @property
    def max_real(self) -> float:
        return max(z.real for z in self.lambda_pair)

    def as_dict(self) -> dict:
        return {
            "lambda_pair": [[z.real, z.imag] for z in self.lambda_pair],
            "regime": self.regime.value,
            "inputs": self.inputs,
            "discriminant": self.discriminant,
            "error_bound": self.error_bound,
            "note": self.note,
        }


def lambda_periodic(p: PhysicalParams, a: float, ell_sq: float) -> ReducedPrediction:
    """Pair bifurcating from the double zero eigenvalue at xi = 0.

    lambda^2 = -ell^2/(1+k^2)^2 (ell^2 - ell_a^2) for sigma = -1; for sigma = +1
    ell^2 inside the bracket changes sign.
    """
    la = criteria.ell_a_sq(p, a)
    inner = ell_sq - la if p.sigma == Sigma.MINUS_ONE else ell_sq + la
    lam_sq = -ell_sq / (1 + p.k2) ** 2 * inner
    root = cmath.sqrt(lam_sq)
    return ReducedPrediction(
        (root, -root),
        Regime.PERIODIC_ORIGIN,
        {"params": p.as_dict(), "a": a, "ell_sq": ell_sq},
        error_bound=a * a * ell_sq * (ell_sq + a * a),
    )


def bloch_matrix(p: PhysicalParams, a: float, eps: float, xi: float) -> np.ndarray:
    """Reduced matrix on the span of modes 0 and -1 near ell^2 = ell_c^2 + eps."""
    k2, b = p.k2, p.b
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    f1 = k2 * xi * xi + (1 - b) * k2 * xi + k2 + (b + 1)
    f2 = k2 * xi * xi + (b - 3) * k2 * xi + (3 - b) * k2 + (b + 1)
    ws = criteria.omega_star(xi, p)
    return 1j * np.array(
        [
            [ws + eps / (xi * P), -0.5 * (xi - 1) * f1 / Q * a],
            [-0.5 * xi * f2 / P * a, ws + eps / ((xi - 1) * Q)],
        ]
    )


def bloch_discriminant(p: PhysicalParams, a: float, eps: float, xi: float) -> float:
    """Leading-order discriminant; negative exactly inside the band |eps| < eps_a."""
    k2 = p.k2
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    B = criteria.b_factor(xi, p)
    return eps**2 * (1 / (xi * P) + 1 / ((1 - xi) * Q)) ** 2 - xi * (1 - xi) * B / (P * Q) * a * a


def lambda_bloch(p: PhysicalParams, a: float, eps: float, xi: float) -> ReducedPrediction:
    """Pair emerging from the omega_0 / omega_-1 collision, lambda = i(omega_* + X)."""
    if p.sigma != Sigma.MINUS_ONE:
        raise DomainError("the Bloch reduction is derived for sigma=-1")
    if not (0 < xi <= 0.5):
        raise DomainError(f"xi must lie in (0, 1/2], got {xi}")
    k2 = p.k2
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    t = eps * (1 / (xi * P) + 1 / ((xi - 1) * Q))
    disc = bloch_discriminant(p, a, eps, xi)
    s = cmath.sqrt(disc)
    ws = criteria.omega_star(xi, p)
    pair = (1j * (ws + (t + s) / 2), 1j * (ws + (t - s) / 2))
    note = "xi=1/2: ell_0^2 = ell_c^2 = ell_-^2 and omega_*=0" if xi == 0.5 else ""
    return ReducedPrediction(
        pair,
        Regime.BLOCH_COLLISION,
        {"params": p.as_dict(), "a": a, "eps": eps, "xi": xi},
        discriminant=disc,
        error_bound=abs(eps) * a * a + eps * eps * abs(a) + abs(a) ** 3,
        matrix=bloch_matrix(p, a, eps, xi),
        note=note,
    )


def first_order_coupling(m: int, n: int, p: PhysicalParams, a: float, xi: float) -> complex:
    """Order-a matrix entry between modes m and n = m -+ 1, from the cos z term of w."""
    d = m - n
    if abs(d) != 1:
        raise DomainError("first-order coupling only links neighbouring modes")
    k2 = p.k2
    qm, qn = m + xi, n + xi
    bracket = (p.b + 1) + k2 + k2 * (p.b - 1) * d * qn + k2 * qn * qn
    return -1j * qm / (1 + k2 * qm * qm) * bracket * a / 2


@dataclass(frozen=True)
class AdjacentCollision:
    modes: Tuple[int, int]
    ell_sq: float
    frequency: float
    growth: float


def adjacent_collision(m: int, p: PhysicalParams, a: float, xi: float) -> Optional[AdjacentCollision]:
    """Collision of omega_m and omega_{m+1} and the growth rate it seeds (sigma = -1).

    At the crossing the reduced matrix is i [[omega, beta], [gamma, omega]];
    eigenvalues leave the imaginary axis with real part sqrt(-beta gamma) when
    beta gamma < 0. Returns None when the two symbols do not cross at ell^2 > 0.
    """
    if p.sigma != Sigma.MINUS_ONE:
        raise DomainError("collision predictions are derived for sigma=-1")
    g0, h0 = criteria.omega_parts(m, xi, p)
    g1, h1 = criteria.omega_parts(m + 1, xi, p)
    if h1 == h0:
        return None
    ell_sq = -(g1 - g0) / (h1 - h0)
    if not ell_sq > 0:
        return None
    beta = first_order_coupling(m, m + 1, p, a, xi) / 1j
    gamma = first_order_coupling(m + 1, m, p, a, xi) / 1j
    prod = (beta * gamma).real
    return AdjacentCollision((m, m + 1), ell_sq, g0 + ell_sq * h0, float(np.sqrt(max(0.0, -prod))))
