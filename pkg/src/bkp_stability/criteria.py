"""Closed-form symbols, thresholds, collision functions and region classifiers.

Everything here is a pure function of its arguments. Formulas are evaluated in
double precision as written (``omega_symbol`` excepted); the numerical modules use them as
predictions and the tests use them as oracles for the numerics.

Notation: ``q = n + xi`` is the shifted Fourier index, ``alpha = kappa k^2 /
(1 + k^2)`` and ``P = 1 + k^2 xi^2``, ``Q = 1 + k^2 (1 - xi)^2``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Tuple

from .params import (
    BlochSpec,
    DomainError,
    PhysicalParams,
    RegionVerdict,
    Sigma,
    VerdictKind,
)

LONGWAVE_K2_MAX = 3.0

# Case identifiers. They name the enumerated sign regions for ell_a^2 (periodic
# perturbations) and for the band factor B (Bloch perturbations), in the order
# the enumerations list them.
PERIODIC_POS_CASES = (
    "la2>0 (1) -1<b<=7/2",
    "la2>0 (2) b>7/2, k^2<(b+1)/(2b-7)",
    "la2>0 (3) b<-1, k^2<(b+1)/(2b-7)",
)
PERIODIC_NEG_CASES = (
    "la2<0 (1) b>7/2, k^2>(b+1)/(2b-7)",
    "la2<0 (2) b<-1, k^2>(b+1)/(2b-7)",
)
BLOCH_POS_CASES = (
    "B>0 (1) -1<=b<=3",
    "B>0 (2) b<-1, xi=1/2, k^2!=-4(1+b)/(7-2b)",
    "B>0 (3) b<-1, xi<1/2, k^2 outside [k_-^2, k_+^2]",
    "B>0 (4) b>3, k^2<=4/(b-3)",
    "B>0 (5) 3<b<=7/2, xi=1/2, k^2>4/(b-3)",
    "B>0 (6) b>7/2, xi=1/2, k^2>4/(b-3), k^2!=-4(1+b)/(7-2b)",
    "B>0 (7) 3<b<=b_1(xi), xi<1/2",
    "B>0 (8) b_1(xi)<b<=b_2(xi), xi<1/2, 4/(b-3)<k^2<k_+^2",
    "B>0 (9) b>b_2(xi), xi<1/2, k^2>k_-^2 or 4/(b-3)<k^2<k_+^2",
)
BLOCH_NEG_CASES = (
    "B<0 (1) b<-1, xi<1/2, k_-^2<k^2<k_+^2",
    "B<0 (2) b_1(xi)<b<=b_2(xi), xi<1/2, k^2>k_+^2",
    "B<0 (3) b>b_2(xi), xi<1/2, k_+^2<k^2<k_-^2",
)
BOUNDARY = "boundary"


# ---------------------------------------------------------------------------
# symbols


def _shifted_index(n: int, xi: float) -> float:
    if xi == 0 and n == 0:
        raise DomainError("mode n=0 is excluded on the zero-mean space (xi=0)")
    return n + xi


def omega_symbol(n: int, spec: BlochSpec, p: PhysicalParams) -> float:
    """Imaginary part of the zero-amplitude eigenvalue carried by mode ``n``.

    Evaluated in exact rational arithmetic on the float inputs and rounded
    once, so the value is correctly rounded and can serve as a reference at
    the level of a single ulp.
    """
    _shifted_index(n, spec.xi)
    q = Fraction(n) + Fraction(spec.xi)
    k2 = Fraction(p.k) ** 2
    mu = Fraction(p.kappa) * k2 * (q * q - 1) / (1 + k2) - int(p.sigma) * Fraction(spec.ell) ** 2 / (q * q)
    return float(q * mu / (1 + k2 * q * q))


def mu_and_krein(n: int, spec: BlochSpec, p: PhysicalParams) -> Tuple[float, int]:
    """Eigenvalue ``mu_n`` of the self-adjoint factor and its Krein sign.

    ``omega_n = q / (1 + k^2 q^2) * mu_n`` with ``q = n + xi``.
    """
    q = _shifted_index(n, spec.xi)
    mu = p.kappa * p.k2 * (q * q - 1.0) / (1.0 + p.k2) - int(p.sigma) * spec.ell_sq / (q * q)
    krein = (mu > 0) - (mu < 0)
    return mu, krein


def r_star(n: int, p: PhysicalParams) -> float:
    """|omega_n| at a = 0, ell = 0, xi = 0; r_star(2) separates the origin cluster."""
    if n < 2:
        raise DomainError(f"r_star needs n >= 2, got {n}")
    return p.kappa * (1.0 / (1.0 + p.k2) - 1.0 / (1.0 + p.k2 * n * n))


# ---------------------------------------------------------------------------
# periodic (xi = 0) perturbations


def ell_a_sq(p: PhysicalParams, a: float) -> float:
    """Leading-order transverse threshold ell_a^2 for co-periodic perturbations."""
    b, k2 = p.b, p.k2
    return ((b + 1) + (7 - 2 * b) * k2) * (b + 1) * (1 + k2) ** 2 / (12 * p.kappa * k2) * a * a


def periodic_case(b: float, k2: float) -> str:
    """Enumerated sign case of ell_a^2, decided from (b, k^2) alone.

    Returns ``BOUNDARY`` on the zero set (b = -1 or k^2 = (b+1)/(2b-7)).
    """
    if b == -1:
        return BOUNDARY
    if -1 < b <= 3.5:
        return PERIODIC_POS_CASES[0]
    kb = (b + 1) / (2 * b - 7)
    if k2 == kb:
        return BOUNDARY
    if b > 3.5:
        return PERIODIC_POS_CASES[1] if k2 < kb else PERIODIC_NEG_CASES[0]
    return PERIODIC_POS_CASES[2] if k2 < kb else PERIODIC_NEG_CASES[1]


def classify_periodic(p: PhysicalParams, a: float = 1.0) -> RegionVerdict:
    """Small-amplitude verdict for co-periodic transverse perturbations.

    For sigma = -1 a positive ell_a^2 destabilizes; for sigma = +1 a negative one.
    The sign is read off the case table, and ``witness`` is ell_a^2 at ``a``.
    """
    label = periodic_case(p.b, p.k2)
    witness = ell_a_sq(p, a)
    if label == BOUNDARY or a == 0:
        return RegionVerdict(VerdictKind.UNCERTIFIED, BOUNDARY, witness)
    positive = label.startswith("la2>0")
    unstable = positive if p.sigma == Sigma.MINUS_ONE else not positive
    kind = VerdictKind.UNSTABLE_REAL_PAIR if unstable else VerdictKind.STABLE_IMAGINARY
    return RegionVerdict(kind, label, witness)


def collision_ell_pq(pq: Tuple[int, int], p: PhysicalParams) -> float:
    """ell^2 at which modes ``p`` and ``-q`` collide at a = 0 when sigma = +1."""
    if p.sigma != Sigma.PLUS_ONE:
        raise DomainError("mode collisions at xi=0 only occur for sigma=+1")
    pp, qq = pq
    if pp < 1 or qq < 1:
        raise DomainError(f"p and q must be positive integers, got {pq}")
    k2, kap = p.k2, p.kappa
    dp, dq = 1 + k2 * pp * pp, 1 + k2 * qq * qq
    pref = kap * pp * qq * dp * dq / (pp * dp + qq * dq)
    return pref * ((pp + qq) / (1 + k2) - (pp * dq + qq * dp) / (dp * dq))


# ---------------------------------------------------------------------------
# Bloch (xi != 0) perturbations


def fold_xi(xi: float) -> Tuple[float, int]:
    """Map xi to (|xi|, sign). Spectra at -xi are the negated spectra at xi."""
    if not (-0.5 < xi <= 0.5):
        raise DomainError(f"xi must lie in (-1/2, 1/2], got {xi}")
    return abs(xi), (1 if xi >= 0 else -1)


def _check_xi(xi: float) -> None:
    if not (0 < xi <= 0.5):
        raise DomainError(f"xi must lie in (0, 1/2], got {xi}; fold negative values with fold_xi")


class EllThresholds(NamedTuple):
    ell0_sq: float
    ellm_sq: float
    ellc_sq: float


def ell_thresholds(xi: float, p: PhysicalParams) -> EllThresholds:
    """Zeros of mu_0 and mu_-1, and the omega_0 / omega_-1 collision point."""
    _check_xi(xi)
    k2 = p.k2
    alpha = p.kappa * k2 / (1 + k2)
    ell0 = alpha * (1 - xi * xi) * xi * xi
    ellm = alpha * xi * (2 - xi) * (1 - xi) ** 2
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    num = (1 + xi) * Q + P * (2 - xi)
    den = (1 - xi) * Q + P * xi
    ellc = alpha * (1 - xi) ** 2 * xi * xi * num / den
    return EllThresholds(ell0, ellm, ellc)


def b_factor(xi: float, p: PhysicalParams) -> float:
    """Sign-deciding factor B of the omega_0 / omega_-1 collision."""
    _check_xi(xi)
    b, k2 = p.b, p.k2
    f1 = k2 * xi * xi + (1 - b) * k2 * xi + k2 + (b + 1)
    f2 = k2 * xi * xi + (b - 3) * k2 * xi + (3 - b) * k2 + (b + 1)
    return f1 * f2


def epsilon_a(xi: float, p: PhysicalParams, a: float) -> float:
    """Half-width in ell^2 of the instability band centred at ell_c^2."""
    B = b_factor(xi, p)
    if B <= 0:
        raise DomainError(f"no instability band: B = {B} <= 0")
    k2 = p.k2
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    den = (1 - xi) * Q + P * xi
    return (xi * (1 - xi)) ** 1.5 * math.sqrt(P * Q) / den * math.sqrt(B) * abs(a)


def omega_star(xi: float, p: PhysicalParams) -> float:
    """Common frequency of omega_0 and omega_-1 at ell^2 = ell_c^2."""
    _check_xi(xi)
    k2 = p.k2
    P, Q = 1 + k2 * xi * xi, 1 + k2 * (1 - xi) ** 2
    den = (1 - xi) * Q + P * xi
    return 2 * p.kappa * k2 * xi * (1 - xi) * (1 - 2 * xi) / ((1 + k2) * den)


def bloch_case(b: float, k2: float, xi: float) -> str:
    """Enumerated sign case of B, decided without evaluating B.

    The first matching case in enumeration order is returned; ``BOUNDARY`` on
    the zero set of B.
    """
    _check_xi(xi)
    if -1 <= b <= 3:
        return BLOCH_POS_CASES[0]
    half = xi == 0.5
    # zeros of the two factors of B in k^2
    d_minus = xi * xi + (1 - b) * xi + 1
    d_plus = xi * xi + (b - 3) * xi + (3 - b)
    if b < -1:
        if half:
            if k2 == -4 * (1 + b) / (7 - 2 * b):
                return BOUNDARY
            return BLOCH_POS_CASES[1]
        lo, hi = -(1 + b) / d_plus, -(1 + b) / d_minus
        if lo < k2 < hi:
            return BLOCH_NEG_CASES[0]
        if k2 == lo or k2 == hi:
            return BOUNDARY
        return BLOCH_POS_CASES[2]
    # b > 3
    k_fold = 4 / (b - 3)
    if k2 <= k_fold:
        return BLOCH_POS_CASES[3]
    if half:
        if b <= 3.5:
            return BLOCH_POS_CASES[4]
        if k2 == -4 * (1 + b) / (7 - 2 * b):
            return BOUNDARY
        return BLOCH_POS_CASES[5]
    b1 = (xi * xi - 3 * xi + 3) / (1 - xi)
    b2 = (xi * xi + xi + 1) / xi
    if b <= b1:
        return BLOCH_POS_CASES[6]
    k_plus = -(1 + b) / d_plus
    if b <= b2:
        if k2 < k_plus:
            return BLOCH_POS_CASES[7]
        if k2 == k_plus:
            return BOUNDARY
        return BLOCH_NEG_CASES[1]
    k_minus = -(1 + b) / d_minus
    if k2 < k_plus or k2 > k_minus:
        return BLOCH_POS_CASES[8]
    if k2 == k_plus or k2 == k_minus:
        return BOUNDARY
    return BLOCH_NEG_CASES[2]


def classify_bloch(xi: float, p: PhysicalParams) -> RegionVerdict:
    """Small-amplitude verdict near the omega_0 / omega_-1 collision (sigma = -1).

    The verdict comes from the case table; ``witness`` is B itself.
    """
    xi, _ = fold_xi(xi)
    if xi == 0:
        raise DomainError("classify_bloch needs xi != 0")
    if p.sigma != Sigma.MINUS_ONE:
        return RegionVerdict(VerdictKind.UNCERTIFIED, "sigma=+1 not classified", None)
    label = bloch_case(p.b, p.k2, xi)
    witness = b_factor(xi, p)
    if label == BOUNDARY:
        return RegionVerdict(VerdictKind.UNCERTIFIED, BOUNDARY, witness)
    if label.startswith("B>0"):
        return RegionVerdict(VerdictKind.UNSTABLE_COMPLEX_PAIR, label, witness)
    return RegionVerdict(VerdictKind.STABLE_IMAGINARY, label, witness)


# ---------------------------------------------------------------------------
# collision functions


def omega_parts(n: int, xi: float, p: PhysicalParams) -> Tuple[float, float]:
    """(g, h) with omega_n = g - sigma ell^2 h."""
    q = _shifted_index(n, xi)
    disp = 1 + p.k2 * q * q
    alpha = p.kappa * p.k2 / (1 + p.k2)
    return alpha * q * (q * q - 1) / disp, 1.0 / (q * disp)


def collision_GH(n: int, xi: float, p: PhysicalParams, reference: int = -1) -> Tuple[float, float]:
    """Coefficients (G, H) with omega_n - omega_ref = G + ell^2 H (sigma = -1)."""
    if reference not in (-1, 0):
        raise DomainError(f"reference mode must be -1 or 0, got {reference}")
    _check_xi(xi)
    gn, hn = omega_parts(n, xi, p)
    gr, hr = omega_parts(reference, xi, p)
    return gn - gr, hn - hr


def collision_F(n: int, ell_sq: float, xi: float, p: PhysicalParams, reference: int = -1) -> float:
    """omega_n - omega_ref as a linear function of ell^2 (sigma = -1 only)."""
    if p.sigma != Sigma.MINUS_ONE:
        raise DomainError("collision functions are defined for sigma=-1")
    G, H = collision_GH(n, xi, p, reference)
    return G + ell_sq * H


def longwave_guard(xi: float, p: PhysicalParams) -> bool:
    """True when k^2 <= 3, where no extra collisions occur below ell_0^2."""
    _check_xi(xi)
    return p.k2 <= LONGWAVE_K2_MAX
