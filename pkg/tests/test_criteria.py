from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from bkp_stability import criteria as C
from bkp_stability.params import BlochSpec, DomainError, PhysicalParams, Sigma, VerdictKind

REL_TOL = 1e-14

xis = st.floats(min_value=1e-3, max_value=0.5)
positive = st.floats(min_value=0.05, max_value=20.0)
bs = st.floats(min_value=-10.0, max_value=15.0).filter(lambda b: abs(b + 1) > 1e-9)


def params(b=2.0, kappa=2.0, k=1.0, sigma=-1):
    return PhysicalParams(b, kappa, k, Sigma(sigma))


# ---------------------------------------------------------------- symbols


def test_omega_first_mode_value(ch):
    assert C.omega_symbol(1, BlochSpec(0.8, 0.0), ch) == pytest.approx(0.32, rel=REL_TOL)


@pytest.mark.parametrize("sigma", [-1, 1])
@pytest.mark.parametrize("kappa,k", [(2.0, 1.0), (0.3, 2.5)])
def test_kernel_modes_vanish_at_ell_zero(sigma, kappa, k):
    p = params(kappa=kappa, k=k, sigma=sigma)
    for n in (1, -1):
        assert C.omega_symbol(n, BlochSpec(0.0, 0.0), p) == 0.0


def test_omega_zero_mode_against_exact_rational(ch):
    # exact rational evaluation of the same symbol with ell^2 = 0.16, xi = 3/10
    xi, ell2, kap, k2 = Fraction(3, 10), Fraction(16, 100), Fraction(2), Fraction(1)
    q = xi
    exact = q * (kap / (1 + k2) - kap / (1 + k2 * q * q) + ell2 / (q * q * (1 + k2 * q * q)))
    got = C.omega_symbol(0, BlochSpec(0.4, 0.3), ch)
    assert got == pytest.approx(float(exact), rel=1e-14)
    assert got == pytest.approx(0.23884, abs=5e-6)


def test_zero_mode_excluded_on_zero_mean_space(ch):
    with pytest.raises(DomainError):
        C.omega_symbol(0, BlochSpec(0.5, 0.0), ch)
    with pytest.raises(DomainError):
        C.mu_and_krein(0, BlochSpec(0.5, 0.0), ch)


@pytest.mark.parametrize("ell", [0.0, 0.3, 1.7])
def test_mu_second_mode_kp1(ch, ell):
    # kappa k^2 (4-1)/(1+k^2) = 3, plus ell^2/4 for sigma = -1
    mu, krein = C.mu_and_krein(2, BlochSpec(ell, 0.0), ch)
    assert mu == pytest.approx(3 + ell**2 / 4, rel=REL_TOL)
    assert krein == 1


@pytest.mark.parametrize("xi", [0.05, 0.3, 0.5])
def test_mu_minus_one_vanishes_at_ellm(ch, xi):
    ellm = C.ell_thresholds(xi, ch).ellm_sq
    mu, _ = C.mu_and_krein(-1, BlochSpec(np.sqrt(ellm), xi), ch)
    assert abs(mu) < 1e-14


def test_mu_zero_mode_at_half(ch):
    mu, _ = C.mu_and_krein(0, BlochSpec(np.sqrt(3 / 16), 0.5), ch)
    assert abs(mu) < 1e-15


def test_krein_zero_at_exact_zero():
    p = params(kappa=1.0, k=1.0)
    # xi = 1/2, n = 0: mu = kappa k^2 (1/4 - 1)/2 + 4 ell^2; zero at ell^2 = 3/32
    mu, krein = C.mu_and_krein(0, BlochSpec(np.sqrt(3 / 32), 0.5), p)
    assert krein == (0 if mu == 0 else np.sign(mu))


@settings(max_examples=300, deadline=None)
@given(
    n=st.integers(-12, 12),
    xi=st.floats(-0.499, 0.5),
    ell=st.floats(0, 3),
    kappa=positive,
    k=positive,
    sigma=st.sampled_from([-1, 1]),
)
def test_omega_mu_factorization(n, xi, ell, kappa, k, sigma):
    if xi == 0 and n == 0:
        return
    if abs(n + xi) < 1e-3:
        return
    p = params(kappa=kappa, k=k, sigma=sigma)
    spec = BlochSpec(ell, xi)
    q = n + xi
    omega = C.omega_symbol(n, spec, p)
    mu, _ = C.mu_and_krein(n, spec, p)
    rhs = q / (1 + p.k2 * q * q) * mu
    # both sides are differences of O(scale) terms; compare against that scale
    scale = abs(q) * (kappa + ell**2 / (q * q)) / (1 + p.k2 * q * q) + abs(omega)
    assert abs(omega - rhs) <= 1e-14 * max(scale, 1e-300) * 4


@settings(max_examples=200, deadline=None)
@given(n=st.integers(-10, 10), xi=st.floats(0.001, 0.499), ell=st.floats(0, 3), kappa=positive, k=positive)
def test_omega_reflection(n, xi, ell, kappa, k):
    p = params(kappa=kappa, k=k)
    a = C.omega_symbol(n, BlochSpec(ell, -xi), p)
    b = C.omega_symbol(-n, BlochSpec(ell, xi), p)
    assert a == pytest.approx(-b, rel=1e-13, abs=1e-300)


def test_r_star(ch):
    assert C.r_star(2, ch) == pytest.approx(0.6, rel=REL_TOL)
    with pytest.raises(DomainError):
        C.r_star(1, ch)


# ---------------------------------------------------------------- periodic


@pytest.mark.parametrize("a", [0.0, 0.01, 0.05, 0.2])
def test_ell_a_sq_camassa_holm(ch, a):
    assert C.ell_a_sq(ch, a) == pytest.approx(3 * a * a, rel=REL_TOL)


@pytest.mark.parametrize("kappa", [0.5, 2.0, 7.0])
def test_ell_a_sq_vanishes_on_boundary(kappa):
    assert C.ell_a_sq(params(b=4.0, kappa=kappa, k=np.sqrt(5.0)), 0.1) == pytest.approx(0.0, abs=1e-16)


def test_b_minus_one_rejected():
    with pytest.raises(DomainError):
        params(b=-1.0)


@pytest.mark.parametrize(
    "b,k2,sigma,kind,label",
    [
        (2.0, 1.0, -1, VerdictKind.UNSTABLE_REAL_PAIR, C.PERIODIC_POS_CASES[0]),
        (4.0, 6.0, -1, VerdictKind.STABLE_IMAGINARY, C.PERIODIC_NEG_CASES[0]),
        (4.0, 6.0, 1, VerdictKind.UNSTABLE_REAL_PAIR, C.PERIODIC_NEG_CASES[0]),
        (2.0, 1.0, 1, VerdictKind.STABLE_IMAGINARY, C.PERIODIC_POS_CASES[0]),
        (-3.0, 0.1, -1, VerdictKind.UNSTABLE_REAL_PAIR, C.PERIODIC_POS_CASES[2]),
        (-3.0, 1.0, -1, VerdictKind.STABLE_IMAGINARY, C.PERIODIC_NEG_CASES[1]),
        (5.0, 1.0, -1, VerdictKind.UNSTABLE_REAL_PAIR, C.PERIODIC_POS_CASES[1]),
    ],
)
def test_classify_periodic_cases(b, k2, sigma, kind, label):
    v = C.classify_periodic(params(b=b, k=np.sqrt(k2), sigma=sigma), 0.05)
    assert v.kind == kind
    assert v.case_label == label


def test_classify_periodic_boundary_uncertified():
    # b = 8, k = 1 lies exactly on k^2 = (b+1)/(2b-7)
    v = C.classify_periodic(params(b=8.0, k=1.0), 0.05)
    assert v.kind == VerdictKind.UNCERTIFIED
    assert v.case_label == C.BOUNDARY
    assert C.periodic_case(4.0, 5.0) == C.BOUNDARY


def _nu(n, ell_sq, p):
    return n * (p.kappa / (1 + p.k2) - p.kappa / (1 + p.k2 * n * n) - ell_sq / (n * n * (1 + p.k2 * n * n)))


@pytest.mark.parametrize("pq", [(2, 1), (1, 2), (3, 1), (2, 3)])
@pytest.mark.parametrize("kappa,k", [(2.0, 1.0), (1.0, 0.5)])
def test_collision_ell_pq_against_root_find(pq, kappa, k):
    p = params(kappa=kappa, k=k, sigma=1)
    f = lambda s: _nu(pq[0], s, p) - _nu(-pq[1], s, p)  # noqa: E731
    root = brentq(f, 0.0, 100.0, xtol=1e-15, rtol=1e-15)
    assert C.collision_ell_pq(pq, p) == pytest.approx(root, rel=1e-12)


def test_collision_ell_pq_trivial_and_positive():
    p = params(sigma=1)
    assert C.collision_ell_pq((1, 1), p) == pytest.approx(0.0, abs=1e-15)
    for q in (2, 3, 4):
        f = lambda s: _nu(q, s, p) - _nu(-q, s, p)  # noqa: E731
        root = brentq(f, 1e-12, 1e4, xtol=1e-15)
        assert root > 0
        assert C.collision_ell_pq((q, q), p) == pytest.approx(root, rel=1e-12)


def test_collision_ell_pq_rejects_kp1(ch):
    with pytest.raises(DomainError):
        C.collision_ell_pq((2, 1), ch)


# ---------------------------------------------------------------- Bloch


def test_thresholds_at_half(ch):
    th = C.ell_thresholds(0.5, ch)
    for v in th:
        assert v == pytest.approx(3 / 16, abs=1e-14)


def test_thresholds_at_point_three(ch):
    th = C.ell_thresholds(0.3, ch)
    assert th.ell0_sq == pytest.approx(0.0819, rel=REL_TOL)
    assert th.ellm_sq == pytest.approx(0.2499, rel=REL_TOL)
    assert th.ellc_sq == pytest.approx(0.12200, abs=5e-6)
    assert th.ell0_sq < th.ellc_sq < th.ellm_sq


def test_thresholds_vanish_as_xi_shrinks(ch):
    th = C.ell_thresholds(1e-8, ch)
    assert max(th) < 1e-7


@pytest.mark.parametrize("xi", [0.0, -0.1, 0.6])
def test_thresholds_domain(ch, xi):
    with pytest.raises(DomainError):
        C.ell_thresholds(xi, ch)


@settings(max_examples=300, deadline=None)
@given(xi=xis, kappa=positive, k=positive)
def test_threshold_ordering(xi, kappa, k):
    th = C.ell_thresholds(xi, params(kappa=kappa, k=k))
    slack = 1e-14 * th.ellm_sq
    assert th.ell0_sq <= th.ellc_sq + slack
    assert th.ellc_sq <= th.ellm_sq + slack


@settings(max_examples=200, deadline=None)
@given(xi=xis, kappa=positive, k=positive)
def test_collision_root_is_ellc(xi, kappa, k):
    p = params(kappa=kappa, k=k)
    th = C.ell_thresholds(xi, p)
    _, H = C.collision_GH(0, xi, p, -1)
    assert abs(C.collision_F(0, th.ellc_sq, xi, p)) <= 1e-12 * abs(H) * max(1.0, th.ellc_sq)


def test_b_factor_values(ch):
    assert C.b_factor(0.3, ch) == pytest.approx(3.79**2, rel=REL_TOL)
    assert C.b_factor(0.5, ch) == pytest.approx(14.0625, rel=REL_TOL)


@settings(max_examples=300, deadline=None)
@given(b=bs, k=positive)
def test_b_factor_half_is_perfect_square(b, k):
    p = params(b=b, k=k)
    square = ((7 - 2 * b) / 4 * p.k2 + (1 + b)) ** 2
    f1 = p.k2 / 4 + (1 - b) * p.k2 / 2 + p.k2 + (b + 1)
    assert C.b_factor(0.5, p) == pytest.approx(square, rel=1e-14, abs=1e-14 * f1 * f1)


@pytest.mark.parametrize("b", [-2.0, -5.0, -1.5])
def test_b_factor_zero_at_half(b):
    k2 = -4 * (1 + b) / (7 - 2 * b)
    assert C.b_factor(0.5, params(b=b, k=np.sqrt(k2))) == pytest.approx(0.0, abs=1e-14)


def test_epsilon_a_values(ch):
    assert C.epsilon_a(0.5, ch, 0.1) == pytest.approx(15 / 32 * 0.1, rel=REL_TOL)
    assert C.epsilon_a(0.5, ch, -0.1) == pytest.approx(15 / 32 * 0.1, rel=REL_TOL)
    assert C.epsilon_a(0.3, ch, 1.0) == pytest.approx(0.3393, abs=5e-5)
    assert C.epsilon_a(0.3, ch, 0.0) == 0.0


def test_epsilon_a_requires_positive_b():
    with pytest.raises(DomainError):
        C.epsilon_a(0.3, params(b=-2.0, k=np.sqrt(0.4)), 0.02)


def test_omega_star(ch):
    assert C.omega_star(0.5, ch) == 0.0
    # 2*2*0.3*0.7*0.4 / (2 * 1.37)
    assert C.omega_star(0.3, ch) == pytest.approx(0.336 / 2.74, rel=REL_TOL)
    th = C.ell_thresholds(0.3, ch)
    spec = BlochSpec(np.sqrt(th.ellc_sq), 0.3)
    assert C.omega_symbol(0, spec, ch) == pytest.approx(C.omega_star(0.3, ch), rel=1e-12)
    assert C.omega_symbol(-1, spec, ch) == pytest.approx(C.omega_star(0.3, ch), rel=1e-12)


@pytest.mark.parametrize(
    "b,k2,xi,kind,label",
    [
        (2.0, 1.0, 0.3, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[0]),
        (2.0, 9.0, 0.1, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[0]),
        (-2.0, 0.4, 0.3, VerdictKind.STABLE_IMAGINARY, C.BLOCH_NEG_CASES[0]),
        (-2.0, 2.0, 0.3, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[2]),
        (-2.0, 0.2, 0.3, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[2]),
        (4.0, 4.0, 0.25, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[3]),
        (3.2, 30.0, 0.5, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[4]),
        (6.0, 3.0, 0.5, VerdictKind.UNSTABLE_COMPLEX_PAIR, C.BLOCH_POS_CASES[5]),
        (3.7, 25.0, 0.44, VerdictKind.STABLE_IMAGINARY, C.BLOCH_NEG_CASES[1]),
        (8.0, 4.0, 0.45, VerdictKind.STABLE_IMAGINARY, C.BLOCH_NEG_CASES[2]),
    ],
)
def test_classify_bloch_cases(b, k2, xi, kind, label):
    v = C.classify_bloch(xi, params(b=b, k=np.sqrt(k2)))
    assert v.case_label == label
    assert v.kind == kind
    assert (v.witness > 0) == (kind == VerdictKind.UNSTABLE_COMPLEX_PAIR)


def test_case_one_interval_membership():
    # B < 0 exactly on the open interval between the two factor zeros
    b, xi = -2.0, 0.3
    lo = -(1 + b) / (xi * xi + (b - 3) * xi + (3 - b))
    hi = -(1 + b) / (xi * xi + (1 - b) * xi + 1)
    for k2 in np.linspace(0.05, 3.0, 60):
        v = C.classify_bloch(xi, params(b=b, k=np.sqrt(k2)))
        inside = lo < k2 < hi
        assert (v.kind == VerdictKind.STABLE_IMAGINARY) == inside


def test_classify_bloch_kp2_uncertified():
    v = C.classify_bloch(0.3, params(sigma=1))
    assert v.kind == VerdictKind.UNCERTIFIED


def test_appendix_case_tables_match_direct_signs():
    """10^4 seeded samples, 1e-6 margin away from the zero sets."""
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 10_000:
        b = rng.uniform(-10, 15)
        k2 = rng.uniform(1e-3, 20)
        xi = 0.5 if rng.random() < 0.1 else rng.uniform(1e-3, 0.5)
        if abs(b + 1) < 1e-6:
            continue
        p = params(b=b, k=np.sqrt(k2))
        la, B = C.ell_a_sq(p, 1.0), C.b_factor(xi, p)
        if abs(la) < 1e-6 or abs(B) < 1e-6:
            continue
        assert C.periodic_case(b, k2).startswith("la2>0") == (la > 0), (b, k2)
        assert C.bloch_case(b, k2, xi).startswith("B>0") == (B > 0), (b, k2, xi)
        checked += 1


# ---------------------------------------------------------------- collisions


def test_collision_F_no_crossing_for_mode_two():
    rng = np.random.default_rng(3)
    for _ in range(500):
        p = params(kappa=rng.uniform(0.1, 5), k=rng.uniform(0.1, 4))
        xi = rng.uniform(1e-3, 0.5)
        G, H = C.collision_GH(2, xi, p, -1)
        # F_2 = G + ell^2 H with G > 0 and H > 0: positive for every ell^2 >= 0
        assert G > 0 and H > 0
        assert C.collision_F(2, rng.uniform(0, 10), xi, p) > 0


def test_collision_F_tilde_minus_two_negative_below_ell0():
    rng = np.random.default_rng(4)
    for _ in range(500):
        xi = rng.uniform(1e-3, 0.5)
        k2 = rng.uniform(0.01, 3 / (xi * (2 - xi)))
        p = params(kappa=rng.uniform(0.1, 5), k=np.sqrt(k2))
        ell0 = C.ell_thresholds(xi, p).ell0_sq
        assert C.collision_F(-2, rng.uniform(0, ell0), xi, p, reference=0) < 0


def test_collision_F_requires_kp1():
    with pytest.raises(DomainError):
        C.collision_F(0, 0.1, 0.3, params(sigma=1))


@pytest.mark.parametrize("k,expected", [(1.0, True), (2.0, False), (3.0**0.5, True)])
def test_longwave_guard(k, expected):
    # sqrt(3)^2 rounds to just below 3, so the boundary case is inside
    assert C.longwave_guard(0.3, params(k=k)) is expected


def test_fold_xi():
    assert C.fold_xi(-0.3) == (0.3, -1)
    assert C.fold_xi(0.5) == (0.5, 1)
    with pytest.raises(DomainError):
        C.fold_xi(-0.5)
