import math

import pytest

from bkp_stability.params import BlochSpec, DomainError, PhysicalParams, RegionVerdict, Sigma, VerdictKind


def test_physical_params_coerces_and_derives():
    p = PhysicalParams(2, 2, 1, -1)
    assert isinstance(p.b, float) and isinstance(p.k, float)
    assert p.sigma is Sigma.MINUS_ONE
    assert p.k2 == 1.0
    assert p.c0 == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(b=-1.0, kappa=2.0, k=1.0),
        dict(b=2.0, kappa=0.0, k=1.0),
        dict(b=2.0, kappa=-1.0, k=1.0),
        dict(b=2.0, kappa=2.0, k=0.0),
        dict(b=math.nan, kappa=2.0, k=1.0),
        dict(b=2.0, kappa=math.inf, k=1.0),
        dict(b=2.0, kappa=2.0, k=1.0, sigma=0),
    ],
)
def test_physical_params_rejects(kwargs):
    with pytest.raises(DomainError):
        PhysicalParams(**kwargs)


def test_physical_params_dict_round_trip():
    p = PhysicalParams(0.1 + 0.2, 2.0, 0.7, Sigma.PLUS_ONE)
    assert PhysicalParams.from_dict(p.as_dict()) == p
    assert p.with_sigma(-1).sigma is Sigma.MINUS_ONE


def test_bloch_spec_valid():
    s = BlochSpec(0.5, 0.5, 16)
    assert s.ell_sq == 0.25
    assert s.with_ell(2).ell == 2.0
    assert s.as_dict() == {"ell": 0.5, "xi": 0.5, "n_modes": 16}


@pytest.mark.parametrize("xi", [-0.5, 0.6, math.nan])
def test_bloch_spec_rejects_xi(xi):
    with pytest.raises(DomainError):
        BlochSpec(0.1, xi)


@pytest.mark.parametrize("n", [4, 7, 8.5])
def test_bloch_spec_rejects_modes(n):
    with pytest.raises(DomainError):
        BlochSpec(0.1, 0.0, n)


def test_verdict_kinds():
    assert VerdictKind.UNSTABLE_REAL_PAIR.unstable
    assert VerdictKind.UNSTABLE_COMPLEX_PAIR.unstable
    assert not VerdictKind.STABLE_IMAGINARY.unstable
    assert not VerdictKind.UNCERTIFIED.unstable
    v = RegionVerdict(VerdictKind.STABLE_IMAGINARY, "la2<0 (1)", -0.5)
    assert v.as_dict() == {"kind": "STABLE_IMAGINARY", "case_label": "la2<0 (1)", "witness": -0.5}
