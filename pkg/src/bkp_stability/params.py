"""Parameter and verdict value types shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class Sigma(IntEnum):
    """Sign of the transverse dispersion term (-1: b-KP-I, +1: b-KP-II)."""

    MINUS_ONE = -1
    PLUS_ONE = 1


@dataclass(frozen=True)
class PhysicalParams:
    """Model constants of the b-KP equation.

    ``b`` is the family parameter, ``kappa`` the linear dispersion constant,
    ``k`` the longitudinal wave number and ``sigma`` the transverse sign.
    """

    b: float
    kappa: float
    k: float
    sigma: Sigma = Sigma.MINUS_ONE

    def __post_init__(self):
        for name in ("b", "kappa", "k"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.kappa <= 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.k <= 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.b == -1:
            raise DomainError("b = -1 is excluded from the wave family")
        try:
            object.__setattr__(self, "sigma", Sigma(int(self.sigma)))
        except ValueError:
            raise DomainError(f"sigma must be -1 or +1, got {self.sigma!r}") from None

    @property
    def k2(self) -> float:
        return self.k * self.k

    @property
    def c0(self) -> float:
        """Bifurcation speed kappa / (1 + k^2)."""
        return self.kappa / (1.0 + self.k2)

    def with_sigma(self, sigma) -> "PhysicalParams":
        return PhysicalParams(self.b, self.kappa, self.k, Sigma(int(sigma)))

    def as_dict(self) -> dict:
        return {"b": self.b, "kappa": self.kappa, "k": self.k, "sigma": int(self.sigma)}

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalParams":
        return cls(float(d["b"]), float(d["kappa"]), float(d["k"]), Sigma(int(d["sigma"])))


@dataclass(frozen=True)
class BlochSpec:
    """Transverse wave number, Floquet exponent and Fourier truncation."""

    ell: float
    xi: float = 0.0
    n_modes: int = 32

    def __post_init__(self):
        for name in ("ell", "xi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not (-0.5 < self.xi <= 0.5):
            raise DomainError(f"xi must lie in (-1/2, 1/2], got {self.xi}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 8:
            raise DomainError(f"n_modes must be an integer >= 8, got {self.n_modes}")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @property
    def ell_sq(self) -> float:
        return self.ell * self.ell

    def with_ell(self, ell: float) -> "BlochSpec":
        return BlochSpec(ell, self.xi, self.n_modes)

    def as_dict(self) -> dict:
        return {"ell": self.ell, "xi": self.xi, "n_modes": self.n_modes}


class VerdictKind(str, Enum):
    STABLE_IMAGINARY = "STABLE_IMAGINARY"
    UNSTABLE_REAL_PAIR = "UNSTABLE_REAL_PAIR"
    UNSTABLE_COMPLEX_PAIR = "UNSTABLE_COMPLEX_PAIR"
    UNCERTIFIED = "UNCERTIFIED"

    @property
    def unstable(self) -> bool:
        return self in (VerdictKind.UNSTABLE_REAL_PAIR, VerdictKind.UNSTABLE_COMPLEX_PAIR)


@dataclass(frozen=True)
class RegionVerdict:
    """Stability classification plus the case that produced it.

    ``witness`` carries the quantity whose sign decided the verdict
    (for example ell_a^2, B, or a numerically measured growth rate).
    """

    kind: VerdictKind
    case_label: str
    witness: Optional[float] = None

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "case_label": self.case_label, "witness": self.witness}
