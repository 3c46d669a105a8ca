"""Small-amplitude periodic traveling waves: Stokes expansion and Newton refinement.

Profiles are even and 2*pi-periodic, stored as cosine coefficients
``w(z) = sum_j C_j cos(j z)``. Internally the quadratic terms of the profile
equation are evaluated on complex-exponential coefficients by direct (full)
convolution, so no aliasing choices are involved.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Union

import numpy as np

from .params import DomainError, PhysicalParams

AMPLITUDE_CAP = 0.2
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 30
SEED_WARN_RESIDUAL = 1e-2


class NewtonFailure(RuntimeError):
    """Newton refinement did not reach the requested residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class StokesCoefficients:
    A0: float
    A2: float
    A3: float
    c0: float
    c2: float


def stokes_coefficients(p: PhysicalParams) -> StokesCoefficients:
    """Expansion coefficients of the small-amplitude wave family."""
    b, k2, kap = p.b, p.k2, p.kappa
    A0 = (1 + k2) / (4 * kap * k2) * ((b - 3) * k2 - (b + 1))
    A2 = (b + 1) * (1 + k2) ** 2 / (12 * kap * k2)
    A3 = (b + 1) * (1 + k2) ** 3 / (192 * kap**2 * k2**2) * ((2 * b + 3) * k2 + (b + 1))
    c0 = kap / (1 + k2)
    c2 = (
        (-2 * b * b + 11 * b - 11) / 24 * k2
        + (5 * b * b - 11 * b - 16) / 24
        - 5 * (b + 1) ** 2 / (24 * k2)
    ) / kap
    return StokesCoefficients(A0, A2, A3, c0, c2)


@dataclass(frozen=True)
class StokesWave:
    """Third-order expansion ``a cos z + a^2 (A0 + A2 cos 2z) + a^3 A3 cos 3z``."""

    a: float
    cos_coeffs: Dict[int, float]
    c: float
    params: PhysicalParams
    amplitude_cap: float = AMPLITUDE_CAP

    def coefficient_vector(self, n_modes: int) -> np.ndarray:
        out = np.zeros(n_modes + 1)
        for j, v in self.cos_coeffs.items():
            if j <= n_modes:
                out[j] = v
        return out

    @property
    def tag(self) -> str:
        return f"stokes(a={self.a!r})"

    def as_dict(self) -> dict:
        return {
            "kind": "stokes",
            "params": self.params.as_dict(),
            "a": self.a,
            "cos_coeffs": [self.cos_coeffs[j] for j in range(4)],
            "c": self.c,
            "residual_norm": profile_residual(self.coefficient_vector(3), self.c, self.params),
            "amplitude_cap": self.amplitude_cap,
        }


@dataclass(frozen=True)
class RefinedWave:
    """Newton solution of the truncated profile equation with ``C_1 = a`` pinned."""

    cos_coeffs: np.ndarray
    c: float
    residual_norm: float
    params: PhysicalParams
    a: float
    iterations: int = 0
    tol: float = 1e-12
    seed_residual: float = field(default=0.0, compare=False)

    @property
    def n_modes(self) -> int:
        return len(self.cos_coeffs) - 1

    def coefficient_vector(self, n_modes: int) -> np.ndarray:
        out = np.zeros(n_modes + 1)
        m = min(n_modes, self.n_modes)
        out[: m + 1] = self.cos_coeffs[: m + 1]
        return out

    @property
    def tag(self) -> str:
        return f"refined(a={self.a!r}, N={self.n_modes}, tol={self.tol!r})"

    def as_dict(self) -> dict:
        return {
            "kind": "refined",
            "params": self.params.as_dict(),
            "a": self.a,
            "cos_coeffs": [float(v) for v in self.cos_coeffs],
            "c": self.c,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "tol": self.tol,
        }


Wave = Union[StokesWave, RefinedWave]


def wave_from_dict(d: dict) -> Wave:
    """Inverse of ``as_dict`` for both wave kinds; floats round-trip exactly."""
    params = PhysicalParams.from_dict(d["params"])
    if d["kind"] == "stokes":
        coeffs = {j: float(v) for j, v in enumerate(d["cos_coeffs"])}
        return StokesWave(float(d["a"]), coeffs, float(d["c"]), params, float(d.get("amplitude_cap", AMPLITUDE_CAP)))
    if d["kind"] == "refined":
        return RefinedWave(
            np.array(d["cos_coeffs"], dtype=float),
            float(d["c"]),
            float(d["residual_norm"]),
            params,
            float(d["a"]),
            int(d.get("iterations", 0)),
            float(d.get("tol", 1e-12)),
        )
    raise ValueError(f"unknown wave kind {d['kind']!r}")


def stokes_wave(p: PhysicalParams, a: float, cap: float = AMPLITUDE_CAP) -> StokesWave:
    if not math.isfinite(a) or abs(a) > cap:
        raise DomainError(f"amplitude |a|={abs(a)} exceeds the asymptotic cap {cap}")
    s = stokes_coefficients(p)
    coeffs = {0: a * a * s.A0, 1: a, 2: a * a * s.A2, 3: a**3 * s.A3}
    return StokesWave(a, coeffs, s.c0 + a * a * s.c2, p, cap)


# ---------------------------------------------------------------------------
# coefficient plumbing


def cos_to_exp(cos_coeffs: np.ndarray) -> np.ndarray:
    """Cosine coefficients 0..M to exponential coefficients indexed -M..M."""
    c = np.asarray(cos_coeffs, dtype=float)
    half = c[1:] / 2
    return np.concatenate([half[::-1], c[:1], half]).astype(complex)


class WaveSpectrum(NamedTuple):
    index: np.ndarray
    w: np.ndarray
    w_z: np.ndarray
    w_zz: np.ndarray


def wave_derivatives(wave: Wave, n_modes: int) -> WaveSpectrum:
    """Exponential coefficients of w, w_z, w_zz on indices -n_modes..n_modes."""
    hw = cos_to_exp(wave.coefficient_vector(n_modes))
    idx = np.arange(-n_modes, n_modes + 1)
    return WaveSpectrum(idx, hw, 1j * idx * hw, -(idx**2) * hw)


def _quadratic(u: np.ndarray, v: np.ndarray, p: PhysicalParams) -> np.ndarray:
    """Symmetric bilinear part Q(u, v) of the profile equation.

    ``Q(w, w) = (b+1)/2 w^2 - k^2 w w'' - (b-1)/2 k^2 w'^2``. Inputs are
    exponential coefficients on -M..M; the output lives on -2M..2M.
    """
    m = (len(u) - 1) // 2
    idx = np.arange(-m, m + 1)
    uz, vz = 1j * idx * u, 1j * idx * v
    uzz, vzz = -(idx**2) * u, -(idx**2) * v
    b, k2 = p.b, p.k2
    return (
        (b + 1) / 2 * np.convolve(u, v)
        - k2 / 2 * (np.convolve(u, vzz) + np.convolve(v, uzz))
        - (b - 1) / 2 * k2 * np.convolve(uz, vz)
    )


def _linear(u: np.ndarray, c: float, p: PhysicalParams) -> np.ndarray:
    m = (len(u) - 1) // 2
    idx = np.arange(-m, m + 1)
    out = np.zeros(4 * m + 1, dtype=complex)
    out[m : 3 * m + 1] = (p.kappa - c) * u - c * p.k2 * idx**2 * u
    return out


def profile_function(cos_coeffs: np.ndarray, c: float, p: PhysicalParams) -> np.ndarray:
    """Exponential coefficients of F(w; k, c, m=0) on -2M..2M."""
    u = cos_to_exp(cos_coeffs)
    return _linear(u, c, p) + _quadratic(u, u, p)


def profile_residual(cos_coeffs, c: float, p: PhysicalParams) -> float:
    """L^2 norm of F with the (1/2pi) normalization, i.e. sqrt(sum |F_n|^2)."""
    return float(np.linalg.norm(profile_function(np.asarray(cos_coeffs, dtype=float), c, p)))


# ---------------------------------------------------------------------------
# Newton refinement


def _system(x: np.ndarray, a: float, n: int, p: PhysicalParams):
    """Galerkin residual (harmonics 0..n) and its Jacobian in the unknowns x.

    x = (C_0, C_2, ..., C_n, c).
    """
    C = np.empty(n + 1)
    C[0], C[1], C[2:] = x[0], a, x[1:n]
    c = x[n]
    u = cos_to_exp(C)
    mid = 2 * n
    F = profile_function(C, c, p)
    R = F[mid : mid + n + 1].real

    J = np.empty((n + 1, n + 1))
    cols = [0] + list(range(2, n + 1))
    for col, j in enumerate(cols):
        e = np.zeros(n + 1)
        e[j] = 1.0
        v = cos_to_exp(e)
        dF = _linear(v, c, p) + 2 * _quadratic(u, v, p)
        J[:, col] = dF[mid : mid + n + 1].real
    idx = np.arange(-n, n + 1)
    dFdc = -u - p.k2 * idx**2 * u
    J[:, n] = dFdc[n : 2 * n + 1].real
    return R, J, C, c


def newton_refine(seed: Wave, p: PhysicalParams, n_modes: int = 32, tol: float = 1e-12) -> RefinedWave:
    """Refine ``seed`` to a solution of the profile equation truncated at ``n_modes``.

    Plain Newton with step halving whenever the residual grows.
    """
    a = seed.a
    C0 = seed.coefficient_vector(n_modes)
    seed_res = profile_residual(C0, seed.c, p)
    if a == 0:
        return RefinedWave(np.zeros(n_modes + 1), p.c0, 0.0, p, a, 0, tol, seed_res)
    if seed_res > SEED_WARN_RESIDUAL:
        warnings.warn(f"seed residual {seed_res:.3g} may lie outside the Newton basin", RuntimeWarning)

    x = np.concatenate([[C0[0]], C0[2:], [seed.c]])
    R, J, C, c = _system(x, a, n_modes, p)
    res = profile_residual(C, c, p)
    it = 0
    while res > tol:
        if it >= NEWTON_MAX_ITER:
            raise NewtonFailure(f"no convergence after {it} iterations, residual {res:.3e}", res, it)
        try:
            dx = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure(f"singular Jacobian at iteration {it}: {exc}", res, it) from exc
        if not np.all(np.isfinite(dx)):
            raise NewtonFailure(f"non-finite Newton step at iteration {it}", res, it)
        step = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            x_new = x + step * dx
            R_new, J_new, C_new, c_new = _system(x_new, a, n_modes, p)
            res_new = profile_residual(C_new, c_new, p)
            if res_new < res:
                break
            step /= 2
        else:
            if np.linalg.norm(R) <= tol:
                # Galerkin equations solved; what remains lives above harmonic N
                raise NewtonFailure(f"residual floor {res:.3e} from harmonics above N={n_modes}; raise n_modes", res, it)
            raise NewtonFailure(f"step halving stalled at residual {res:.3e}", res, it)
        x, R, J, C, c, res = x_new, R_new, J_new, C_new, c_new, res_new
        it += 1
    return RefinedWave(C, float(c), res, p, a, it, tol, seed_res)
