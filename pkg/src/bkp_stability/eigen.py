"""Dense eigenvalues, spectral classification, threshold and band detection.

Eigenvalues come from LAPACK's complex nonsymmetric driver (``zgeev`` through
``numpy.linalg.eigvals``): Hessenberg reduction followed by shifted QR, which
is backward stable, so the computed spectrum is exact for a matrix within a
small multiple of machine epsilon times ``||A||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import criteria
from .bloch import OperatorMatrix, assemble
from .params import BlochSpec, DomainError, PhysicalParams, RegionVerdict, Sigma, VerdictKind
from .wave import RefinedWave, Wave, newton_refine, stokes_wave

GROWTH_TOL_REL = 1e-8
SMALL_XI = 0.01
CONVERGENCE_CLUSTER = 6
DEFAULT_BAND_STEPS = 41
DEFAULT_BRACKET = (0.1, 3.0)
DEFAULT_THRESHOLD_TOL_REL = 1e-5


class ThresholdError(RuntimeError):
    """The detection predicate has the same value at both bracket endpoints."""

    def __init__(self, message: str, verdicts: Tuple[RegionVerdict, RegionVerdict]):
        super().__init__(message)
        self.verdicts = verdicts


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    symmetry_defect: float
    max_real: float
    near_origin: np.ndarray
    spec: BlochSpec
    n_modes_used: int
    radius: float
    valid: bool = True
    message: str = ""

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.valid else math.nan

    @property
    def small_xi(self) -> bool:
        return self.spec.xi != 0 and abs(self.spec.xi) < SMALL_XI

    def default_growth_tol(self) -> float:
        return GROWTH_TOL_REL * max(1.0, self.spectral_radius)

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "symmetry_defect": self.symmetry_defect,
            "max_real": self.max_real,
            "near_origin": [[float(z.real), float(z.imag)] for z in self.near_origin],
            "near_origin_radius": self.radius,
            "spec": self.spec.as_dict(),
            "n_modes_used": self.n_modes_used,
            "valid": self.valid,
            "message": self.message,
        }


def hausdorff(u: np.ndarray, v: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets in the complex plane."""
    if len(u) == 0 and len(v) == 0:
        return 0.0
    d = np.abs(u[:, None] - v[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def eigenvalues(matrix: OperatorMatrix) -> SpectrumResult:
    radius = criteria.r_star(2, matrix.params) / 2
    n = matrix.spec.n_modes
    try:
        if not np.all(np.isfinite(matrix.entries)):
            raise np.linalg.LinAlgError("matrix has non-finite entries")
        lam = np.linalg.eigvals(matrix.entries)
    except np.linalg.LinAlgError as exc:
        nan = np.full(matrix.dim, complex(math.nan, math.nan))
        return SpectrumResult(nan, math.inf, math.nan, nan[:0], matrix.spec, n, radius, False, str(exc))
    defect = hausdorff(lam, -np.conj(lam))
    near = lam[np.abs(lam) < radius]
    near = near[np.argsort(np.abs(near), kind="stable")]
    return SpectrumResult(lam, defect, float(np.max(lam.real)), near, matrix.spec, n, radius)


def spectrum(wave: Wave, spec: BlochSpec, p: PhysicalParams) -> SpectrumResult:
    return eigenvalues(assemble(wave, spec, p))


def classify(result: SpectrumResult, growth_tol: Optional[float] = None) -> RegionVerdict:
    """Verdict read off a computed spectrum; ``witness`` is the largest real part."""
    label = "spectrum"
    if result.small_xi:
        label += f" (|xi|<{SMALL_XI}: resolvent bound not uniform in xi)"
    if not result.valid:
        return RegionVerdict(VerdictKind.UNCERTIFIED, f"{label}: {result.message}", None)
    tol = result.default_growth_tol() if growth_tol is None else growth_tol
    if result.symmetry_defect > 10 * tol:
        return RegionVerdict(
            VerdictKind.UNCERTIFIED, f"{label}: symmetry defect {result.symmetry_defect:.3g}", result.max_real
        )
    if result.max_real <= tol:
        return RegionVerdict(VerdictKind.STABLE_IMAGINARY, label, result.max_real)
    unstable = result.eigenvalues[result.eigenvalues.real > tol]
    if np.all(np.abs(unstable.imag) <= tol):
        return RegionVerdict(VerdictKind.UNSTABLE_REAL_PAIR, label, result.max_real)
    return RegionVerdict(VerdictKind.UNSTABLE_COMPLEX_PAIR, label, result.max_real)


def _family_wave(p: PhysicalParams, a: float, n_modes: int, wave: Optional[Wave]) -> Wave:
    if wave is not None:
        return wave
    return newton_refine(stokes_wave(p, a), p, n_modes)


def _spectrum_at_ell_sq(wave: Wave, p: PhysicalParams, xi: float, n_modes: int, ell_sq: float) -> SpectrumResult:
    return spectrum(wave, BlochSpec(math.sqrt(ell_sq), xi, n_modes), p)


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class ThresholdResult:
    ell_star_sq: float
    bracket: Tuple[float, float]
    prediction: float
    iterations: int
    bracket_outer: Tuple[float, float] = (math.nan, math.nan)

    def as_dict(self) -> dict:
        return {
            "ell_star_sq": self.ell_star_sq,
            "bracket": list(self.bracket),
            "bracket_outer": list(self.bracket_outer),
            "prediction": self.prediction,
            "iterations": self.iterations,
        }


def threshold_prediction(p: PhysicalParams, a: float) -> float:
    """Leading-order threshold: ell_a^2 for sigma=-1 and -ell_a^2 for sigma=+1."""
    la = criteria.ell_a_sq(p, a)
    return la if p.sigma == Sigma.MINUS_ONE else -la


def threshold_bisect(
    a: float,
    p: PhysicalParams,
    spec: BlochSpec,
    bracket: Optional[Tuple[float, float]] = None,
    tol: Optional[float] = None,
    growth_tol: Optional[float] = None,
    wave: Optional[Wave] = None,
) -> ThresholdResult:
    """Bisect in ell^2 for the flip of ``max_real > growth_tol``.

    ``spec`` supplies xi and N; its ell is ignored.
    """
    pred = threshold_prediction(p, a)
    scale = abs(pred)
    if bracket is None:
        if scale == 0:
            raise DomainError("prediction is zero; pass an explicit bracket")
        bracket = (DEFAULT_BRACKET[0] * scale, DEFAULT_BRACKET[1] * scale)
    lo, hi = bracket = (float(bracket[0]), float(bracket[1]))
    if not (0 <= lo < hi):
        raise DomainError(f"bracket must satisfy 0 <= lo < hi, got {bracket}")
    if tol is None:
        tol = DEFAULT_THRESHOLD_TOL_REL * (scale if scale > 0 else hi)
    w = _family_wave(p, a, spec.n_modes, wave)

    def verdict(ell_sq):
        res = _spectrum_at_ell_sq(w, p, spec.xi, spec.n_modes, ell_sq)
        return classify(res, growth_tol)

    v_lo, v_hi = verdict(lo), verdict(hi)
    for v in (v_lo, v_hi):
        if v.kind == VerdictKind.UNCERTIFIED:
            raise ThresholdError(f"uncertified endpoint verdict: {v.case_label}", (v_lo, v_hi))
    if v_lo.kind.unstable == v_hi.kind.unstable:
        raise ThresholdError(
            f"no sign change in bracket ({lo!r}, {hi!r}): endpoints {v_lo.kind.value} and {v_hi.kind.value}",
            (v_lo, v_hi),
        )
    lo_unstable = v_lo.kind.unstable
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = verdict(mid)
        if v.kind == VerdictKind.UNCERTIFIED:
            raise ThresholdError(f"uncertified verdict at ell^2={mid!r}: {v.case_label}", (v_lo, v_hi))
        if v.kind.unstable == lo_unstable:
            lo = mid
        else:
            hi = mid
        it += 1
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), pred, it, bracket)


# ---------------------------------------------------------------------------
# instability bands


@dataclass(frozen=True)
class BandResult:
    intervals: List[Tuple[float, float]]
    primary: Optional[Tuple[float, float]]
    prediction: Optional[Tuple[float, float]]
    ell_sq_grid: np.ndarray = field(repr=False)
    max_real: np.ndarray = field(repr=False)

    @property
    def found(self) -> bool:
        return bool(self.intervals)

    @property
    def center(self) -> float:
        return 0.5 * (self.primary[0] + self.primary[1])

    @property
    def half_width(self) -> float:
        return 0.5 * (self.primary[1] - self.primary[0])

    def as_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "primary": list(self.primary) if self.primary else None,
            "prediction": list(self.prediction) if self.prediction else None,
            "ell_sq_grid": [float(x) for x in self.ell_sq_grid],
            "max_real": [float(x) for x in self.max_real],
        }


def band_prediction(p: PhysicalParams, a: float, xi: float) -> Optional[Tuple[float, float]]:
    xi, _ = criteria.fold_xi(xi)
    if criteria.b_factor(xi, p) <= 0:
        return None
    ellc = criteria.ell_thresholds(xi, p).ellc_sq
    eps = criteria.epsilon_a(xi, p, a)
    return (ellc - eps, ellc + eps)


def band_scan(
    p: PhysicalParams,
    a: float,
    xi: float,
    ell_sq_range: Optional[Tuple[float, float]] = None,
    steps: int = DEFAULT_BAND_STEPS,
    n_modes: int = 32,
    edge_tol: Optional[float] = None,
    growth_tol: Optional[float] = None,
    wave: Optional[Wave] = None,
) -> BandResult:
    """Locate the ell^2 intervals where the Bloch spectrum leaves the imaginary axis.

    A uniform grid flags unstable points; each run of flagged points is then
    widened to its edges by bisection against the neighbouring stable points.
    The default range is ell_c^2 +- 3 eps_a when B > 0, else [ell_0^2, ell_-^2].
    """
    if steps < 2:
        raise DomainError("band_scan needs at least two grid points")
    xf, _ = criteria.fold_xi(xi)
    if xf == 0:
        raise DomainError("band_scan needs xi != 0")
    pred = band_prediction(p, a, xi)
    if ell_sq_range is None:
        if pred is not None and a != 0:
            ellc = 0.5 * (pred[0] + pred[1])
            eps = 0.5 * (pred[1] - pred[0])
            ell_sq_range = (max(0.0, ellc - 3 * eps), ellc + 3 * eps)
        else:
            th = criteria.ell_thresholds(xf, p)
            ell_sq_range = (th.ell0_sq, th.ellm_sq)
    lo, hi = ell_sq_range
    if not (0 <= lo < hi):
        raise DomainError(f"ell^2 range must satisfy 0 <= lo < hi, got {ell_sq_range}")
    if edge_tol is None:
        edge_tol = 1e-4 * (hi - lo)
    w = _family_wave(p, a, n_modes, wave)

    def probe(ell_sq):
        res = _spectrum_at_ell_sq(w, p, xi, n_modes, ell_sq)
        v = classify(res, growth_tol)
        if v.kind == VerdictKind.UNCERTIFIED:
            raise RuntimeError(f"uncertified spectrum at ell^2={ell_sq!r}: {v.case_label}")
        return v.kind.unstable, res.max_real

    grid = np.linspace(lo, hi, steps)
    flags, growth = zip(*(probe(x) for x in grid))
    flags = np.array(flags)

    def edge(stable_x, unstable_x):
        while abs(unstable_x - stable_x) > edge_tol:
            mid = 0.5 * (stable_x + unstable_x)
            if probe(mid)[0]:
                unstable_x = mid
            else:
                stable_x = mid
        return 0.5 * (stable_x + unstable_x)

    intervals = []
    i = 0
    while i < steps:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < steps and flags[j + 1]:
            j += 1
        left = grid[i] if i == 0 else edge(grid[i - 1], grid[i])
        right = grid[j] if j == steps - 1 else edge(grid[j + 1], grid[j])
        intervals.append((float(left), float(right)))
        i = j + 1

    primary = None
    if intervals:
        target = criteria.ell_thresholds(xf, p).ellc_sq
        primary = min(intervals, key=lambda iv: 0.0 if iv[0] <= target <= iv[1] else min(abs(iv[0] - target), abs(iv[1] - target)))
    return BandResult(intervals, primary, pred, grid, np.array(growth))


# ---------------------------------------------------------------------------
# truncation control


def _nearest_origin(lam: np.ndarray, count: int) -> np.ndarray:
    return lam[np.argsort(np.abs(lam), kind="stable")[:count]]


def convergence_check(wave: Wave, spec: BlochSpec, p: PhysicalParams, count: int = CONVERGENCE_CLUSTER) -> float:
    """Largest shift of the ``count`` origin-nearest eigenvalues from N to 2N modes.

    Refined waves are re-solved at 2N so both truncations are self-consistent.
    Near an exact eigenvalue collision the shift scales like the square root of
    the perturbation, so evaluate away from collision points.
    """
    coarse = spectrum(wave, spec, p)
    fine_spec = BlochSpec(spec.ell, spec.xi, 2 * spec.n_modes)
    if isinstance(wave, RefinedWave):
        fine_wave = newton_refine(stokes_wave(p, wave.a), p, 2 * spec.n_modes, wave.tol)
    else:
        fine_wave = wave
    fine = spectrum(fine_wave, fine_spec, p)
    if not (coarse.valid and fine.valid):
        return math.inf
    pick = _nearest_origin(coarse.eigenvalues, count)
    shifts = [np.min(np.abs(fine.eigenvalues - z)) for z in pick]
    return float(max(shifts)) if shifts else 0.0
