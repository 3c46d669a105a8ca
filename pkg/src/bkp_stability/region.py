"""Closed-form stability maps over (b, k^2) and their SVG rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import criteria
from .params import PhysicalParams, RegionVerdict, Sigma, VerdictKind

FILL = {
    VerdictKind.STABLE_IMAGINARY: "#9e9e9e",
    VerdictKind.UNSTABLE_REAL_PAIR: "#ffffff",
    VerdictKind.UNSTABLE_COMPLEX_PAIR: "#ffffff",
    VerdictKind.UNCERTIFIED: "#d9534f",
}


@dataclass(frozen=True)
class RegionGrid:
    mode: str
    sigma: Sigma
    xi: Optional[float]
    b_values: np.ndarray
    k2_values: np.ndarray
    verdicts: List[List[RegionVerdict]]  # verdicts[i][j] at (b_values[i], k2_values[j])
    b_range: Tuple[float, float]
    k2_range: Tuple[float, float]

    def kinds(self) -> np.ndarray:
        return np.array([[v.kind.value for v in row] for row in self.verdicts])

    def stable_mask(self) -> np.ndarray:
        return np.array([[v.kind == VerdictKind.STABLE_IMAGINARY for v in row] for row in self.verdicts])


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def cell_verdict(mode: str, b: float, k2: float, sigma: Sigma, kappa: float = 2.0, xi: Optional[float] = None) -> RegionVerdict:
    if b == -1:
        return RegionVerdict(VerdictKind.UNCERTIFIED, criteria.BOUNDARY, None)
    p = PhysicalParams(b, kappa, math.sqrt(k2), sigma)
    if mode == "periodic":
        return criteria.classify_periodic(p)
    return criteria.classify_bloch(xi, p)


def region_grid(
    mode: str = "periodic",
    sigma: Sigma = Sigma.MINUS_ONE,
    b_range: Tuple[float, float] = (-4.0, 6.0),
    k2_range: Tuple[float, float] = (0.0, 10.0),
    shape: Tuple[int, int] = (200, 200),
    xi: Optional[float] = None,
    kappa: float = 2.0,
) -> RegionGrid:
    """Verdict per grid cell, evaluated at cell centres.

    Verdicts depend on the sign of ell_a^2 (periodic) or B (bloch) only, so
    kappa and the amplitude do not move the boundaries.
    """
    if mode not in ("periodic", "bloch"):
        raise ValueError(f"mode must be 'periodic' or 'bloch', got {mode!r}")
    if mode == "bloch" and xi is None:
        raise ValueError("bloch mode needs xi")
    for lo, hi in (b_range, k2_range):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"grid bounds must be finite with lo < hi, got {(lo, hi)}")
    if k2_range[1] <= 0:
        raise ValueError("k^2 range must include positive values")
    bs = cell_centers(*b_range, shape[0])
    lo_k2 = max(k2_range[0], 0.0)
    ks = cell_centers(lo_k2, k2_range[1], shape[1])
    verdicts = [[cell_verdict(mode, float(b), float(k2), sigma, kappa, xi) for k2 in ks] for b in bs]
    return RegionGrid(mode, Sigma(sigma), xi, bs, ks, verdicts, tuple(b_range), (lo_k2, k2_range[1]))


def boundary_curves(grid: RegionGrid, samples: int = 400) -> List[List[Tuple[float, float]]]:
    """Zero curves of ell_a^2 (periodic) or of the two factors of B (bloch), in (b, k^2)."""
    b_lo, b_hi = grid.b_range
    k_lo, k_hi = grid.k2_range
    bs = np.linspace(b_lo, b_hi, samples)
    funcs = []
    if grid.mode == "periodic":
        funcs.append(lambda b: (b + 1) / (2 * b - 7))
    else:
        xi = grid.xi
        funcs.append(lambda b: -(1 + b) / (xi * xi + (1 - b) * xi + 1))
        funcs.append(lambda b: -(1 + b) / (xi * xi + (b - 3) * xi + (3 - b)))
    curves = []
    for f in funcs:
        current: List[Tuple[float, float]] = []
        for b in bs:
            with np.errstate(divide="ignore", invalid="ignore"):
                k2 = f(b)
            if np.isfinite(k2) and k_lo < k2 <= k_hi:
                current.append((float(b), float(k2)))
            elif current:
                curves.append(current)
                current = []
        if current:
            curves.append(current)
    return [c for c in curves if len(c) > 1]


def render_svg(grid: RegionGrid, metadata: str = "", width: int = 640, height: int = 480) -> str:
    """Static SVG: cells run-length merged along k^2, boundary curves, axes."""
    margin = 60
    pw, ph = width - 2 * margin, height - 2 * margin
    b_lo, b_hi = grid.b_range
    k_lo, k_hi = grid.k2_range

    def x(b):
        return margin + (b - b_lo) / (b_hi - b_lo) * pw

    def y(k2):
        return margin + ph - (k2 - k_lo) / (k_hi - k_lo) * ph

    nb, nk = len(grid.b_values), len(grid.k2_values)
    cw, chh = pw / nb, ph / nk
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    if metadata:
        out.append(metadata)
    title = f"{grid.mode} sigma={int(grid.sigma)}" + (f" xi={grid.xi!r}" if grid.xi is not None else "")
    out.append(f'<text x="{width / 2:.2f}" y="{margin / 2:.2f}" text-anchor="middle" font-size="14">{title}</text>')
    for i, row in enumerate(grid.verdicts):
        j = 0
        while j < nk:
            kind = row[j].kind
            start = j
            while j + 1 < nk and row[j + 1].kind == kind:
                j += 1
            fill = FILL[kind]
            if fill != "#ffffff":
                top = margin + ph - (j + 1) * chh
                out.append(
                    f'<rect x="{margin + i * cw:.3f}" y="{top:.3f}" width="{cw:.3f}" '
                    f'height="{(j - start + 1) * chh:.3f}" fill="{fill}" stroke="none"/>'
                )
            j += 1
    for curve in boundary_curves(grid):
        pts = " ".join(f"{x(b):.3f},{y(k2):.3f}" for b, k2 in curve)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#000000" stroke-width="1.5"/>')
    out.append(f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>')
    for t in np.linspace(b_lo, b_hi, 6):
        out.append(f'<text x="{x(t):.2f}" y="{margin + ph + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in np.linspace(k_lo, k_hi, 6):
        out.append(f'<text x="{margin - 8}" y="{y(t) + 4:.2f}" text-anchor="end" font-size="11">{t:g}</text>')
    out.append(f'<text x="{margin + pw / 2:.2f}" y="{height - 15}" text-anchor="middle" font-size="13">b</text>')
    out.append(f'<text x="18" y="{margin + ph / 2:.2f}" font-size="13">k^2</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def verify_cells(
    grid: RegionGrid,
    count: int,
    seed: int,
    a: float = 0.01,
    kappa: float = 2.0,
    n_modes: int = 32,
) -> List[dict]:
    """Eigen-check ``count`` random cells against their closed-form verdict.

    Periodic cells are probed at ell^2 = |ell_a^2| / 2, where the predicted
    real pair is largest; bloch cells at ell^2 = ell_c^2.
    """
    from .eigen import classify, spectrum
    from .params import BlochSpec
    from .wave import newton_refine, stokes_wave

    rng = np.random.default_rng(seed)
    nb, nk = len(grid.b_values), len(grid.k2_values)
    picks = rng.choice(nb * nk, size=min(count, nb * nk), replace=False)
    results = []
    for flat in sorted(int(v) for v in picks):
        i, j = divmod(flat, nk)
        b, k2 = float(grid.b_values[i]), float(grid.k2_values[j])
        expected = grid.verdicts[i][j]
        entry = {"b": b, "k2": k2, "expected": expected.kind.value}
        try:
            p = PhysicalParams(b, kappa, math.sqrt(k2), grid.sigma)
            if grid.mode == "periodic":
                ell_sq = abs(criteria.ell_a_sq(p, a)) / 2
                spec = BlochSpec(math.sqrt(ell_sq), 0.0, n_modes)
            else:
                ell_sq = criteria.ell_thresholds(grid.xi, p).ellc_sq
                spec = BlochSpec(math.sqrt(ell_sq), grid.xi, n_modes)
            wave = newton_refine(stokes_wave(p, a), p, n_modes)
            res = spectrum(wave, spec, p)
            got = classify(res)
            entry.update(observed=got.kind.value, max_real=res.max_real, ell_sq=ell_sq)
            entry["agree"] = got.kind.unstable == expected.kind.unstable
        except Exception as exc:  # recorded per cell; one bad cell must not abort the map
            entry.update(observed="FAILED", error=str(exc), agree=False)
        results.append(entry)
    return results


def transition_rows(grid: RegionGrid) -> Sequence[Tuple[float, Optional[float]]]:
    """Per b column, the k^2 midpoint between the first flip of the stable mask (None if none)."""
    mask = grid.stable_mask()
    out = []
    for i, b in enumerate(grid.b_values):
        col = mask[i]
        flips = np.nonzero(col[1:] != col[:-1])[0]
        out.append((float(b), float(0.5 * (grid.k2_values[flips[0]] + grid.k2_values[flips[0] + 1])) if len(flips) else None))
    return out
