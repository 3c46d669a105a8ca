"""Truncated Fourier matrix of the linearized Bloch operator.

With ``D = diag(i(n + xi))``, ``J = D (1 - k^2 D^2)^{-1}`` and ``T_f`` the
Toeplitz matrix of multiplication by ``f``, the assembled matrix is

    A = c D - J [kappa + (b+1) T_w - k^2 T_wzz - k^2 (b-1) T_wz D - k^2 T_w D^2
                 - sigma ell^2 D^{-2}].

Multiplication operators act after the derivatives to their right. For
``xi = 0`` the mean mode is removed (zero-mean space).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .params import BlochSpec, DomainError, PhysicalParams
from .wave import Wave, wave_derivatives

APPLY_GRID_FACTOR = 4
BINARY_MAGIC = b"BKPMAT1\n"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    mode_index: np.ndarray
    spec: BlochSpec
    wave_tag: str
    params: PhysicalParams
    wave: Optional[Wave] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.mode_index)

    def header(self) -> dict:
        return {
            "mode_index": [int(n) for n in self.mode_index],
            "spec": self.spec.as_dict(),
            "params": self.params.as_dict(),
            "wave_tag": self.wave_tag,
        }

    def as_dict(self) -> dict:
        d = self.header()
        d["entries"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def to_bytes(self) -> bytes:
        """Magic line, length-prefixed JSON header, then row-major little-endian complex128."""
        head = json.dumps(self.header()).encode()
        body = np.ascontiguousarray(self.entries, dtype="<c16").tobytes()
        return BINARY_MAGIC + struct.pack("<Q", len(head)) + head + body


def matrix_from_bytes(blob: bytes) -> tuple[dict, np.ndarray]:
    if not blob.startswith(BINARY_MAGIC):
        raise ValueError("not an operator matrix dump")
    off = len(BINARY_MAGIC)
    (hlen,) = struct.unpack_from("<Q", blob, off)
    off += 8
    header = json.loads(blob[off : off + hlen])
    off += hlen
    n = len(header["mode_index"])
    entries = np.frombuffer(blob, dtype="<c16", offset=off).reshape(n, n).astype(complex)
    return header, entries


def mode_index(spec: BlochSpec) -> np.ndarray:
    modes = np.arange(-spec.n_modes, spec.n_modes + 1)
    if spec.xi == 0:
        modes = modes[modes != 0]
    return modes


def _check_params(wave: Wave, p: PhysicalParams) -> None:
    w = wave.params
    if (w.b, w.kappa, w.k) != (p.b, p.kappa, p.k):
        raise DomainError(f"wave built for {w.as_dict()} but operator requested for {p.as_dict()}")


def assemble(wave: Wave, spec: BlochSpec, p: PhysicalParams) -> OperatorMatrix:
    _check_params(wave, p)
    modes = mode_index(spec)
    N = spec.n_modes
    L = 2 * N
    ws = wave_derivatives(wave, L)
    D = 1j * (modes + spec.xi)
    k2 = p.k2
    diff = modes[:, None] - modes[None, :] + L
    Tw, Tz, Tzz = ws.w[diff], ws.w_z[diff], ws.w_zz[diff]
    bracket = (
        (p.b + 1) * Tw
        - k2 * Tzz
        - k2 * (p.b - 1) * Tz * D[None, :]
        - k2 * Tw * (D**2)[None, :]
    )
    transverse = 0.0
    if spec.ell_sq != 0:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            transverse = int(p.sigma) * spec.ell_sq / D**2
        if not np.all(np.isfinite(transverse)):
            raise DomainError(f"|xi|={abs(spec.xi)!r} too small to represent D^-2")
    bracket[np.diag_indices_from(bracket)] += p.kappa - transverse
    J = D / (1 - k2 * D**2)
    A = -J[:, None] * bracket
    A[np.diag_indices_from(A)] += wave.c * D
    return OperatorMatrix(A, modes, spec, wave.tag, p, wave)


def _eval_cos(cos_coeffs: np.ndarray, z: np.ndarray, deriv: int) -> np.ndarray:
    """Direct evaluation of d^deriv/dz^deriv sum_j C_j cos(j z) on grid z."""
    j = np.arange(len(cos_coeffs))
    phase = np.outer(z, j)
    if deriv == 0:
        basis = np.cos(phase)
    elif deriv == 1:
        basis = -j * np.sin(phase)
    else:
        basis = -(j**2) * np.cos(phase)
    return basis @ cos_coeffs


def operator_apply_check(matrix: OperatorMatrix, test_vector: np.ndarray) -> float:
    """Relative difference between ``matrix @ v`` and a grid-space application.

    The grid path evaluates the wave by direct cosine sums, forms every product
    pointwise and returns to Fourier space by FFT, independently of the
    Toeplitz assembly. ``test_vector`` holds coefficients on ``mode_index`` and
    must vanish outside |n| <= N/2.
    """
    if matrix.wave is None:
        raise DomainError("matrix carries no wave; cannot evaluate on a grid")
    v = np.asarray(test_vector, dtype=complex)
    modes = matrix.mode_index
    if v.shape != modes.shape:
        raise DomainError(f"test vector has shape {v.shape}, expected {modes.shape}")
    N = matrix.spec.n_modes
    if np.any(v[np.abs(modes) > N // 2] != 0):
        raise DomainError("test vector is not band-limited to N/2")

    p, spec, wave = matrix.params, matrix.spec, matrix.wave
    xi, k2 = spec.xi, p.k2
    cw = wave.coefficient_vector(2 * N)
    nw = int(np.max(np.nonzero(cw)[0], initial=0))
    # products have harmonics up to nw + N/2; keep the grid alias-free
    M = APPLY_GRID_FACTOR * (nw + N + 2)
    z = 2 * np.pi * np.arange(M) / M
    w, wz, wzz = (_eval_cos(cw[: nw + 1], z, d) for d in range(3))

    full = np.zeros(M, dtype=complex)
    sym = np.fft.fftfreq(M, 1.0 / M)
    pos = np.round(sym).astype(int)
    slot = {n: i for i, n in enumerate(pos)}
    for n, vn in zip(modes, v):
        full[slot[int(n)]] = vn
    q = pos + xi
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_d2 = np.where(q != 0, -1.0 / (q * q), 0.0)
    to_grid = lambda coeffs: np.fft.ifft(coeffs) * M  # noqa: E731
    V = to_grid(full)
    Vz = to_grid(1j * q * full)
    Vzz = to_grid(-(q * q) * full)
    Vinv = to_grid(inv_d2 * full)
    g = (
        p.kappa * V
        + (p.b + 1) * w * V
        - k2 * wzz * V
        - k2 * (p.b - 1) * wz * Vz
        - k2 * w * Vzz
        - int(p.sigma) * spec.ell_sq * Vinv
    )
    g_hat = np.fft.fft(g) / M
    out_full = wave.c * 1j * q * full - (1j * q / (1 + k2 * q * q)) * g_hat
    grid_result = np.array([out_full[slot[int(n)]] for n in modes])
    mat_result = matrix.entries @ v
    scale = max(np.linalg.norm(grid_result), np.linalg.norm(mat_result))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(mat_result - grid_result) / scale)
