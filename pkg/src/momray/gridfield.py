"""Sampled symmetric tensor fields on uniform centered grids with spectral calculus.

The Fourier transform follows the unitary convention with the (2 pi)^(-n/2)
factor; transforms are computed on a zero-padded grid (pad_factor) with the
phase correction for the grid being centered at the origin.  Derivatives are
spectral, the half-order Laplacian is the |y| multiplier.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from math import comb, pi
from typing import Sequence

import numpy as np

from . import symtensor as st
from .coeffs import c_coeff, double_factorial

__all__ = [
    "GridSpec",
    "GridTensorField",
    "FourierField",
    "gaussian_phantom",
    "fft_field",
    "ifft_field",
    "frac_laplacian",
    "spectral_d",
    "spectral_div",
    "contract_x",
    "mul_x",
    "delta_mul_grid",
    "trace_grid",
    "apply_D",
    "rel_error",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid centered at the origin; shape entries must be even."""

    n: int
    shape: tuple
    h: float
    pad_factor: int = 2

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"numerics support n in {{2, 3}}, got n={self.n}")
        if len(self.shape) != self.n or any(s % 2 for s in self.shape):
            raise ValueError(f"shape must have {self.n} even entries, got {self.shape}")
        if self.pad_factor < 1:
            raise ValueError("pad_factor must be >= 1")

    @property
    def half_width(self) -> float:
        return min(self.shape) * self.h / 2.0

    def axes(self) -> list:
        return [(np.arange(s) - s // 2) * self.h for s in self.shape]

    def coords(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    def padded_shape(self) -> tuple:
        return tuple(s * self.pad_factor for s in self.shape)

    def freq_axes(self) -> list:
        """Angular frequency samples of the padded transform, FFT ordering."""
        return [2 * pi * np.fft.fftfreq(s, d=self.h) for s in self.padded_shape()]

    def freq_coords(self) -> list:
        return np.meshgrid(*self.freq_axes(), indexing="ij", sparse=True)


@dataclass(frozen=True)
class GridTensorField:
    """Rank-m tensor field sampled on a grid: comps[i] is the i-th canonical component."""

    spec: GridSpec
    m: int
    comps: np.ndarray  # shape (sym_dim(n, m), *spec.shape)

    def __post_init__(self):
        expected = (st.sym_dim(self.spec.n, self.m),) + tuple(self.spec.shape)
        if self.comps.shape != expected:
            raise ValueError(f"component array shape {self.comps.shape}, expected {expected}")

    @property
    def n(self) -> int:
        return self.spec.n

    def indices(self):
        return st.canonical_indices(self.n, self.m)

    def get(self, idx) -> np.ndarray:
        key = tuple(sorted(idx))
        return self.comps[self.indices().index(key)]

    def __add__(self, other):
        _check(self, other)
        return GridTensorField(self.spec, self.m, self.comps + other.comps)

    def __sub__(self, other):
        _check(self, other)
        return GridTensorField(self.spec, self.m, self.comps - other.comps)

    def scale(self, c):
        return GridTensorField(self.spec, self.m, c * self.comps)

    @classmethod
    def zeros(cls, spec: GridSpec, m: int, dtype=np.float64):
        return cls(spec, m, np.zeros((st.sym_dim(spec.n, m),) + tuple(spec.shape), dtype=dtype))


@dataclass(frozen=True)
class FourierField:
    """Fourier-side tensor field on the padded frequency grid (FFT ordering)."""

    spec: GridSpec
    m: int
    comps: np.ndarray  # complex, shape (sym_dim, *padded_shape)

    @property
    def n(self) -> int:
        return self.spec.n

    def indices(self):
        return st.canonical_indices(self.n, self.m)

    def get(self, idx) -> np.ndarray:
        key = tuple(sorted(idx))
        return self.comps[self.indices().index(key)]


def _check(u, v):
    if u.spec != v.spec or u.m != v.m:
        raise ValueError("grid field mismatch (spec or rank)")


def _embed(spec: GridSpec, arr: np.ndarray) -> np.ndarray:
    out = np.zeros(spec.padded_shape(), dtype=arr.dtype)
    sl = tuple(
        slice((ps - s) // 2, (ps - s) // 2 + s) for s, ps in zip(spec.shape, spec.padded_shape())
    )
    out[sl] = arr
    return out


def _extract(spec: GridSpec, arr: np.ndarray) -> np.ndarray:
    sl = tuple(
        slice((ps - s) // 2, (ps - s) // 2 + s) for s, ps in zip(spec.shape, spec.padded_shape())
    )
    return arr[sl]


def _center_phase(spec: GridSpec) -> np.ndarray:
    """exp(i y_k c h) factors for the centered grid: (-1)^k per axis."""
    phase = 1.0
    for axis, s in enumerate(spec.padded_shape()):
        sign = np.where(np.arange(s) % 2 == 0, 1.0, -1.0)
        shape = [1] * spec.n
        shape[axis] = s
        phase = phase * sign.reshape(shape)
    return phase


def _fft_scalar(spec: GridSpec, arr: np.ndarray) -> np.ndarray:
    scale = spec.h ** spec.n / (2 * pi) ** (spec.n / 2)
    return scale * _center_phase(spec) * np.fft.fftn(_embed(spec, arr))


def _ifft_scalar(spec: GridSpec, arr: np.ndarray) -> np.ndarray:
    npad = np.prod(spec.padded_shape())
    dy = np.prod([2 * pi / (s * spec.h) for s in spec.padded_shape()])
    scale = npad * dy / (2 * pi) ** (spec.n / 2)
    return scale * _extract(spec, np.fft.ifftn(arr * _center_phase(spec)))


def fft_field(f: GridTensorField) -> FourierField:
    comps = np.stack([_fft_scalar(f.spec, c) for c in f.comps])
    return FourierField(f.spec, f.m, comps)


def ifft_field(F: FourierField, real: bool = True) -> GridTensorField:
    comps = np.stack([_ifft_scalar(F.spec, c) for c in F.comps])
    if real:
        comps = comps.real
    return GridTensorField(F.spec, F.m, comps)


def frac_laplacian(f: GridTensorField) -> GridTensorField:
    """(-Delta)^(1/2): the |y| Fourier multiplier, zero at the DC frequency."""
    F = fft_field(f)
    yc = F.spec.freq_coords()
    mult = np.sqrt(sum(c * c for c in yc))
    return ifft_field(FourierField(F.spec, F.m, F.comps * mult))


def _fourier_d(F: FourierField) -> FourierField:
    """Inner derivative in the Fourier representation: symmetrized i*y multipliers."""
    spec, m = F.spec, F.m
    ax = F.spec.freq_axes()

    def y_axis(a):
        shape = [1] * spec.n
        shape[a] = len(ax[a])
        return ax[a].reshape(shape)

    out = []
    for idx in st.canonical_indices(spec.n, m + 1):
        acc = 0
        for j in range(m + 1):
            rest = idx[:j] + idx[j + 1 :]
            acc = acc + 1j * y_axis(idx[j]) * F.get(rest)
        out.append(acc / (m + 1))
    return FourierField(spec, m + 1, np.stack(out))


def _fourier_div(F: FourierField) -> FourierField:
    spec, m = F.spec, F.m
    if m < 1:
        raise ValueError("divergence needs rank >= 1")
    ax = F.spec.freq_axes()
    out = []
    for jdx in st.canonical_indices(spec.n, m - 1):
        acc = 0
        for a in range(spec.n):
            shape = [1] * spec.n
            shape[a] = len(ax[a])
            acc = acc + 1j * ax[a].reshape(shape) * F.get(jdx + (a,))
        out.append(acc)
    return FourierField(spec, m - 1, np.stack(out))


def spectral_d(f: GridTensorField) -> GridTensorField:
    return ifft_field(_fourier_d(fft_field(f)))


def spectral_div(f: GridTensorField) -> GridTensorField:
    return ifft_field(_fourier_div(fft_field(f)))


def contract_x(f: GridTensorField) -> GridTensorField:
    """j_x: pointwise contraction with the position vector."""
    if f.m < 1:
        raise ValueError("contract_x needs rank >= 1")
    xs = f.spec.coords()
    out = []
    for jdx in st.canonical_indices(f.n, f.m - 1):
        acc = 0
        for a in range(f.n):
            acc = acc + xs[a] * f.get(jdx + (a,))
        out.append(acc)
    return GridTensorField(f.spec, f.m - 1, np.stack(out))


def mul_x(f: GridTensorField) -> GridTensorField:
    """i_x: pointwise symmetric multiplication by the position vector."""
    xs = f.spec.coords()
    out = []
    for idx in st.canonical_indices(f.n, f.m + 1):
        acc = 0
        for j in range(f.m + 1):
            rest = idx[:j] + idx[j + 1 :]
            acc = acc + xs[idx[j]] * f.get(rest)
        out.append(acc / (f.m + 1))
    return GridTensorField(f.spec, f.m + 1, np.stack(out))


def delta_mul_grid(f: GridTensorField) -> GridTensorField:
    """i: pointwise symmetric multiplication by the Kronecker tensor."""
    r = f.m + 2
    out = []
    for idx in st.canonical_indices(f.n, r):
        acc = 0
        for a in range(r):
            for b in range(a + 1, r):
                if idx[a] == idx[b]:
                    rest = tuple(idx[t] for t in range(r) if t != a and t != b)
                    acc = acc + f.get(rest)
        out.append(acc / comb(r, 2) if np.ndim(acc) else np.zeros(f.spec.shape))
    return GridTensorField(f.spec, r, np.stack(out))


def trace_grid(f: GridTensorField) -> GridTensorField:
    """j: pointwise contraction with the Kronecker tensor."""
    if f.m < 2:
        raise ValueError("trace needs rank >= 2")
    out = []
    for jdx in st.canonical_indices(f.n, f.m - 2):
        out.append(sum(f.get(jdx + (a, a)) for a in range(f.n)))
    return GridTensorField(f.spec, f.m - 2, np.stack(out))


def apply_D(data: GridTensorField, m: int, n: int, k: int) -> GridTensorField:
    """The k-th inversion operator applied to the k-th normal-operator datum.

    Operator composition follows the literal right-to-left symbol order:
    div^k first, then j_x, then j, i, and the symmetrized gradients.
    """
    if not (0 <= k <= m):
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    if data.m != m or data.n != n:
        raise ValueError("datum rank/dimension does not match (m, n)")
    base = data
    for _ in range(k):
        base = spectral_div(base)
    acc = GridTensorField.zeros(data.spec, m)
    for p in range(k, m + 1):
        for q in range(min(p, m - p, p - k) + 1):
            term = base
            for _ in range(p - k - q):
                term = contract_x(term)
            for _ in range(q):
                term = trace_grid(term)
            for _ in range(q):
                term = delta_mul_grid(term)
            for _ in range(p - q):
                term = spectral_d(term)
            coef = (
                double_factorial(n + 2 * m - 2 * p - 3)
                * (-1) ** q
                / (2**q * _fact(q) * _fact(m - p - q) * _fact(p - k - q))
            )
            acc = acc + term.scale(coef)
    return acc.scale(c_coeff(m, n, k))


def _fact(v: int) -> int:
    out = 1
    for i in range(2, v + 1):
        out *= i
    return out


def gaussian_phantom(spec: GridSpec, m: int, bumps: Sequence[dict]) -> GridTensorField:
    """Sum of Gaussians times constant symmetric tensors.

    Each bump is {"center": (..), "width": w, "tensor": sequence of canonical
    components (a scalar amplitude when m = 0)}.  Rejected when the support
    (six widths) does not fit inside the half-width box.
    """
    ncomp = st.sym_dim(spec.n, m)
    comps = np.zeros((ncomp,) + tuple(spec.shape))
    xs = spec.coords()
    L = spec.half_width
    for bump in bumps:
        center = np.asarray(bump.get("center", (0.0,) * spec.n), dtype=float)
        width = float(bump["width"])
        amp = np.asarray(bump.get("tensor", (1.0,) * ncomp), dtype=float).reshape(ncomp)
        if 6.0 * width + np.max(np.abs(center)) > L:
            raise ValueError(
                f"phantom support exceeds the grid: 6*width + |center| = "
                f"{6 * width + np.max(np.abs(center)):.3g} > half-width {L:.3g}"
            )
        rsq = sum((x - c) ** 2 for x, c in zip(xs, center))
        bell = np.exp(-rsq / width**2)
        comps += amp[(slice(None),) + (None,) * spec.n] * bell[None]
    return GridTensorField(spec, m, comps)


def rel_error(f: GridTensorField, g: GridTensorField, region: np.ndarray | None = None) -> float:
    """Relative L2 error of f against g, by default over the central half-width box."""
    _check(f, g)
    if region is None:
        xs = f.spec.coords()
        L = f.spec.half_width
        region = np.ones(f.spec.shape, dtype=bool)
        for x in xs:
            region = region & (np.abs(x) <= L / 2)
    weights = np.array(
        [st.multiplicity(idx) for idx in st.canonical_indices(f.n, f.m)], dtype=float
    )
    diff = sum(
        w * np.abs(a - b)[region] ** 2 for w, a, b in zip(weights, f.comps, g.comps)
    ).sum()
    ref = sum(w * np.abs(b)[region] ** 2 for w, b in zip(weights, g.comps)).sum()
    if ref == 0:
        raise ZeroDivisionError("reference field vanishes on the region")
    return float(np.sqrt(diff / ref))


# ---------------------------------------------------------------------------
# Container format: length-prefixed JSON header + little-endian float64 blocks.

def save_field(path, f: GridTensorField):
    header = {
        "n": f.spec.n,
        "m": f.m,
        "shape": list(f.spec.shape),
        "h": f.spec.h,
        "pad_factor": f.spec.pad_factor,
        "origin": [0.0] * f.spec.n,
        "component_order": [list(idx) for idx in f.indices()],
    }
    blob = json.dumps(header).encode()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(f.comps, dtype="<f8").tobytes())


def load_field(path) -> GridTensorField:
    with open(path, "rb") as fh:
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        spec = GridSpec(
            header["n"], tuple(header["shape"]), header["h"], header.get("pad_factor", 2)
        )
        ncomp = st.sym_dim(spec.n, header["m"])
        data = np.frombuffer(fh.read(), dtype="<f8").reshape((ncomp,) + tuple(spec.shape))
    return GridTensorField(spec, header["m"], data.copy())
