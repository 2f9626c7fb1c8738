"""Discrete Fourier transform along the time axis of a history matrix.

Convention (1-based frequency and time indices, stored 0-based):

    X_j = sum_{k=1..L} x_k * exp(-i 2 pi j k / L),   j = 1..L

so a constant row c spikes at the last bin with X_L = c * L. The inverse
carries the 1/L normalization and returns the real part, which makes
``idft_time_axis(dft_time_axis(x))`` recover a real ``x`` to roundoff.

The transform is a fixed linear map, so both kernels are differentiable;
each one's adjoint is computed by the other's forward machinery. A
radix-2 FFT path activates when the history length is a power of two,
otherwise cached cosine/sine matrices give the direct O(L^2) form.
"""
from __future__ import annotations

import numpy as np

from . import autodiff
from .autodiff import ComplexTensor, Tensor, add, elementwise_mul, sub

__all__ = ["dft_time_axis", "idft_time_axis", "complex_elementwise_mul"]

_MATRIX_CACHE: dict[int, np.ndarray] = {}
_FFT_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _transform_matrix(length: int) -> np.ndarray:
    """Complex matrix M[k, j] = exp(-i 2 pi (j+1)(k+1) / L)."""
    m = _MATRIX_CACHE.get(length)
    if m is None:
        idx = np.arange(1, length + 1, dtype=np.float64)
        ang = -2.0 * np.pi * np.outer(idx, idx) / length
        m = np.cos(ang) + 1j * np.sin(ang)
        _MATRIX_CACHE[length] = m
    return m


def _fft_tables(length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tabs = _FFT_CACHE.get(length)
    if tabs is None:
        bits = length.bit_length() - 1
        rev = np.zeros(length, dtype=np.int64)
        for i in range(length):
            r, v = 0, i
            for _ in range(bits):
                r = (r << 1) | (v & 1)
                v >>= 1
            rev[i] = r
        n = np.arange(length, dtype=np.float64)
        w_in = np.exp(-2j * np.pi * n / length)
        w_out = np.exp(-2j * np.pi * (n + 1.0) / length)
        tabs = (rev, w_in, w_out)
        _FFT_CACHE[length] = tabs
    return tabs


def _fft_pow2(z: np.ndarray, rev: np.ndarray) -> np.ndarray:
    """Iterative radix-2 Cooley-Tukey along the last axis."""
    length = z.shape[-1]
    a = z[..., rev].copy()
    size = 2
    while size <= length:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        a = a.reshape(*a.shape[:-1], length // size, size)
        lo = a[..., :half]
        hi = a[..., half:] * tw
        a = np.concatenate([lo + hi, lo - hi], axis=-1)
        a = a.reshape(*a.shape[:-2], length)
        size *= 2
    return a


def _forward(z: np.ndarray) -> np.ndarray:
    """Apply the 1-based transform to complex rows."""
    length = z.shape[-1]
    if length >= 2 and (length & (length - 1)) == 0:
        rev, w_in, w_out = _fft_tables(length)
        return w_out * _fft_pow2(z * w_in, rev)
    return z @ _transform_matrix(length)


def dft_time_axis(x: Tensor) -> ComplexTensor:
    """Transform each row of a (d, L) tensor along its length-L time axis."""
    if x.data.ndim != 2:
        raise ValueError(f"dft_time_axis expects 2-D input, got {x.data.shape}")
    spec = _forward(x.data.astype(np.complex128))
    re = Tensor(np.ascontiguousarray(spec.real))
    im = Tensor(np.ascontiguousarray(spec.imag))
    tape = autodiff._ACTIVE_TAPE
    if tape is not None:

        def vjp(g_re, g_im):
            return (np.ascontiguousarray(_forward(g_re - 1j * g_im).real),)

        tape.record((re, im), (x,), vjp)
    return ComplexTensor(re, im)


def idft_time_axis(spec: ComplexTensor) -> Tensor:
    """Normalized inverse transform; returns the real part, shape (d, L)."""
    if spec.real.data.ndim != 2:
        raise ValueError(
            f"idft_time_axis expects 2-D input, got {spec.real.data.shape}"
        )
    length = spec.real.data.shape[-1]
    z = spec.real.data - 1j * spec.imag.data
    out = Tensor(np.ascontiguousarray(_forward(z).real) / length)
    tape = autodiff._ACTIVE_TAPE
    if tape is not None:

        def vjp(g):
            gz = _forward(g.astype(np.complex128))
            return (
                np.ascontiguousarray(gz.real) / length,
                np.ascontiguousarray(gz.imag) / length,
            )

        tape.record((out,), (spec.real, spec.imag), vjp)
    return out


def complex_elementwise_mul(a: ComplexTensor, b: ComplexTensor) -> ComplexTensor:
    """(a.re + i a.im) * (b.re + i b.im), built from real primitives."""
    re = sub(elementwise_mul(a.real, b.real), elementwise_mul(a.imag, b.imag))
    im = add(elementwise_mul(a.real, b.imag), elementwise_mul(a.imag, b.real))
    return ComplexTensor(re, im)
