"""Fading process families for time-selective Rayleigh links.

Two stationary zero-mean complex Gaussian families are supported: a
first-order autoregressive (Gauss-Markov) process and a bandlimited
flat-spectrum ("lowpass") process. The module provides their power
spectral densities, the aliased spectra seen when the process is observed
once every `period` symbols, exact autocorrelations, seeded sample paths,
and the deterministic spectral quadrature the estimation formulas rely on.

Frequencies are in radians per symbol on [-pi, pi]; nothing here depends
on an absolute sampling time. All functions are pure and process objects
are immutable, so values can be shared and evaluated concurrently.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import lfilter

TWO_PI = 2.0 * math.pi

# Smooth (Gauss-Markov) spectra: full-period trapezoid grid sizes.
DEFAULT_TRAPEZOID_NODES = 4096
MAX_TRAPEZOID_NODES = 1 << 16
# Bandlimited spectra: Gauss-Legendre order per panel between band edges.
DEFAULT_PANEL_ORDER = 32
MAX_PANEL_ORDER = 256

LOWPASS_SYNTHESIS_COMPONENTS = 512


@dataclass(frozen=True)
class GaussMarkov:
    """First-order autoregressive fading; ``alpha`` controls the memory.

    The process obeys h[k] = alpha * h[k-1] + z[k] with i.i.d. circular
    complex Gaussian innovations of variance (1 - alpha**2) * variance,
    so the marginal variance is ``variance`` and the lag-k correlation is
    alpha**|k|.
    """

    alpha: float
    variance: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.variance < 0.0:
            raise ValueError("variance must be nonnegative")

    def with_variance(self, variance: float) -> "GaussMarkov":
        return dataclasses.replace(self, variance=variance)


@dataclass(frozen=True)
class Lowpass:
    """Bandlimited flat-spectrum fading.

    ``max_doppler`` is the one-sided bandwidth normalized to the symbol
    rate, so the spectrum is variance / (2 * max_doppler) on
    |w| <= 2*pi*max_doppler and zero elsewhere. The band edge itself is
    treated as in-band (closed passband) for determinism.
    """

    max_doppler: float
    variance: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.max_doppler <= 0.5:
            raise ValueError(
                f"max_doppler must lie in (0, 0.5], got {self.max_doppler}"
            )
        if self.variance < 0.0:
            raise ValueError("variance must be nonnegative")

    @property
    def band_edge(self) -> float:
        """Band edge in radians per symbol."""
        return TWO_PI * self.max_doppler

    def with_variance(self, variance: float) -> "Lowpass":
        return dataclasses.replace(self, variance=variance)


FadingProcess = Union[GaussMarkov, Lowpass]


def psd(process: FadingProcess, w):
    """Power spectral density at radian frequency ``w`` (scalar or array).

    Normalized so that (1/2pi) * integral over [-pi, pi] equals the
    process variance.
    """
    w_arr = np.asarray(w, dtype=float)
    if isinstance(process, GaussMarkov):
        a = process.alpha
        vals = (1.0 - a * a) * process.variance / (
            1.0 + a * a - 2.0 * a * np.cos(w_arr)
        )
    else:
        height = process.variance / (2.0 * process.max_doppler)
        vals = np.where(np.abs(w_arr) <= process.band_edge, height, 0.0)
    if np.ndim(w) == 0:
        return float(vals)
    return vals


def _wrap_to_pi(x: np.ndarray) -> np.ndarray:
    return np.mod(x + math.pi, TWO_PI) - math.pi


def undersampled_psd(process: FadingProcess, period: int, offset: int, w):
    """Cross-spectrum of the process observed every ``period`` symbols.

    Returns (1/period) * sum_k exp(j*offset*(w - 2*pi*k)/period)
    * S((w - 2*pi*k)/period) over k = 0..period-1.  For ``offset`` = 0 the
    value is real and nonnegative (it is the aliased power spectrum).
    """
    if period < 1:
        raise ValueError("period must be a positive integer")
    if not 0 <= offset < period:
        raise ValueError("offset must lie in 0..period-1")
    w_arr = np.asarray(w, dtype=float)
    acc = np.zeros(w_arr.shape, dtype=complex)
    for k in range(period):
        x = (w_arr - TWO_PI * k) / period
        # The phase factor is insensitive to 2*pi shifts of x because
        # offset is an integer, so the wrapped argument can feed both.
        acc += np.exp(1j * offset * x) * psd(process, _wrap_to_pi(x))
    acc /= period
    if np.ndim(w) == 0:
        return complex(acc)
    return acc


def autocorrelation(process: FadingProcess, lags):
    """Exact autocorrelation at integer ``lags`` (scalar or array)."""
    lag_arr = np.abs(np.asarray(lags, dtype=float))
    if isinstance(process, GaussMarkov):
        vals = process.variance * process.alpha ** lag_arr
    else:
        vals = process.variance * np.sinc(2.0 * process.max_doppler * lag_arr)
    if np.ndim(lags) == 0:
        return float(vals)
    return vals


# ---------------------------------------------------------------------------
# Deterministic spectral quadrature
# ---------------------------------------------------------------------------


def _lowpass_breakpoints(process: Lowpass, period: int) -> np.ndarray:
    """Panel boundaries in [-pi, pi] where aliased band edges fall.

    The spectrum observed every ``period`` symbols has images centered at
    every multiple of 2*pi with half-width period * band_edge; panels
    between consecutive edges are smooth.
    """
    half = period * process.band_edge
    pts = {-math.pi, math.pi}
    c_max = int(math.ceil((math.pi + half) / TWO_PI)) + 1
    for c in range(-c_max, c_max + 1):
        for edge in (TWO_PI * c - half, TWO_PI * c + half):
            if -math.pi < edge < math.pi:
                pts.add(edge)
    return np.array(sorted(pts))


@lru_cache(maxsize=256)
def spectral_grid(
    process: FadingProcess, period: int, resolution: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for (1/2pi) * integral_{-pi}^{pi} f(w) dw.

    Gauss-Markov spectra are smooth and 2*pi-periodic, so a full-period
    trapezoid grid with ``resolution`` nodes is spectrally accurate.
    Lowpass spectra are integrated panel-by-panel between aliased band
    edges with Gauss-Legendre of order ``resolution`` per panel.
    """
    if isinstance(process, GaussMarkov):
        w = -math.pi + TWO_PI * np.arange(resolution) / resolution
        wts = np.full(resolution, 1.0 / resolution)
    else:
        breaks = _lowpass_breakpoints(process, period)
        x, gw = leggauss(resolution)
        nodes = []
        weights = []
        for a, b in zip(breaks[:-1], breaks[1:]):
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            nodes.append(mid + half * x)
            weights.append(gw * half)
        w = np.concatenate(nodes)
        wts = np.concatenate(weights) / TWO_PI
    w.setflags(write=False)
    wts.setflags(write=False)
    return w, wts


def resolution_ladder(process: FadingProcess, start: int | None = None) -> tuple[int, ...]:
    """Doubling sequence of grid resolutions used for convergence checks."""
    if isinstance(process, GaussMarkov):
        res = start if start is not None else DEFAULT_TRAPEZOID_NODES
        cap = MAX_TRAPEZOID_NODES
    else:
        res = start if start is not None else DEFAULT_PANEL_ORDER
        cap = MAX_PANEL_ORDER
    ladder = []
    while res <= cap:
        ladder.append(res)
        res *= 2
    if not ladder:
        raise ValueError("starting resolution exceeds the cap")
    return tuple(ladder)


def spectrum_integral(
    f: Callable[[np.ndarray], np.ndarray],
    process: FadingProcess,
    period: int = 1,
    resolution: int | None = None,
) -> float:
    """(1/2pi) * integral of ``f`` over [-pi, pi] on the module grid."""
    if resolution is None:
        resolution = resolution_ladder(process)[0]
    w, wts = spectral_grid(process, period, resolution)
    return float(np.real(np.dot(wts, f(w))))


# ---------------------------------------------------------------------------
# Sample paths
# ---------------------------------------------------------------------------


def _standard_complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)


def sample_path(process: FadingProcess, length: int, seed: int) -> np.ndarray:
    """Stationary sample path of ``length`` complex fading coefficients.

    The Gauss-Markov path starts from a stationary draw and runs the AR(1)
    recursion. The lowpass path uses sum-of-sinusoids spectral synthesis:
    unit-amplitude complex exponentials at stratified random frequencies
    inside the passband with i.i.d. phases, which matches the flat
    spectrum's autocorrelation exactly in ensemble and is approximately
    Gaussian by the central limit theorem.

    The same seed yields the same path on every platform.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    if isinstance(process, GaussMarkov):
        sigma = math.sqrt(process.variance)
        h0 = sigma * _standard_complex_gaussian(rng, 1)
        if length == 1:
            return h0
        innov = sigma * math.sqrt(1.0 - process.alpha**2)
        z = innov * _standard_complex_gaussian(rng, length - 1)
        rest, _ = lfilter(
            [1.0], [1.0, -process.alpha], z, zi=np.array([process.alpha * h0[0]])
        )
        return np.concatenate([h0, rest])

    n = LOWPASS_SYNTHESIS_COMPONENTS
    edge = process.band_edge
    strata = (np.arange(n) + rng.random(n)) / n
    freqs = -edge + 2.0 * edge * strata
    phases = TWO_PI * rng.random(n)
    coeffs = math.sqrt(process.variance / n) * np.exp(1j * phases)
    out = np.empty(length, dtype=complex)
    chunk = 16384
    # exp(j*w*(k0+t)) = exp(j*w*k0) * exp(j*w*t): reuse one within-chunk
    # phasor matrix and rotate the coefficients per chunk.
    t = np.arange(min(chunk, length), dtype=float)
    basis = np.exp(1j * np.outer(t, freqs))
    for start in range(0, length, chunk):
        size = min(chunk, length - start)
        rotated = coeffs * np.exp(1j * freqs * start)
        out[start : start + size] = basis[:size] @ rotated
    return out
