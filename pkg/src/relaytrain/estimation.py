"""Link estimation quality for pilot-trained relay blocks.

A block of ``block_length`` symbols carries a source pilot in slot 1,
source data in slots 2..block_length/2, a relay pilot in slot
block_length/2 + 1, and relay-phase data in the remaining slots. This
module maps a network and training configuration to per-slot estimate and
error variances for the source-destination, source-relay and
relay-destination links under two receivers:

* ``single_pilot``: a one-shot MMSE estimate anchored to the nearest
  pilot. At the pilot instant its error variance is
  channel_var * noise_var / (channel_var * pilot_power + noise_var); away
  from the pilot the estimate decorrelates with the channel, so the error
  variance grows with the distance to the pilot.
* ``wiener``: the steady-state noncausal smoother over the infinite
  periodic pilot train, evaluated in the frequency domain from the
  undersampled spectra.

Everything is pure and profiles are immutable value objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .fading import (
    FadingProcess,
    GaussMarkov,
    Lowpass,
    autocorrelation,
    resolution_ladder,
    spectral_grid,
    undersampled_psd,
)

# Tiny negative error variances from roundoff are clamped silently;
# violations beyond this relative band indicate a real bug and raise.
CLAMP_GUARD = 1e-10
QUADRATURE_REL_TOL = 1e-8


class NumericalAccuracyError(RuntimeError):
    """Spectral quadrature failed to converge within the resolution cap."""


class Estimator(str, Enum):
    SINGLE_PILOT = "single_pilot"
    WIENER = "wiener"


@dataclass(frozen=True)
class RelayNetworkSpec:
    """Three-link network statistics sharing one fading process family.

    The links differ only in variance; correlation parameters (alpha or
    max_doppler) are shared through ``process_family``, whose own variance
    field is overridden per link.
    """

    var_sd: float
    var_sr: float
    var_rd: float
    noise_var: float
    process_family: FadingProcess

    def __post_init__(self) -> None:
        for name in ("var_sd", "var_sr", "var_rd"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.noise_var <= 0.0:
            raise ValueError("noise_var must be strictly positive")

    @property
    def sd_process(self) -> FadingProcess:
        return self.process_family.with_variance(self.var_sd)

    @property
    def sr_process(self) -> FadingProcess:
        return self.process_family.with_variance(self.var_sr)

    @property
    def rd_process(self) -> FadingProcess:
        return self.process_family.with_variance(self.var_rd)


@dataclass(frozen=True)
class TrainingConfig:
    """Training period, estimator kind and pilot energies."""

    block_length: int
    estimator: Estimator
    pilot_power_source: float
    pilot_power_relay: float

    def __post_init__(self) -> None:
        if self.block_length < 4 or self.block_length % 2 != 0:
            raise ValueError("block_length must be an even integer >= 4")
        if self.pilot_power_source < 0.0 or self.pilot_power_relay < 0.0:
            raise ValueError("pilot energies must be nonnegative")

    @property
    def n_data(self) -> int:
        """Data slots per transmission phase."""
        return (self.block_length - 2) // 2

    @property
    def first_half_slots(self) -> np.ndarray:
        """Source-phase data slots 2..block_length/2."""
        return np.arange(2, self.block_length // 2 + 1)

    @property
    def second_half_slots(self) -> np.ndarray:
        """Relay-phase data slots block_length/2 + 2..block_length."""
        return self.first_half_slots + self.block_length // 2


@dataclass(frozen=True, eq=False)
class EstimationProfile:
    """Per-slot error variances for the three links over one block.

    Arrays are indexed by data position i = 0..n_data-1, i.e. slot
    m = i + 2 in the source phase and slot j = m + block_length/2 in the
    relay phase. Estimate variances satisfy est + err = link variance
    exactly.
    """

    block_length: int
    noise_var: float
    var_sd: float
    var_sr: float
    var_rd: float
    err_sr_first: np.ndarray = field(repr=False)
    err_sd_first: np.ndarray = field(repr=False)
    err_sd_second: np.ndarray = field(repr=False)
    err_rd_second: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = (self.block_length - 2) // 2
        for name in ("err_sr_first", "err_sd_first", "err_sd_second", "err_rd_second"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
            object.__setattr__(self, name, arr)

    @property
    def n_data(self) -> int:
        return (self.block_length - 2) // 2

    @property
    def est_sr_first(self) -> np.ndarray:
        return self.var_sr - self.err_sr_first

    @property
    def est_sd_first(self) -> np.ndarray:
        return self.var_sd - self.err_sd_first

    @property
    def est_sd_second(self) -> np.ndarray:
        return self.var_sd - self.err_sd_second

    @property
    def est_rd_second(self) -> np.ndarray:
        return self.var_rd - self.err_rd_second


# ---------------------------------------------------------------------------
# Single-pilot estimation
# ---------------------------------------------------------------------------


def single_pilot_error_variance(
    channel_var: float, noise_var: float, pilot_power: float
) -> float:
    """Error variance of the one-shot MMSE estimate at the pilot instant."""
    if channel_var < 0.0 or noise_var <= 0.0 or pilot_power < 0.0:
        raise ValueError("invalid single-pilot arguments")
    return channel_var * noise_var / (channel_var * pilot_power + noise_var)


def single_pilot_gain(
    channel_var: float, noise_var: float, pilot_power: float
) -> float:
    """Scalar applied to the pilot observation to form the estimate."""
    return (
        channel_var
        * math.sqrt(pilot_power)
        / (channel_var * pilot_power + noise_var)
    )


def single_pilot_error_variance_at(
    process: FadingProcess,
    offset,
    period: int,
    pilot_power: float,
    noise_var: float,
):
    """Error variance of the nearest-pilot estimate ``offset`` slots away.

    The estimate of h[t] from the single pilot observation nearest to t
    (pilots repeat every ``period`` symbols) has error variance
    variance - |r(d)|^2 * pilot_power / (variance * pilot_power + noise_var)
    with d = min(offset mod period, period - offset mod period). At d = 0
    this reduces to :func:`single_pilot_error_variance`.
    """
    off = np.mod(np.asarray(offset), period)
    dist = np.minimum(off, period - off)
    r = autocorrelation(process, dist)
    vals = process.variance - np.abs(r) ** 2 * pilot_power / (
        process.variance * pilot_power + noise_var
    )
    if np.ndim(offset) == 0:
        return float(vals)
    return vals


# ---------------------------------------------------------------------------
# Noncausal Wiener smoother
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1024)
def _grid_spectra(
    process: FadingProcess, period: int, offset: int, resolution: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quadrature weights plus S_0 and |S_offset|^2 on the grid."""
    w, wts = spectral_grid(process, period, resolution)
    s0 = undersampled_psd(process, period, 0, w).real
    if offset == 0:
        sm_sq = s0 * s0
    else:
        sm_sq = np.abs(undersampled_psd(process, period, offset, w)) ** 2
    s0.setflags(write=False)
    sm_sq.setflags(write=False)
    return wts, s0, sm_sq


def _clamp_error_variance(value: float, channel_var: float) -> float:
    guard = CLAMP_GUARD * max(channel_var, 1.0)
    if value < -guard or value > channel_var + guard:
        raise NumericalAccuracyError(
            f"error variance {value} outside [0, {channel_var}] beyond roundoff"
        )
    return min(max(value, 0.0), channel_var)


def wiener_error_variance(
    process: FadingProcess,
    period: int,
    offset: int,
    pilot_power: float,
    noise_var: float,
    *,
    start_resolution: int | None = None,
    rel_tol: float = QUADRATURE_REL_TOL,
) -> float:
    """Steady-state smoother error variance ``offset`` slots past a pilot.

    Evaluates variance - (1/2pi) * integral of
    pilot_power * |S_offset|^2 / (pilot_power * S_0 + noise_var) with the
    module quadrature, doubling the grid resolution until successive
    values agree to ``rel_tol``. |S_offset| = |S_{period-offset}|, so only
    the distance to the nearest pilot matters.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    if pilot_power < 0.0 or noise_var <= 0.0:
        raise ValueError("invalid pilot power or noise variance")
    v = process.variance
    if pilot_power == 0.0 or v == 0.0:
        return v
    m = offset % period
    m = min(m, period - m)
    prev = None
    for resolution in resolution_ladder(process, start_resolution):
        wts, s0, sm_sq = _grid_spectra(process, period, m, resolution)
        integral = float(
            np.dot(wts, pilot_power * sm_sq / (pilot_power * s0 + noise_var))
        )
        value = v - integral
        if prev is not None and abs(value - prev) <= rel_tol * max(
            abs(value), 1e-6 * v
        ):
            return _clamp_error_variance(value, v)
        prev = value
    raise NumericalAccuracyError(
        f"quadrature did not converge for period={period} offset={offset}"
    )


def alias_free_error_variance(
    channel_var: float,
    noise_var: float,
    pilot_power: float,
    max_doppler: float,
    period: int,
) -> float:
    """Closed-form smoother error variance for the bandlimited process.

    Valid only without aliasing (period * max_doppler < 1/2), where the
    sampled spectrum is flat over a fraction 2 * max_doppler * period of
    the band and the smoother integral collapses to
    channel_var * noise_var /
    (pilot_power * channel_var / (2 * max_doppler * period) + noise_var).
    The value is independent of the slot offset.
    """
    if period * max_doppler >= 0.5:
        raise ValueError(
            "aliasing: period * max_doppler must be < 1/2 for the closed form"
        )
    if channel_var < 0.0 or noise_var <= 0.0 or pilot_power < 0.0:
        raise ValueError("invalid arguments")
    bandwidth = 2.0 * max_doppler * period
    return channel_var * noise_var / (
        pilot_power * channel_var / bandwidth + noise_var
    )


# ---------------------------------------------------------------------------
# Profile assembly
# ---------------------------------------------------------------------------


def _link_errors(
    process: FadingProcess,
    offsets: np.ndarray,
    period: int,
    estimator: Estimator,
    pilot_power: float,
    noise_var: float,
) -> np.ndarray:
    if estimator is Estimator.SINGLE_PILOT:
        return np.asarray(
            single_pilot_error_variance_at(
                process, offsets, period, pilot_power, noise_var
            ),
            dtype=float,
        )
    out = np.empty(offsets.shape, dtype=float)
    cache: dict[int, float] = {}
    for i, off in enumerate(offsets):
        m = int(off) % period
        m = min(m, period - m)
        if m not in cache:
            cache[m] = wiener_error_variance(
                process, period, m, pilot_power, noise_var
            )
        out[i] = cache[m]
    return out


def build_profile(
    network: RelayNetworkSpec, training: TrainingConfig
) -> EstimationProfile:
    """Fill every per-slot error variance for one training configuration.

    Source-link offsets are measured from the source pilot in slot 1;
    relay-link offsets from the relay pilot in slot block_length/2 + 1.
    Offsets wrap modulo the block length because pilots repeat with the
    block period.
    """
    L = training.block_length
    m_slots = training.first_half_slots
    j_slots = training.second_half_slots
    src_first = m_slots - 1
    src_second = j_slots - 1
    rd_second = j_slots - (L // 2 + 1)

    err_sr = _link_errors(
        network.sr_process,
        src_first,
        L,
        training.estimator,
        training.pilot_power_source,
        network.noise_var,
    )
    err_sd_first = _link_errors(
        network.sd_process,
        src_first,
        L,
        training.estimator,
        training.pilot_power_source,
        network.noise_var,
    )
    err_sd_second = _link_errors(
        network.sd_process,
        src_second,
        L,
        training.estimator,
        training.pilot_power_source,
        network.noise_var,
    )
    err_rd = _link_errors(
        network.rd_process,
        rd_second,
        L,
        training.estimator,
        training.pilot_power_relay,
        network.noise_var,
    )
    return EstimationProfile(
        block_length=L,
        noise_var=network.noise_var,
        var_sd=network.var_sd,
        var_sr=network.var_sr,
        var_rd=network.var_rd,
        err_sr_first=err_sr,
        err_sd_first=err_sd_first,
        err_sd_second=err_sd_second,
        err_rd_second=err_rd,
    )
