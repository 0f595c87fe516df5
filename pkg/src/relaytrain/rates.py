"""Worst-case achievable rates for the relaying schemes.

Treating the channel-estimation residuals as extra Gaussian noise turns
each data-slot pair into a handful of instantaneous SNR terms driven by
the squared magnitudes of three unit-variance complex Gaussian estimate
directions. The per-slot log expressions for amplify-and-forward and the
two decode-and-forward coding styles are averaged over those magnitudes
(unit-mean exponentials) with tensor Gauss-Laguerre quadrature or seeded
Monte Carlo, then normalized by the block length.

All internal math is in nats; results expose bits/symbol. Everything is
pure and deterministic for fixed inputs, including the Monte Carlo path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.laguerre import laggauss
from scipy.special import exp1

from .estimation import EstimationProfile, RelayNetworkSpec, TrainingConfig, build_profile

LN2 = math.log(2.0)


class Scheme(str, Enum):
    AF = "af"
    DF_REPETITION = "df_repetition"
    DF_PARALLEL = "df_parallel"


class Protocol(str, Enum):
    NON_OVERLAPPED = "non_overlapped"
    OVERLAPPED = "overlapped"


@dataclass(frozen=True)
class SchemeSelector:
    scheme: Scheme
    protocol: Protocol

    def __post_init__(self) -> None:
        if self.scheme is Scheme.DF_PARALLEL and self.protocol is Protocol.OVERLAPPED:
            raise ValueError("parallel coding has no overlapped-protocol rate")

    def __str__(self) -> str:
        return f"{self.scheme.value}/{self.protocol.value}"


ALL_SELECTORS = (
    SchemeSelector(Scheme.AF, Protocol.NON_OVERLAPPED),
    SchemeSelector(Scheme.AF, Protocol.OVERLAPPED),
    SchemeSelector(Scheme.DF_REPETITION, Protocol.NON_OVERLAPPED),
    SchemeSelector(Scheme.DF_REPETITION, Protocol.OVERLAPPED),
    SchemeSelector(Scheme.DF_PARALLEL, Protocol.NON_OVERLAPPED),
)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Per-slot data powers; ``source_overlap`` only for overlapped runs."""

    source_data: np.ndarray
    relay_data: np.ndarray
    source_overlap: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in ("source_data", "relay_data"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if self.source_overlap is not None:
            object.__setattr__(
                self, "source_overlap", np.asarray(self.source_overlap, dtype=float)
            )
        if self.source_data.shape != self.relay_data.shape:
            raise ValueError("source and relay power vectors must match in length")
        if self.source_overlap is not None and (
            self.source_overlap.shape != self.source_data.shape
        ):
            raise ValueError("overlap power vector must match in length")
        for arr in (self.source_data, self.relay_data, self.source_overlap):
            if arr is not None and np.any(arr < 0.0):
                raise ValueError("powers must be nonnegative")

    @property
    def n_data(self) -> int:
        return self.source_data.shape[0]

    def overlap_or_zero(self) -> np.ndarray:
        if self.source_overlap is None:
            return np.zeros_like(self.source_data)
        return self.source_overlap


@dataclass(frozen=True)
class SnrTerms:
    """Instantaneous SNR terms for one data-slot pair and one realization."""

    a: float
    b: float
    c: float
    d: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and nonnegative")


def kernel_f(x, y):
    """Combining kernel x*y / (1 + x + y)."""
    return x * y / (1.0 + x + y)


def kernel_q(a, b, c, d):
    """Overlap cross-term kernel (1 + a) * b * (1 + c) / (1 + c + d)."""
    return (1.0 + a) * b * (1.0 + c) / (1.0 + c + d)


@dataclass(frozen=True)
class GaussLaguerre:
    """Tensor-product quadrature over the three exponential directions."""

    order: int = 24

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ValueError("order must be >= 2")


@dataclass(frozen=True)
class MonteCarlo:
    """Common-random-number sampling of the three exponential directions."""

    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


Integrator = GaussLaguerre | MonteCarlo


@lru_cache(maxsize=8)
def _expectation_nodes(
    integrator: Integrator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flat (u_sd, u_sr, u_rd, weight) nodes with weights summing to 1."""
    if isinstance(integrator, GaussLaguerre):
        x, w = laggauss(integrator.order)
        u_sd = np.repeat(x, integrator.order * integrator.order)
        u_sr = np.tile(np.repeat(x, integrator.order), integrator.order)
        u_rd = np.tile(x, integrator.order * integrator.order)
        wts = (
            np.repeat(w, integrator.order * integrator.order)
            * np.tile(np.repeat(w, integrator.order), integrator.order)
            * np.tile(w, integrator.order * integrator.order)
        )
        nodes = (u_sd, u_sr, u_rd, wts)
    else:
        rng = np.random.default_rng(integrator.seed)
        u = rng.exponential(size=(3, integrator.samples))
        wts = np.full(integrator.samples, 1.0 / integrator.samples)
        nodes = (u[0], u[1], u[2], wts)
    for arr in nodes:
        arr.setflags(write=False)
    return nodes


@lru_cache(maxsize=8)
def _expectation_nodes_2d(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flat (u1, u2, weight) tensor nodes for two exponential directions."""
    x, w = laggauss(order)
    u1 = np.repeat(x, order)
    u2 = np.tile(x, order)
    wts = np.repeat(w, order) * np.tile(w, order)
    for arr in (u1, u2, wts):
        arr.setflags(write=False)
    return u1, u2, wts


def _exp_scaled_e1(x: np.ndarray) -> np.ndarray:
    """exp(x) * E1(x) for x > 0, stable where exp(x) alone overflows."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 50.0
    out[small] = np.exp(x[small]) * exp1(x[small])
    xb = x[~small]
    total = np.ones_like(xb)
    term = np.ones_like(xb)
    for k in range(1, 13):
        term *= -k / xb
        total += term
    out[~small] = total / xb
    return out


def expected_log1p_exponential(snr_scale: float) -> float:
    """E[log(1 + snr_scale * u)] for unit-mean exponential u, in nats."""
    if snr_scale <= 0.0:
        return 0.0
    return float(_exp_scaled_e1(np.array(1.0 / snr_scale)))


def expected_min_log1p_exponential(snr_scale: float, other_snr) -> np.ndarray:
    """E_u[min(log(1 + snr_scale * u), log(1 + other_snr))], elementwise.

    Closed form from splitting the exponential integral at the crossing
    point u* = other_snr / snr_scale:
    exp(1/s) * (E1(1/s) - E1(1/s + u*)) with s = snr_scale.
    """
    other = np.asarray(other_snr, dtype=float)
    if snr_scale <= 0.0:
        return np.zeros_like(other)
    x = 1.0 / snr_scale
    u_star = other / snr_scale
    base = _exp_scaled_e1(np.array(x))
    return base - np.exp(-u_star) * _exp_scaled_e1(x + u_star)


def effective_noise_variances(
    profile: EstimationProfile,
    alloc: PowerAllocation,
    protocol: Protocol,
    slot: int,
) -> tuple[float, float, float]:
    """Worst-case noise variances (relay, destination@m, destination@j).

    ``slot`` is the source-phase slot m in 2..block_length/2; the paired
    relay-phase slot is j = m + block_length/2. Each variance adds the
    residual-estimation term power * error_variance to the thermal noise;
    the overlapped protocol also leaks the source's second-phase symbol
    into the destination's relay-phase observation.
    """
    L = profile.block_length
    if not 2 <= slot <= L // 2:
        raise ValueError(f"slot must lie in 2..{L // 2}")
    i = slot - 2
    noise = profile.noise_var
    var_relay = profile.err_sr_first[i] * alloc.source_data[i] + noise
    var_dest_first = profile.err_sd_first[i] * alloc.source_data[i] + noise
    var_dest_second = profile.err_rd_second[i] * alloc.relay_data[i] + noise
    if protocol is Protocol.OVERLAPPED:
        var_dest_second += profile.err_sd_second[i] * alloc.overlap_or_zero()[i]
    return float(var_relay), float(var_dest_first), float(var_dest_second)


def _log_rate_nats(selector: SchemeSelector, a, b, c, d, paper_literal_i1: bool):
    """Per-slot log expression in nats; inputs may be arrays."""
    scheme, protocol = selector.scheme, selector.protocol
    if scheme is Scheme.AF:
        if protocol is Protocol.NON_OVERLAPPED:
            return np.log1p(a + kernel_f(b, c))
        return np.log1p(a + kernel_f(d, c) + kernel_q(a, b, c, d))
    if scheme is Scheme.DF_REPETITION:
        if protocol is Protocol.NON_OVERLAPPED:
            return np.minimum(np.log1p(b), np.log1p(a + c))
        relay_decode = np.log1p(c) if paper_literal_i1 else np.log1p(d)
        return np.minimum(relay_decode, np.log1p(a + b + d + a * b))
    # parallel coding, non-overlapped only
    return np.minimum(np.log1p(b), np.log1p(a) + np.log1p(c))


def per_slot_rate(
    selector: SchemeSelector, terms: SnrTerms, *, paper_literal_i1: bool = False
) -> float:
    """Log contribution of one slot pair for one realization, in nats."""
    return float(
        _log_rate_nats(selector, terms.a, terms.b, terms.c, terms.d, paper_literal_i1)
    )


@dataclass(frozen=True, eq=False)
class RateResult:
    """Achievable-rate evaluation for one scheme and allocation."""

    rate_nats: float
    per_slot_nats: np.ndarray
    block_length: int
    mc_standard_error_nats: float | None = None

    @property
    def rate_bits_per_symbol(self) -> float:
        return self.rate_nats / LN2

    @property
    def per_slot_breakdown(self) -> np.ndarray:
        """Expected per-slot contributions in bits; sums to M * rate."""
        return self.per_slot_nats / LN2

    @property
    def mc_standard_error_bits(self) -> float | None:
        if self.mc_standard_error_nats is None:
            return None
        return self.mc_standard_error_nats / LN2


def _snr_coefficients(
    profile: EstimationProfile, alloc: PowerAllocation, protocol: Protocol
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic multipliers of (u_sd, u_sr, u_sd, u_rd) per slot.

    Returns (a_coef, sr_coef, overlap_coef, rd_coef); the instantaneous
    terms are a = a_coef*u_sd, b/d = sr_coef*u_sr, b2 = overlap_coef*u_sd,
    c = rd_coef*u_rd.
    """
    noise = profile.noise_var
    p_src = alloc.source_data
    p_rel = alloc.relay_data
    p_ovl = alloc.overlap_or_zero()
    var_relay = profile.err_sr_first * p_src + noise
    var_dest_first = profile.err_sd_first * p_src + noise
    var_dest_second = profile.err_rd_second * p_rel + noise
    if protocol is Protocol.OVERLAPPED:
        var_dest_second = var_dest_second + profile.err_sd_second * p_ovl
    a_coef = p_src * profile.est_sd_first / var_dest_first
    sr_coef = p_src * profile.est_sr_first / var_relay
    rd_coef = p_rel * profile.est_rd_second / var_dest_second
    overlap_coef = p_ovl * profile.est_sd_second / var_dest_second
    return a_coef, sr_coef, overlap_coef, rd_coef


def _per_slot_sampled(selector, coefs, integrator, paper_literal_i1):
    """Per-slot expectations on shared sample/tensor nodes, plus MC error."""
    a_coef, sr_coef, overlap_coef, rd_coef = coefs
    u_sd, u_sr, u_rd, wts = _expectation_nodes(integrator)
    n = a_coef.shape[0]
    per_slot = np.empty(n)
    sample_sums = np.zeros_like(u_sd) if isinstance(integrator, MonteCarlo) else None
    for i in range(n):
        a = a_coef[i] * u_sd
        b_sr = sr_coef[i] * u_sr
        c = rd_coef[i] * u_rd
        if selector.protocol is Protocol.OVERLAPPED:
            vals = _log_rate_nats(
                selector, a, overlap_coef[i] * u_sd, c, b_sr, paper_literal_i1
            )
        else:
            vals = _log_rate_nats(selector, a, b_sr, c, 0.0, paper_literal_i1)
        per_slot[i] = float(np.dot(wts, vals))
        if sample_sums is not None:
            sample_sums += vals
    mc_se = None
    if sample_sums is not None:
        mc_se = float(np.std(sample_sums) / math.sqrt(sample_sums.size))
    return per_slot, mc_se


def _per_slot_decode_forward(selector, coefs, order, paper_literal_i1):
    """Exact inner expectation over the decode-constraint direction.

    Each decode-and-forward expression is min(log1p(scale * u), log1p(s))
    with the inner exponential u independent of everything in s, so the
    one-dimensional expectation has a closed form and only the smooth
    two-dimensional remainder needs tensor quadrature.
    """
    a_coef, sr_coef, overlap_coef, rd_coef = coefs
    n = a_coef.shape[0]
    per_slot = np.empty(n)
    u1, u2, wts = _expectation_nodes_2d(order)
    for i in range(n):
        if selector.protocol is Protocol.NON_OVERLAPPED:
            a = a_coef[i] * u1  # u_sd direction
            c = rd_coef[i] * u2  # u_rd direction
            if selector.scheme is Scheme.DF_PARALLEL:
                combined = a + c + a * c
            else:
                combined = a + c
            inner = expected_min_log1p_exponential(sr_coef[i], combined)
            per_slot[i] = float(np.dot(wts, inner))
        elif paper_literal_i1:
            # decode constraint on the relay-destination direction
            a = a_coef[i] * u1  # u_sd
            b = overlap_coef[i] * u1
            d = sr_coef[i] * u2  # u_sr
            combined = a + b + d + a * b
            inner = expected_min_log1p_exponential(rd_coef[i], combined)
            per_slot[i] = float(np.dot(wts, inner))
        else:
            # the combining term dominates the decode term pointwise, so
            # the minimum is the decode rate itself
            per_slot[i] = expected_log1p_exponential(sr_coef[i])
    return per_slot


def evaluate_rate_for_profile(
    selector: SchemeSelector,
    profile: EstimationProfile,
    alloc: PowerAllocation,
    integrator: Integrator,
    *,
    paper_literal_i1: bool = False,
) -> RateResult:
    """Rate for a prebuilt estimation profile (optimizer fast path)."""
    if alloc.n_data != profile.n_data:
        raise ValueError(
            f"allocation has {alloc.n_data} slots, profile expects {profile.n_data}"
        )
    if selector.protocol is Protocol.NON_OVERLAPPED and alloc.source_overlap is not None:
        if np.any(alloc.source_overlap != 0.0):
            raise ValueError("non-overlapped protocol cannot carry overlap powers")
    coefs = _snr_coefficients(profile, alloc, selector.protocol)
    mc_se = None
    if isinstance(integrator, GaussLaguerre) and selector.scheme is not Scheme.AF:
        per_slot = _per_slot_decode_forward(
            selector, coefs, integrator.order, paper_literal_i1
        )
    else:
        per_slot, mc_se = _per_slot_sampled(
            selector, coefs, integrator, paper_literal_i1
        )
    L = profile.block_length
    rate_nats = float(per_slot.sum()) / L
    per_slot.setflags(write=False)
    return RateResult(
        rate_nats=rate_nats,
        per_slot_nats=per_slot,
        block_length=L,
        mc_standard_error_nats=None if mc_se is None else mc_se / L,
    )


def evaluate_rate(
    selector: SchemeSelector,
    network: RelayNetworkSpec,
    training: TrainingConfig,
    alloc: PowerAllocation,
    integrator: Integrator,
    *,
    paper_literal_i1: bool = False,
) -> RateResult:
    """Achievable rate of one scheme under a training setup and allocation.

    Power-constraint feasibility is the optimizer's concern; any
    nonnegative allocation with matching dimensions is evaluated.
    """
    if alloc.n_data != training.n_data:
        raise ValueError(
            f"allocation has {alloc.n_data} slots, block length "
            f"{training.block_length} needs {training.n_data}"
        )
    profile = build_profile(network, training)
    return evaluate_rate_for_profile(
        selector, profile, alloc, integrator, paper_literal_i1=paper_literal_i1
    )
