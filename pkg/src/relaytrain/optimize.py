"""Joint optimization of training period, pilot power, and data powers.

Over one block, the source spends at most block_length * source_power
(pilot energy plus expected data energy) and the relay at most
block_length * relay_power, so each node's budget is a scaled simplex
with the pilot energy as coordinate 0. The optimizer runs a multi-start
projected coordinate search with parabolic line refinement on that
product of simplices, using the deterministic quadrature objective.

For the alias-free lowpass/Wiener combination the per-slot estimation
quality is offset-independent, so the search optionally collapses the
data powers to one scalar per transmission phase.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .estimation import Estimator, RelayNetworkSpec, TrainingConfig
from .fading import Lowpass
from .rates import (
    GaussLaguerre,
    Integrator,
    PowerAllocation,
    Protocol,
    RateResult,
    SchemeSelector,
    evaluate_rate,
)


class SnrDefinition(str, Enum):
    """What the reported SNR axis measures: source power or total power."""

    SOURCE = "source"
    TOTAL = "total"


class CollapseMode(str, Enum):
    AUTO = "auto"
    ALWAYS = "always"
    NEVER = "never"


@dataclass(frozen=True)
class OptimizationConfig:
    m_grid: tuple[int, ...] = (8, 12, 16, 20, 24, 28, 32)
    restarts: int = 8
    max_evals: int = 5000
    step_tolerance: float = 1e-3
    integrator: Integrator = GaussLaguerre(24)
    snr_definition: SnrDefinition = SnrDefinition.SOURCE
    relay_power_ratio: float = 1.0
    seed: int = 0
    collapse: CollapseMode = CollapseMode.AUTO
    paper_literal_i1: bool = False

    def __post_init__(self) -> None:
        if not self.m_grid:
            raise ValueError("m_grid must be nonempty")
        if any(m < 4 or m % 2 for m in self.m_grid):
            raise ValueError("m_grid entries must be even integers >= 4")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.relay_power_ratio < 0.0:
            raise ValueError("relay power ratio must be nonnegative")


@dataclass(frozen=True, eq=False)
class AllocationResult:
    """Feasible local optimum of the rate for one (scheme, M, SNR) cell."""

    training: TrainingConfig
    allocation: PowerAllocation
    rate_bits: float
    source_slack: float
    relay_slack: float
    evaluations: int

    @property
    def block_length(self) -> int:
        return self.training.block_length


@dataclass(frozen=True, eq=False)
class TrainingSweep:
    """Best training period plus the full rate-vs-period table."""

    best_block_length: int
    best: AllocationResult
    table: tuple[tuple[int, AllocationResult], ...]


@dataclass(frozen=True)
class BitEnergy:
    linear: float
    db: float


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = total}."""
    if total < 0.0:
        raise ValueError("total must be nonnegative")
    v = np.asarray(v, dtype=float)
    if total == 0.0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    mask = u - css / idx > 0
    # fp absorption can empty the mask for tiny totals; all mass then goes
    # to the largest coordinate
    rho = idx[mask][-1] if mask.any() else 1
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _derive_seed(base_seed: int, *parts) -> int:
    digest = hashlib.blake2s(digest_size=8)
    digest.update(str(base_seed).encode())
    for part in parts:
        digest.update(b"|")
        digest.update(str(part).encode())
    return int.from_bytes(digest.digest(), "little")


# ---------------------------------------------------------------------------
# Decision-vector layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Layout:
    """Mapping between the flat decision vector and training/allocation."""

    block_length: int
    estimator: Estimator
    overlapped: bool
    collapsed: bool
    source_budget: float
    relay_budget: float

    @property
    def n_data(self) -> int:
        return (self.block_length - 2) // 2

    @property
    def n_source(self) -> int:
        if self.collapsed:
            return 3 if self.overlapped else 2
        return 1 + self.n_data * (2 if self.overlapped else 1)

    @property
    def n_relay(self) -> int:
        return 2 if self.collapsed else 1 + self.n_data

    @property
    def size(self) -> int:
        return self.n_source + self.n_relay

    def segments(self) -> tuple[tuple[int, int, float], ...]:
        return (
            (0, self.n_source, self.source_budget),
            (self.n_source, self.size, self.relay_budget),
        )

    def unpack(self, x: np.ndarray) -> tuple[TrainingConfig, PowerAllocation]:
        nd = self.n_data
        src = x[: self.n_source]
        rel = x[self.n_source :]
        if self.collapsed:
            source_data = np.full(nd, src[1] / nd)
            overlap = np.full(nd, src[2] / nd) if self.overlapped else None
            relay_data = np.full(nd, rel[1] / nd)
        else:
            source_data = src[1 : 1 + nd].copy()
            overlap = src[1 + nd :].copy() if self.overlapped else None
            relay_data = rel[1:].copy()
        training = TrainingConfig(
            self.block_length, self.estimator, float(src[0]), float(rel[0])
        )
        return training, PowerAllocation(source_data, relay_data, overlap)

    def pack(
        self, training: TrainingConfig, alloc: PowerAllocation
    ) -> np.ndarray:
        nd = self.n_data
        overlap = alloc.overlap_or_zero()
        if self.collapsed:
            src = [training.pilot_power_source, float(alloc.source_data.sum())]
            if self.overlapped:
                src.append(float(overlap.sum()))
            rel = [training.pilot_power_relay, float(alloc.relay_data.sum())]
            return np.array(src + rel)
        parts = [
            np.array([training.pilot_power_source]),
            _resize_power_vector(alloc.source_data, nd),
        ]
        if self.overlapped:
            parts.append(_resize_power_vector(overlap, nd))
        parts.append(np.array([training.pilot_power_relay]))
        parts.append(_resize_power_vector(alloc.relay_data, nd))
        return np.concatenate(parts)


def _resize_power_vector(vec: np.ndarray, n: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.size == n:
        return vec.copy()
    if vec.size == 1:
        return np.full(n, float(vec[0]))
    old = np.linspace(0.0, 1.0, vec.size)
    new = np.linspace(0.0, 1.0, n)
    return np.interp(new, old, vec)


def _project(x: np.ndarray, segments) -> np.ndarray:
    out = x.copy()
    for lo, hi, total in segments:
        out[lo:hi] = project_simplex(out[lo:hi], total)
    return out


# ---------------------------------------------------------------------------
# Projected coordinate search
# ---------------------------------------------------------------------------


def _coordinate_ascent(f, x0, segments, budget, step_tolerance):
    x = _project(np.asarray(x0, dtype=float), segments)
    best = f(x)
    evals = 1
    totals = np.empty(x.size)
    for lo, hi, total in segments:
        totals[lo:hi] = total

    def moved(i, t):
        y = x.copy()
        y[i] += t
        return _project(y, segments)

    step = 0.25
    while evals + 3 <= budget and step > step_tolerance:
        improved = False
        for i in range(x.size):
            if totals[i] <= 0.0 or evals + 3 > budget:
                continue
            s = step * totals[i]
            y_plus = moved(i, s)
            f_plus = f(y_plus)
            y_minus = moved(i, -s)
            f_minus = f(y_minus)
            evals += 2
            cand_f, cand_x = (f_plus, y_plus) if f_plus >= f_minus else (f_minus, y_minus)
            curvature = f_plus + f_minus - 2.0 * best
            if curvature < 0.0:
                t_star = 0.5 * s * (f_minus - f_plus) / curvature
                t_star = float(np.clip(t_star, -4.0 * s, 4.0 * s))
                if abs(t_star) > 1e-12 * totals[i]:
                    y_par = moved(i, t_star)
                    f_par = f(y_par)
                    evals += 1
                    if f_par > cand_f:
                        cand_f, cand_x = f_par, y_par
            if cand_f > best * (1.0 + 1e-13) + 1e-300:
                x, best = cand_x, cand_f
                improved = True
        if not improved:
            step *= 0.5
    return x, best, evals


def _initial_points(layout: _Layout, restarts: int, rng: np.random.Generator):
    n_s, n_r = layout.n_source, layout.n_relay
    B_s, B_r = layout.source_budget, layout.relay_budget
    points = []
    uniform = np.concatenate([np.full(n_s, B_s / n_s), np.full(n_r, B_r / n_r)])
    points.append(uniform)
    if restarts >= 2:
        # pilot-heavy: training gets a third of each budget up front
        src = np.full(n_s, (2.0 * B_s / 3.0) / max(n_s - 1, 1))
        src[0] = B_s / 3.0
        rel = np.full(n_r, (2.0 * B_r / 3.0) / max(n_r - 1, 1))
        rel[0] = B_r / 3.0
        points.append(np.concatenate([src, rel]))
    if restarts >= 3 and not layout.collapsed:
        # decay with distance from the pilot in each phase
        nd = layout.n_data
        shape = 0.85 ** np.arange(nd)
        src_parts = [np.array([0.3 * B_s]), 0.7 * B_s * shape / shape.sum()]
        if layout.overlapped:
            src_parts[1] = 0.35 * B_s * shape / shape.sum()
            src_parts.append(0.35 * B_s * shape[::-1] / shape.sum())
        rel = np.concatenate([np.array([0.3 * B_r]), 0.7 * B_r * shape / shape.sum()])
        points.append(np.concatenate(src_parts + [rel]))
    while len(points) < restarts:
        src = rng.random(n_s)
        rel = rng.random(n_r)
        points.append(
            np.concatenate([B_s * src / src.sum(), B_r * rel / rel.sum()])
        )
    return points


def _should_collapse(
    config: OptimizationConfig,
    network: RelayNetworkSpec,
    estimator: Estimator,
    block_length: int,
) -> bool:
    if config.collapse is CollapseMode.ALWAYS:
        return True
    if config.collapse is CollapseMode.NEVER:
        return False
    process = network.process_family
    return (
        estimator is Estimator.WIENER
        and isinstance(process, Lowpass)
        and block_length * process.max_doppler < 0.5
    )


def optimize_allocation(
    selector: SchemeSelector,
    network: RelayNetworkSpec,
    estimator: Estimator,
    block_length: int,
    snr: float,
    config: OptimizationConfig,
    extra_starts: tuple[tuple[TrainingConfig, PowerAllocation], ...] = (),
) -> AllocationResult:
    """Locally optimal pilot/data split for one (scheme, M, SNR) cell.

    ``snr`` is linear: the source power is snr * noise_var and the relay
    power is relay_power_ratio times that. The result always dominates the
    uniform equal-split baseline, which is one of the starting points.
    """
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    source_power = snr * network.noise_var
    if config.snr_definition is SnrDefinition.TOTAL:
        source_power /= 1.0 + config.relay_power_ratio
    relay_power = config.relay_power_ratio * source_power
    layout = _Layout(
        block_length=block_length,
        estimator=estimator,
        overlapped=selector.protocol is Protocol.OVERLAPPED,
        collapsed=_should_collapse(config, network, estimator, block_length),
        source_budget=block_length * source_power,
        relay_budget=block_length * relay_power,
    )

    def objective(x: np.ndarray) -> float:
        training, alloc = layout.unpack(x)
        return evaluate_rate(
            selector,
            network,
            training,
            alloc,
            config.integrator,
            paper_literal_i1=config.paper_literal_i1,
        ).rate_bits_per_symbol

    rng = np.random.default_rng(
        _derive_seed(config.seed, block_length, selector, estimator.value, snr)
    )
    points = _initial_points(layout, config.restarts, rng)
    for training, alloc in extra_starts:
        points.append(layout.pack(training, alloc))
    budget_each = max(config.max_evals // len(points), 16)
    best_x = None
    best_rate = -math.inf
    total_evals = 0
    for x0 in points:
        x, rate, used = _coordinate_ascent(
            objective, x0, layout.segments(), budget_each, config.step_tolerance
        )
        total_evals += used
        if rate > best_rate:
            best_rate, best_x = rate, x
    training, alloc = layout.unpack(best_x)
    source_spend = training.pilot_power_source + float(
        alloc.source_data.sum() + alloc.overlap_or_zero().sum()
    )
    relay_spend = training.pilot_power_relay + float(alloc.relay_data.sum())
    return AllocationResult(
        training=training,
        allocation=alloc,
        rate_bits=best_rate,
        source_slack=layout.source_budget - source_spend,
        relay_slack=layout.relay_budget - relay_spend,
        evaluations=total_evals,
    )


def optimize_training(
    selector: SchemeSelector,
    network: RelayNetworkSpec,
    estimator: Estimator,
    snr: float,
    config: OptimizationConfig,
) -> TrainingSweep:
    """Sweep the training period grid; ties break toward the smaller period.

    Each period is warm-started from the previous period's optimum
    (resampled onto the new slot count) in addition to the standard
    starting points.
    """
    table = []
    best_entry = None
    carry: tuple[tuple[TrainingConfig, PowerAllocation], ...] = ()
    for block_length in sorted(config.m_grid):
        result = optimize_allocation(
            selector, network, estimator, block_length, snr, config,
            extra_starts=carry,
        )
        table.append((block_length, result))
        carry = ((result.training, result.allocation),)
        if best_entry is None or result.rate_bits > best_entry[1].rate_bits:
            best_entry = (block_length, result)
    return TrainingSweep(
        best_block_length=best_entry[0],
        best=best_entry[1],
        table=tuple(table),
    )


def bit_energy(
    rate_bits: float, snr: float, config: OptimizationConfig
) -> BitEnergy:
    """Energy per information bit relative to the noise level.

    Divides the configured SNR measure (source-only, or source plus relay
    for the total definition) by the spectral efficiency in bits/symbol.
    """
    if rate_bits <= 0.0:
        raise ValueError("bit energy is undefined at zero rate")
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    effective = snr
    if config.snr_definition is SnrDefinition.TOTAL:
        effective = snr * (1.0 + config.relay_power_ratio)
    linear = effective / rate_bits
    return BitEnergy(linear=linear, db=10.0 * math.log10(linear))


def uniform_allocation(
    selector: SchemeSelector,
    network: RelayNetworkSpec,
    estimator: Estimator,
    block_length: int,
    snr: float,
    relay_power_ratio: float = 1.0,
) -> tuple[TrainingConfig, PowerAllocation]:
    """Equal split of each budget over its pilot plus data slots."""
    nd = (block_length - 2) // 2
    overlapped = selector.protocol is Protocol.OVERLAPPED
    source_budget = block_length * snr * network.noise_var
    relay_budget = relay_power_ratio * source_budget
    n_source = 1 + nd * (2 if overlapped else 1)
    share_s = source_budget / n_source
    share_r = relay_budget / (1 + nd)
    training = TrainingConfig(block_length, estimator, share_s, share_r)
    alloc = PowerAllocation(
        np.full(nd, share_s),
        np.full(nd, share_r),
        np.full(nd, share_s) if overlapped else None,
    )
    return training, alloc
