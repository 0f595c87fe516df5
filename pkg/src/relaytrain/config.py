"""Experiment configuration: one human-editable YAML-style tree file.

Every key is validated (type, range, and no unknown keys) before any
computation starts; errors raise :class:`ConfigError` with the offending
path. Numeric fields also accept strings so scientific notation like
``1e-3`` survives YAML 1.1 parsing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .estimation import Estimator, RelayNetworkSpec
from .fading import FadingProcess, GaussMarkov, Lowpass
from .optimize import CollapseMode, OptimizationConfig, SnrDefinition
from .rates import GaussLaguerre, Integrator, MonteCarlo, Protocol, Scheme, SchemeSelector


class ConfigError(ValueError):
    """Configuration file failed validation."""


VALIDATION_SUITES = ("single_pilot", "wiener_gauss_markov", "wiener_lowpass")


@dataclass(frozen=True)
class ValidationSettings:
    suites: tuple[str, ...] = VALIDATION_SUITES
    tolerance: float = 0.05
    trials: int = 200_000
    blocks: int = 20_000
    window_pilots: int = 32
    segments: int = 8
    period: int = 12
    pilot_power: float = 6.0
    lowpass_doppler: float = 0.02
    lowpass_period: int = 8


@dataclass(frozen=True)
class ExperimentConfig:
    network: RelayNetworkSpec
    schemes: tuple[SchemeSelector, ...]
    estimators: tuple[Estimator, ...]
    snr_db: tuple[float, ...]
    m_grid: tuple[int, ...]
    integrator: Integrator
    restarts: int
    max_evals: int
    step_tolerance: float
    collapse: CollapseMode
    snr_definition: SnrDefinition
    relay_power_ratio: float
    seed: int
    paper_literal_i1: bool
    validation: ValidationSettings

    def optimizer_config(self) -> OptimizationConfig:
        return OptimizationConfig(
            m_grid=self.m_grid,
            restarts=self.restarts,
            max_evals=self.max_evals,
            step_tolerance=self.step_tolerance,
            integrator=self.integrator,
            snr_definition=self.snr_definition,
            relay_power_ratio=self.relay_power_ratio,
            seed=self.seed,
            collapse=self.collapse,
            paper_literal_i1=self.paper_literal_i1,
        )


def _expect_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return dict(node)


def _reject_unknown(node: dict, path: str) -> None:
    if node:
        keys = ", ".join(sorted(map(str, node)))
        raise ConfigError(f"{path}: unknown keys: {keys}")


_REQUIRED = object()


def _pop(node: dict, key: str, path: str, default=_REQUIRED):
    if key in node:
        return node.pop(key)
    if default is _REQUIRED:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return default


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{path}: expected a number")
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{path}: expected a number, got {value!r}") from None


def _as_int(value, path: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, (float, str)):
        f = _as_float(value, path)
        if f != int(f):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(f)
    raise ConfigError(f"{path}: expected an integer")


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false")
    return value


def _as_enum(enum_cls, value, path: str):
    try:
        return enum_cls(str(value))
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{path}: must be one of {options}") from None


def _parse_network(node, process: FadingProcess) -> RelayNetworkSpec:
    data = _expect_mapping(node, "network")
    spec = RelayNetworkSpec(
        var_sd=_as_float(_pop(data, "var_sd", "network"), "network.var_sd"),
        var_sr=_as_float(_pop(data, "var_sr", "network"), "network.var_sr"),
        var_rd=_as_float(_pop(data, "var_rd", "network"), "network.var_rd"),
        noise_var=_as_float(_pop(data, "noise_var", "network"), "network.noise_var"),
        process_family=process,
    )
    _reject_unknown(data, "network")
    return spec


def _parse_process(node) -> FadingProcess:
    data = _expect_mapping(node, "process")
    kind = str(_pop(data, "kind", "process"))
    if kind == "gauss_markov":
        proc = GaussMarkov(alpha=_as_float(_pop(data, "alpha", "process"), "process.alpha"))
    elif kind == "lowpass":
        proc = Lowpass(
            max_doppler=_as_float(
                _pop(data, "max_doppler", "process"), "process.max_doppler"
            )
        )
    else:
        raise ConfigError("process.kind: must be gauss_markov or lowpass")
    _reject_unknown(data, "process")
    return proc


def _parse_schemes(node) -> tuple[SchemeSelector, ...]:
    if not isinstance(node, list) or not node:
        raise ConfigError("schemes: expected a nonempty list")
    out = []
    for i, entry in enumerate(node):
        path = f"schemes[{i}]"
        data = _expect_mapping(entry, path)
        scheme = _as_enum(Scheme, _pop(data, "scheme", path), f"{path}.scheme")
        protocol = _as_enum(Protocol, _pop(data, "protocol", path), f"{path}.protocol")
        _reject_unknown(data, path)
        try:
            out.append(SchemeSelector(scheme, protocol))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return tuple(out)


def _parse_integrator(node, default_seed: int) -> Integrator:
    data = _expect_mapping(node, "integrator")
    kind = str(_pop(data, "kind", "integrator"))
    if kind == "gauss_laguerre":
        integrator = GaussLaguerre(
            order=_as_int(_pop(data, "order", "integrator", 24), "integrator.order")
        )
    elif kind == "monte_carlo":
        integrator = MonteCarlo(
            samples=_as_int(
                _pop(data, "samples", "integrator", 100_000), "integrator.samples"
            ),
            seed=_as_int(_pop(data, "seed", "integrator", default_seed), "integrator.seed"),
        )
    else:
        raise ConfigError("integrator.kind: must be gauss_laguerre or monte_carlo")
    _reject_unknown(data, "integrator")
    return integrator


def _parse_validation(node) -> ValidationSettings:
    if node is None:
        return ValidationSettings()
    data = _expect_mapping(node, "validation")
    suites_node = _pop(data, "suites", "validation", list(VALIDATION_SUITES))
    if not isinstance(suites_node, list):
        raise ConfigError("validation.suites: expected a list")
    if not suites_node:
        raise ConfigError("validation.suites: suite list must not be empty")
    suites = []
    for name in suites_node:
        if name not in VALIDATION_SUITES:
            raise ConfigError(
                f"validation.suites: unknown suite {name!r}; "
                f"options: {', '.join(VALIDATION_SUITES)}"
            )
        suites.append(str(name))
    settings = ValidationSettings(
        suites=tuple(suites),
        tolerance=_as_float(_pop(data, "tolerance", "validation", 0.05), "validation.tolerance"),
        trials=_as_int(_pop(data, "trials", "validation", 200_000), "validation.trials"),
        blocks=_as_int(_pop(data, "blocks", "validation", 20_000), "validation.blocks"),
        window_pilots=_as_int(
            _pop(data, "window_pilots", "validation", 32), "validation.window_pilots"
        ),
        segments=_as_int(_pop(data, "segments", "validation", 8), "validation.segments"),
        period=_as_int(_pop(data, "period", "validation", 12), "validation.period"),
        pilot_power=_as_float(
            _pop(data, "pilot_power", "validation", 6.0), "validation.pilot_power"
        ),
        lowpass_doppler=_as_float(
            _pop(data, "lowpass_doppler", "validation", 0.02),
            "validation.lowpass_doppler",
        ),
        lowpass_period=_as_int(
            _pop(data, "lowpass_period", "validation", 8), "validation.lowpass_period"
        ),
    )
    _reject_unknown(data, "validation")
    if settings.tolerance <= 0.0:
        raise ConfigError("validation.tolerance must be positive")
    return settings


def parse_config(data, source: str = "<config>") -> ExperimentConfig:
    root = _expect_mapping(data, source)
    seed = _as_int(_pop(root, "seed", source, 0), "seed")
    process = _parse_process(_pop(root, "process", source))
    network = _parse_network(_pop(root, "network", source), process)
    schemes = _parse_schemes(_pop(root, "schemes", source))

    est_node = _pop(root, "estimators", source)
    if not isinstance(est_node, list) or not est_node:
        raise ConfigError("estimators: expected a nonempty list")
    estimators = tuple(
        _as_enum(Estimator, e, f"estimators[{i}]") for i, e in enumerate(est_node)
    )

    snr_node = _pop(root, "snr_db", source)
    if not isinstance(snr_node, list) or not snr_node:
        raise ConfigError("snr_db: expected a nonempty list of dB values")
    snr_db = tuple(_as_float(v, f"snr_db[{i}]") for i, v in enumerate(snr_node))

    m_node = _pop(root, "m_grid", source)
    if not isinstance(m_node, list) or not m_node:
        raise ConfigError("m_grid: expected a nonempty list of even integers >= 4")
    m_grid = tuple(_as_int(v, f"m_grid[{i}]") for i, v in enumerate(m_node))
    if any(m < 4 or m % 2 for m in m_grid):
        raise ConfigError("m_grid: entries must be even integers >= 4")

    integrator = _parse_integrator(
        _pop(root, "integrator", source, {"kind": "gauss_laguerre", "order": 24}),
        seed,
    )

    opt_node = _expect_mapping(_pop(root, "optimizer", source, {}), "optimizer")
    restarts = _as_int(_pop(opt_node, "restarts", "optimizer", 4), "optimizer.restarts")
    max_evals = _as_int(_pop(opt_node, "max_evals", "optimizer", 3000), "optimizer.max_evals")
    step_tolerance = _as_float(
        _pop(opt_node, "step_tolerance", "optimizer", 1e-3), "optimizer.step_tolerance"
    )
    collapse = _as_enum(
        CollapseMode, _pop(opt_node, "collapse", "optimizer", "auto"), "optimizer.collapse"
    )
    _reject_unknown(opt_node, "optimizer")

    snr_definition = _as_enum(
        SnrDefinition, _pop(root, "snr_definition", source, "source"), "snr_definition"
    )
    relay_power_ratio = _as_float(
        _pop(root, "relay_power_ratio", source, 1.0), "relay_power_ratio"
    )
    paper_literal = _as_bool(
        _pop(root, "paper_literal_i1", source, False), "paper_literal_i1"
    )
    validation = _parse_validation(_pop(root, "validation", source, None))
    _reject_unknown(root, source)

    if restarts < 1 or max_evals < 1:
        raise ConfigError("optimizer.restarts and optimizer.max_evals must be >= 1")
    if relay_power_ratio < 0.0:
        raise ConfigError("relay_power_ratio must be nonnegative")

    return ExperimentConfig(
        network=network,
        schemes=schemes,
        estimators=estimators,
        snr_db=snr_db,
        m_grid=m_grid,
        integrator=integrator,
        restarts=restarts,
        max_evals=max_evals,
        step_tolerance=step_tolerance,
        collapse=collapse,
        snr_definition=snr_definition,
        relay_power_ratio=relay_power_ratio,
        seed=seed,
        paper_literal_i1=paper_literal,
        validation=validation,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, source=str(path))


def with_overrides(
    config: ExperimentConfig,
    *,
    seed: int | None = None,
    snr_definition: SnrDefinition | None = None,
    paper_literal_i1: bool | None = None,
) -> ExperimentConfig:
    """Command-line overrides applied on top of a parsed file."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
        if isinstance(config.integrator, MonteCarlo):
            updates["integrator"] = replace(config.integrator, seed=seed)
    if snr_definition is not None:
        updates["snr_definition"] = snr_definition
    if paper_literal_i1 is not None:
        updates["paper_literal_i1"] = paper_literal_i1
    return replace(config, **updates) if updates else config
