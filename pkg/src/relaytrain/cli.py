"""Experiment runner: optimized rate tables, power profiles, bit energies,
and simulator validation, all emitted as CSV.

Exit codes: 0 ok, 2 config error, 3 validation failure, 4 numerical
failure. Outputs are byte-identical for identical config and seed; grid
cells can run on a process pool (--jobs) without changing the results.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, with_overrides
from .estimation import Estimator, NumericalAccuracyError
from .fading import GaussMarkov, Lowpass
from .optimize import SnrDefinition, bit_energy, optimize_training
from .rates import Protocol, Scheme, SchemeSelector
from .simulate import SimReport, empirical_single_pilot, empirical_wiener


class ValidationFailure(RuntimeError):
    """A simulator suite deviated beyond the configured tolerance."""


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _cells(config: ExperimentConfig):
    for selector in config.schemes:
        for estimator in config.estimators:
            for snr_db in config.snr_db:
                yield selector, estimator, snr_db


def _sweep_cell(payload) -> tuple:
    config, selector, estimator, snr_db = payload
    snr = 10.0 ** (snr_db / 10.0)
    sweep = optimize_training(
        selector, config.network, estimator, snr, config.optimizer_config()
    )
    return selector, estimator, snr_db, sweep


def _run_cells(config: ExperimentConfig, jobs: int) -> list[tuple]:
    payloads = [(config, s, e, d) for s, e, d in _cells(config)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_cell, payloads))
    return [_sweep_cell(p) for p in payloads]


def cmd_rates(config: ExperimentConfig, args) -> int:
    results = _run_cells(config, args.jobs)
    rows = []
    by_m_rows = []
    for selector, estimator, snr_db, sweep in results:
        rows.append(
            [
                selector.scheme.value,
                selector.protocol.value,
                estimator.value,
                snr_db,
                sweep.best_block_length,
                sweep.best.rate_bits,
            ]
        )
        for m, result in sweep.table:
            by_m_rows.append(
                [
                    selector.scheme.value,
                    selector.protocol.value,
                    estimator.value,
                    snr_db,
                    m,
                    result.rate_bits,
                ]
            )
    out = Path(args.out)
    _write_csv(
        out / "rates.csv",
        ["scheme", "protocol", "estimator", "snr_db", "best_m", "rate_bits"],
        rows,
    )
    _write_csv(
        out / "rates_by_m.csv",
        ["scheme", "protocol", "estimator", "snr_db", "m", "rate_bits"],
        by_m_rows,
    )
    for snr_db in config.snr_db:
        cell_rows = [r for r in rows if r[3] == snr_db]
        best = max(cell_rows, key=lambda r: r[5])
        print(
            f"[rates] snr_db={_fmt(snr_db)}: best {best[0]}/{best[1]} "
            f"({best[2]}) rate={_fmt(best[5])} bits/symbol"
        )
    return 0


def cmd_ebn0(config: ExperimentConfig, args) -> int:
    results = _run_cells(config, args.jobs)
    opt = config.optimizer_config()
    rows = []
    curves: dict[tuple, list[tuple[float, float]]] = {}
    for selector, estimator, snr_db, sweep in results:
        rate = sweep.best.rate_bits
        snr = 10.0 ** (snr_db / 10.0)
        base = [
            selector.scheme.value,
            selector.protocol.value,
            estimator.value,
            snr_db,
            sweep.best_block_length,
            rate,
        ]
        if rate <= 0.0:
            print(
                f"[ebn0] warning: zero rate at snr_db={_fmt(snr_db)} for "
                f"{selector} ({estimator.value}); skipped",
                file=sys.stderr,
            )
            rows.append(base + ["", "zero_rate"])
            continue
        energy = bit_energy(rate, snr, opt)
        rows.append(base + [energy.db, "ok"])
        curves.setdefault((selector, estimator), []).append((snr_db, energy.db))
    _write_csv(
        Path(args.out) / "ebn0.csv",
        [
            "scheme",
            "protocol",
            "estimator",
            "snr_db",
            "best_m",
            "rate_bits",
            "ebn0_db",
            "status",
        ],
        rows,
    )
    for (selector, estimator), points in curves.items():
        min_snr, min_db = min(points, key=lambda p: p[1])
        interior = min_snr not in (points[0][0], points[-1][0])
        where = "interior" if interior else "edge"
        print(
            f"[ebn0] {selector} ({estimator.value}): minimum "
            f"{_fmt(min_db)} dB at snr_db={_fmt(min_snr)} ({where})"
        )
    return 0


def cmd_profile(config: ExperimentConfig, args) -> int:
    if args.scheme and not args.protocol:
        raise ConfigError("--scheme requires --protocol")
    selector = (
        SchemeSelector(Scheme(args.scheme), Protocol(args.protocol))
        if args.scheme
        else config.schemes[0]
    )
    estimator = Estimator(args.estimator) if args.estimator else config.estimators[0]
    snr_db = args.snr_db if args.snr_db is not None else config.snr_db[0]
    snr = 10.0 ** (snr_db / 10.0)
    sweep = optimize_training(
        selector, config.network, estimator, snr, config.optimizer_config()
    )
    best = sweep.best
    L = best.training.block_length
    rows = [[1, "source", "pilot", best.training.pilot_power_source]]
    for i, slot in enumerate(range(2, L // 2 + 1)):
        rows.append([slot, "source", "data", best.allocation.source_data[i]])
    if best.allocation.source_overlap is not None:
        for i, slot in enumerate(range(L // 2 + 2, L + 1)):
            rows.append([slot, "source", "data", best.allocation.source_overlap[i]])
    rows.append([L // 2 + 1, "relay", "pilot", best.training.pilot_power_relay])
    for i, slot in enumerate(range(L // 2 + 2, L + 1)):
        rows.append([slot, "relay", "data", best.allocation.relay_data[i]])
    _write_csv(Path(args.out) / "profile.csv", ["slot", "branch", "role", "power"], rows)
    print(
        f"[profile] {selector} ({estimator.value}) snr_db={_fmt(snr_db)}: "
        f"best M={sweep.best_block_length} rate={_fmt(best.rate_bits)} bits/symbol"
    )
    return 0


def _validation_reports(config: ExperimentConfig) -> dict[str, SimReport]:
    settings = config.validation
    network = config.network
    process = network.process_family
    alpha = process.alpha if isinstance(process, GaussMarkov) else 0.99
    reports: dict[str, SimReport] = {}
    for suite in settings.suites:
        if suite == "single_pilot":
            reports[suite] = empirical_single_pilot(
                GaussMarkov(alpha, network.var_sr),
                settings.pilot_power,
                network.noise_var,
                settings.trials,
                config.seed + 101,
            )
        elif suite == "wiener_gauss_markov":
            reports[suite] = empirical_wiener(
                GaussMarkov(alpha, network.var_sr),
                settings.period,
                settings.pilot_power,
                network.noise_var,
                settings.window_pilots,
                settings.blocks,
                config.seed + 202,
                segments=settings.segments,
            )
        else:
            reports[suite] = empirical_wiener(
                Lowpass(settings.lowpass_doppler, network.var_sr),
                settings.lowpass_period,
                settings.pilot_power,
                network.noise_var,
                settings.window_pilots,
                settings.blocks,
                config.seed + 303,
                segments=settings.segments,
            )
    return reports


def cmd_validate(config: ExperimentConfig, args) -> int:
    settings = config.validation
    reports = _validation_reports(config)
    out = Path(args.out)
    summary_rows = []
    all_ok = True
    for suite, report in reports.items():
        rows = [
            [
                int(report.offsets[i]),
                report.empirical[i],
                report.half_width[i],
                report.analytic[i],
                report.rel_deviation[i],
            ]
            for i in range(report.offsets.size)
        ]
        _write_csv(
            out / f"validate_{suite}.csv",
            ["offset", "empirical", "half_width", "analytic", "rel_deviation"],
            rows,
        )
        ok = report.max_rel_deviation <= settings.tolerance
        all_ok = all_ok and ok
        summary_rows.append(
            [
                suite,
                report.max_rel_deviation,
                settings.tolerance,
                "pass" if ok else "fail",
            ]
        )
        print(
            f"[validate] {suite}: max relative deviation "
            f"{_fmt(report.max_rel_deviation)} "
            f"(tolerance {_fmt(settings.tolerance)}) -> "
            f"{'PASS' if ok else 'FAIL'}"
        )
    _write_csv(
        out / "validate_summary.csv",
        ["suite", "max_rel_deviation", "tolerance", "status"],
        summary_rows,
    )
    if not all_ok:
        raise ValidationFailure("one or more simulator suites exceeded tolerance")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relay-training",
        description="Training-based achievable rates for three-node relay fading links",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", default="results", help="output directory for CSVs")
    common.add_argument(
        "--paper-literal",
        action="store_true",
        help="use the literal decode term for overlapped repetition coding",
    )
    common.add_argument(
        "--snr-def",
        choices=[d.value for d in SnrDefinition],
        default=None,
        help="override what the SNR axis measures",
    )
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    sub = parser.add_subparsers(dest="command", required=True)
    p_rates = sub.add_parser("rates", parents=[common], help="optimized rate vs SNR table")
    p_rates.set_defaults(func=cmd_rates)
    p_profile = sub.add_parser(
        "profile", parents=[common], help="per-slot power profile at the best period"
    )
    p_profile.add_argument("--scheme", choices=[s.value for s in Scheme], default=None)
    p_profile.add_argument(
        "--protocol", choices=[p.value for p in Protocol], default=None
    )
    p_profile.add_argument(
        "--estimator", choices=[e.value for e in Estimator], default=None
    )
    p_profile.add_argument("--snr-db", type=float, default=None)
    p_profile.set_defaults(func=cmd_profile)
    p_ebn0 = sub.add_parser(
        "ebn0", parents=[common], help="bit energy vs SNR from optimized rates"
    )
    p_ebn0.set_defaults(func=cmd_ebn0)
    p_validate = sub.add_parser(
        "validate", parents=[common], help="run the simulator validation suites"
    )
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = with_overrides(
            config,
            seed=args.seed,
            snr_definition=SnrDefinition(args.snr_def) if args.snr_def else None,
            paper_literal_i1=True if args.paper_literal else None,
        )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 3
    except (NumericalAccuracyError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
