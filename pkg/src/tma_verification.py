import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import structlog

from observability.tracing import Tracing
from parallel.loop_on_thread import sweep_daemon
from tma_beamformer import Beamformer
from tma_config import ArrayConfig, TmaConfig
from tma_delay import DelayControl
from tma_modseq import ModulatingSequence
from tma_modulator import Modulator
from tma_oracle import Oracle
from tma_taper import Taper

ORACLE_TOLERANCE = 1e-9
SPARSITY_TOLERANCE = 1e-12
PARSEVAL_ANALYTIC_TOLERANCE = 1e-3
PARSEVAL_ORACLE_TOLERANCE = 1e-12
REPLICA_TOLERANCE = 1e-6
PHASE_TOLERANCE = 1e-12
BROADSIDE_TOLERANCE_DB = 0.01
SLOPE_TOLERANCE_DB = 0.5

PARSEVAL_I_MAX = 1000
FAULT_SIZE = 1e-6


@dataclass(frozen=True)
class VerificationGrid:
    n_phases: tuple[int, ...] = (2, 3, 4, 8)
    o_tau: tuple[int, ...] = (1, 2, 4)
    replica_configs: tuple[tuple[int, int, int], ...] = ((4, 2, 1), (4, 1, 2), (2, 2, 2), (8, 2, 1))
    """(N, O_f, O_tau) of the modulated test signals"""
    samples_per_slot: int = 4
    grid_step: float = 0.1

    def configs(self) -> list[TmaConfig]:
        return [TmaConfig(n_phases=n, o_tau=o_tau) for n, o_tau in itertools.product(self.n_phases, self.o_tau)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    cases: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_error < self.tolerance)


@dataclass(frozen=True)
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def table(self) -> str:
        width = max(len(check.name) for check in self.checks)
        lines = [f"{'check':<{width}}  {'result':<6}  {'max_error':>12}  {'tolerance':>12}  {'cases':>6}  detail"]
        for check in self.checks:
            result = "PASS" if check.passed else "FAIL"
            lines.append(f"{check.name:<{width}}  {result:<6}  {check.max_error:>12.3e}  {check.tolerance:>12.3e}  {check.cases:>6}  {check.detail}")
        return "\n".join(lines)


class Verification:
    """Closed-form results checked against brute-force evaluation"""

    @staticmethod
    def _oracle_errors(cfg: TmaConfig, inject_fault: bool) -> tuple[float, int]:
        worst = 0.0
        cases = 0
        for delay, taper in itertools.product(range(cfg.num_delays), range(cfg.o_tau + 1)):
            oracle = Oracle.schedule_coefficients(ModulatingSequence.build_schedule(cfg, delay, taper))
            analytic = ModulatingSequence.schedule_coefficients(cfg, delay, taper, oracle.coefficients)
            if inject_fault and cases == 0:
                analytic[1] += FAULT_SIZE
            worst = max(worst, Oracle.compare(analytic, oracle))
            cases += 1
        return worst, cases

    @staticmethod
    def _sparsity_error(cfg: TmaConfig) -> tuple[float, int]:
        worst = 0.0
        for delay in range(cfg.num_delays):
            oracle = Oracle.schedule_coefficients(ModulatingSequence.build_schedule(cfg, delay))
            off_lines = [abs(c) for k, c in oracle.coefficients.items() if ModulatingSequence.existence_indicator(cfg.n_phases, k) == 0]
            worst = max([worst, *off_lines])
        return worst, cfg.num_delays

    @staticmethod
    def _parseval_errors(cfg: TmaConfig) -> tuple[float, float, int]:
        ks = 1 + np.arange(-PARSEVAL_I_MAX, PARSEVAL_I_MAX + 1) * cfg.n_phases
        analytic_worst = 0.0
        oracle_worst = 0.0
        for taper in range(cfg.o_tau + 1):
            schedule = ModulatingSequence.build_schedule(cfg, 0, taper)
            waveform = Oracle.sample_schedule(schedule, 1)
            mean_power = waveform.mean_power()
            analytic_power = float(np.sum(np.abs(Taper.tapered_coefficient(cfg.n_phases, ks, cfg.o_tau, taper)) ** 2))
            oracle_power = float(np.sum(np.abs(Oracle.dft_coefficients(waveform, zero_order_hold=False).dft) ** 2))
            analytic_worst = max(analytic_worst, abs(analytic_power - mean_power))
            oracle_worst = max(oracle_worst, abs(oracle_power - mean_power))
        return analytic_worst, oracle_worst, cfg.o_tau + 1

    @staticmethod
    def _replica_error(case: tuple[TmaConfig, int, int]) -> float:
        cfg, delay, samples_per_slot = case
        baseband = Modulator.make_test_baseband(cfg, samples_per_slot=samples_per_slot)
        modulated = Modulator.modulate(baseband, cfg, delay)
        predicted = Modulator.predict_replicas(cfg, delay, Modulator.folding_i_max(cfg, samples_per_slot))
        return Modulator.verify_replicas(modulated, predicted, baseband)

    @staticmethod
    def _phase_error(cfg: TmaConfig) -> float:
        phases = np.sort(DelayControl.main_harmonic_phases(cfg))
        spacing = np.diff(np.append(phases, phases[0] + 2 * np.pi))
        if len(np.unique(np.round(phases, 9))) != cfg.num_delays:
            return np.inf
        return float(np.max(np.abs(spacing - DelayControl.phase_resolution(cfg))))

    @staticmethod
    def _steering_error(case: tuple[TmaConfig, ArrayConfig, float]) -> float:
        cfg, acfg, grid_step = case
        worst = 0.0
        for delay in range(cfg.num_delays):
            direction = Beamformer.beam_direction(cfg, acfg, 0, delay)
            if direction is None or abs(direction) >= 90 - grid_step:
                continue
            peak = Beamformer.beampattern_sweep(acfg, cfg, delay, (0,), grid_step).peak_angle(0)
            worst = max(worst, abs(peak - direction))
        return worst

    @staticmethod
    def _map(func: Callable, items: list, workers: int | None) -> list:
        return sweep_daemon.ordered_map(func, items, workers)

    @staticmethod
    @Tracing.traced
    def run(grid: VerificationGrid | None = None, inject_fault: bool = False, workers: int | None = None) -> VerificationReport:
        """Runs every check; a failing check is reported, never raised"""
        grid = grid or VerificationGrid()
        logger = structlog.getLogger(Verification.__name__)
        configs = grid.configs()
        checks: list[CheckResult] = []

        with structlog.contextvars.bound_contextvars(inject_fault=inject_fault):
            oracle = Verification._map(lambda cfg: Verification._oracle_errors(cfg, inject_fault), configs, workers)
            detail = "fault injected" if inject_fault else "schedule DFT vs closed form, all delays and taper levels"
            checks.append(CheckResult("oracle_equivalence", max(e for e, _ in oracle), ORACLE_TOLERANCE, sum(c for _, c in oracle), detail))

            sparsity = Verification._map(Verification._sparsity_error, configs, workers)
            checks.append(CheckResult("sparsity", max(e for e, _ in sparsity), SPARSITY_TOLERANCE, sum(c for _, c in sparsity), "lines with k mod N != 1"))

            parseval = Verification._map(Verification._parseval_errors, configs, workers)
            cases = sum(c for _, _, c in parseval)
            checks.append(CheckResult("parseval_analytic", max(a for a, _, _ in parseval), PARSEVAL_ANALYTIC_TOLERANCE, cases, f"i_max={PARSEVAL_I_MAX}"))
            checks.append(CheckResult("parseval_oracle", max(o for _, o, _ in parseval), PARSEVAL_ORACLE_TOLERANCE, cases, "complete DFT"))

            replica_cases = [
                (TmaConfig(n_phases=n, o_f=o_f, o_tau=o_tau), delay, grid.samples_per_slot)
                for n, o_f, o_tau in grid.replica_configs
                for delay in range(n * o_tau)
            ]
            replicas = Verification._map(Verification._replica_error, replica_cases, workers)
            checks.append(CheckResult("replica_residual", max(replicas), REPLICA_TOLERANCE, len(replica_cases), f"K={grid.samples_per_slot}, relative L2"))

            phases = Verification._map(Verification._phase_error, configs, workers)
            bits_error = abs(DelayControl.effective_bits(TmaConfig(n_phases=4, o_tau=4)) - 4.0)
            checks.append(CheckResult("phase_resolution", max([*phases, bits_error]), PHASE_TOLERANCE, len(configs) + 1, "D uniformly spaced phases"))

            acfg = ArrayConfig(n_antennas=8, spacing_wl=0.5)
            steering_configs = [TmaConfig(n_phases=4, o_tau=o_tau) for o_tau in (1, 2)]
            steering = Verification._map(Verification._steering_error, [(cfg, acfg, grid.grid_step) for cfg in steering_configs], workers)
            # the peak may sit on either neighbouring grid point
            checks.append(CheckResult("beam_steering", max(steering), grid.grid_step + 1e-9, len(steering_configs), f"grid step {grid.grid_step} deg"))

            beams = [len(Beamformer.steering_directions(cfg, acfg, grid.grid_step)) for cfg in steering_configs]
            checks.append(CheckResult("beam_count", float(abs(beams[0] - 4) + abs(beams[1] - 8)), 0.5, 2, f"O_tau=1: {beams[0]}, O_tau=2: {beams[1]}"))

            broadside = Beamformer.array_factor(acfg, steering_configs[0], 0.0, 0, 0)
            broadside_db = 10 * np.log10(abs(broadside) ** 2)
            expected_db = 10 * np.log10(acfg.n_antennas * abs(ModulatingSequence.harmonic_alpha(4, 0)) ** 2)
            checks.append(CheckResult("broadside_power", float(abs(broadside_db - expected_db)), BROADSIDE_TOLERANCE_DB, 1, f"{broadside_db:.3f} dB"))

            gains = {n: Taper.worst_case_harmonic_gain_db(n, 2) for n in (4, 8, 16)}
            slopes = [gains[8] - gains[4], gains[16] - gains[8]]
            checks.append(
                CheckResult("taper_doubling_slope", float(max(abs(s - 6) for s in slopes)), SLOPE_TOLERANCE_DB, len(slopes), ", ".join(f"{s:.2f} dB" for s in slopes))
            )

        report = VerificationReport(checks)
        for check in report.failures():
            logger.warning("Check failed", check=check.name, max_error=check.max_error, tolerance=check.tolerance)
        logger.info("Verification complete", passed=report.passed, checks=len(checks))
        return report
