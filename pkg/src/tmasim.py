#!/usr/bin/env python3
import argparse
import dataclasses
import os
import sys
from typing import NoReturn, Sequence

import numpy as np
import structlog
from dotenv import load_dotenv

from decorators import Decorators
from exit_codes import ExitCodes
from observability.app_logging import AppLogging
from observability.tracing import Tracing
from parallel.loop_on_thread import sweep_daemon
from tma_beamformer import DEFAULT_GRID_STEP, ArrayFactorMode, Beamformer
from tma_config import ArrayConfig, ConfigLoader, TmaConfig
from tma_delay import DelayControl
from tma_exception import VerificationFailureException
from tma_modseq import DEFAULT_I_MAX, OFF, ModulatingSequence
from tma_modulator import Modulator
from tma_output import RunOutput, snap
from tma_plot import Plotting
from tma_taper import Taper
from tma_validation import TmaValidation
from tma_verification import Verification

DEFAULT_OUTPUT_DIR = "out"

MODSIG_PANELS = ((1, 1), (4, 1), (2, 2), (1, 4))
"""(O_f, O_tau) of the default time-domain panels: no oversampling, then O=4 split three ways"""

BEAMPATTERN_O_TAU = (1, 2)


class TmaArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        # exit status 2 is reserved for verification failures
        self.print_usage(sys.stderr)
        self.exit(ExitCodes.VALIDATION_ERROR, f"{self.prog}: error: {message}\n")


class TmaSim:
    """Command-line front end writing each figure's data as deterministic CSV"""

    @staticmethod
    def _resolve(args: argparse.Namespace) -> tuple[TmaConfig, ArrayConfig, bool]:
        """CLI flag > JSON config > defaults; the flag says whether the TMA parameters were chosen explicitly"""
        path = args.config or os.environ.get("TMASIM_CONFIG")
        if path:
            cfg, acfg = ConfigLoader.load(path)
        else:
            cfg, acfg = TmaConfig(), ArrayConfig()

        tma_overrides = {name: getattr(args, name) for name in ("n_phases", "o_f", "o_tau", "sample_rate") if getattr(args, name, None) is not None}
        array_overrides = {name: getattr(args, name) for name in ("n_antennas", "spacing_wl", "carrier_freq") if getattr(args, name, None) is not None}
        cfg = dataclasses.replace(cfg, **tma_overrides).validate()
        acfg = dataclasses.replace(acfg, **array_overrides).validate()
        explicit = bool(path) or "o_f" in tma_overrides or "o_tau" in tma_overrides
        return cfg, acfg, explicit

    @staticmethod
    def _output(args: argparse.Namespace, config: dict, assumptions: dict | None = None) -> RunOutput:
        out_dir = args.out or os.environ.get("TMASIM_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR
        return RunOutput(out_dir, args.command, config, assumptions)

    @staticmethod
    def _modsig_rows(cfg: TmaConfig, delay: int, taper: int, samples_per_slot: int) -> list[list]:
        """N baseband samples worth of slots, the schedule repeated as often as it fits"""
        schedule = ModulatingSequence.build_schedule(cfg, delay, taper)
        span = cfg.n_phases * cfg.oversampling * samples_per_slot
        rows = []
        for n in range(span):
            slot = n // samples_per_slot
            state = schedule.slots[slot % schedule.period_slots]
            phase = 0.0 if state == OFF else ModulatingSequence.state_phase(cfg.n_phases, state)
            phasor = 0j if state == OFF else np.exp(1j * phase)
            rows.append([slot, n * cfg.slot_duration / samples_per_slot, state, phase, snap(phasor.real), snap(phasor.imag)])
        return rows

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_modsig(args: argparse.Namespace) -> int:
        cfg, acfg, explicit = TmaSim._resolve(args)
        samples_per_slot = TmaValidation.check_positive_int("samples_per_slot", args.samples_per_slot)
        configs = [cfg] if explicit else [dataclasses.replace(cfg, o_f=o_f, o_tau=o_tau) for o_f, o_tau in MODSIG_PANELS]

        output = TmaSim._output(args, {"panels": [ConfigLoader.to_dict(c) for c in configs], "delay": args.delay, "taper": args.taper, "samples_per_slot": samples_per_slot})
        for panel in configs:
            with structlog.contextvars.bound_contextvars(o_f=panel.o_f, o_tau=panel.o_tau):
                name = f"modsig_of{panel.o_f}_otau{panel.o_tau}.csv"
                rows = TmaSim._modsig_rows(panel, args.delay, args.taper, samples_per_slot)
                output.write_csv(name, ["slot_index", "time_s", "state_index", "phase_rad", "re", "im"], rows)
                if args.svg:
                    times = np.array([row[1] for row in rows])
                    plot = Plotting.line_plot(
                        output.svg_path(name),
                        times,
                        {"phase": np.array([row[3] for row in rows])},
                        "time [s]",
                        "phase [rad]",
                        f"Modulating signal, O_f={panel.o_f}, O_tau={panel.o_tau}",
                        step=True,
                    )
                    output.record(plot)
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_harmonics(args: argparse.Namespace) -> int:
        cfg, _, _ = TmaSim._resolve(args)
        i_max = TmaValidation.check_positive_int("i_max", args.i_max, minimum=0)
        n_max = TmaValidation.check_positive_int("n_max", args.n_max, minimum=2)
        n_list = [TmaValidation.check_positive_int("n_phases", n, minimum=2) for n in args.n_phases_list]

        output = TmaSim._output(args, {**ConfigLoader.to_dict(cfg), "n_phases_list": n_list, "n_max": n_max, "i_max": i_max})
        rows = []
        for n in n_list:
            spectrum = ModulatingSequence.spectrum(dataclasses.replace(cfg, n_phases=n), i_max)
            for i, entry in sorted(spectrum.entries.items()):
                rows.append([n, i, entry.freq, 1 / n + i, float(ModulatingSequence.harmonic_power_db(n, i))])
        output.write_csv("harmonic_power.csv", ["n_phases", "harmonic_index", "freq_hz", "freq_norm", "power_db"], rows)

        main_rows = [[n, i, float(ModulatingSequence.harmonic_power_db(n, i))] for n in range(2, n_max + 1) for i in (0, -1)]
        output.write_csv("main_harmonic_power.csv", ["n_phases", "harmonic_index", "power_db"], main_rows)

        if args.svg:
            per_n = {f"N={n}": np.array([r for r in rows if r[0] == n]) for n in n_list}
            output.record(
                Plotting.line_plot(
                    output.svg_path("harmonic_power.csv"),
                    {label: values[:, 3] for label, values in per_n.items()},
                    {label: values[:, 4] for label, values in per_n.items()},
                    "f / f_p",
                    "power [dB]",
                    "Power per harmonic",
                    markers=True,
                )
            )
            ns = np.arange(2, n_max + 1)
            output.record(
                Plotting.line_plot(
                    output.svg_path("main_harmonic_power.csv"),
                    ns,
                    {f"i={i}": np.array([r[2] for r in main_rows if r[1] == i]) for i in (0, -1)},
                    "N",
                    "power [dB]",
                    "Main and strongest undesired harmonic",
                    markers=True,
                )
            )
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_resolution(args: argparse.Namespace) -> int:
        n_list = [TmaValidation.check_positive_int("n_phases", n, minimum=2) for n in args.n_phases_list]
        o_tau_max = TmaValidation.check_positive_int("o_tau_max", args.o_tau_max)

        output = TmaSim._output(args, {"n_phases_list": n_list, "o_tau_max": o_tau_max})
        rows = [[o_tau, n, DelayControl.effective_bits(TmaConfig(n_phases=n, o_tau=o_tau))] for n in n_list for o_tau in range(1, o_tau_max + 1)]
        output.write_csv("resolution.csv", ["o_tau", "n_phases", "effective_bits"], rows)

        amplitude_rows = [[o_tau, len(Taper.amplitude_levels(o_tau)), Taper.amplitude_bits(o_tau)] for o_tau in range(1, o_tau_max + 1)]
        output.write_csv("taper_amplitude_bits.csv", ["o_tau", "amplitude_levels", "amplitude_bits"], amplitude_rows)

        if args.svg:
            o_taus = np.arange(1, o_tau_max + 1)
            output.record(
                Plotting.line_plot(
                    output.svg_path("resolution.csv"),
                    o_taus,
                    {f"N={n}": np.array([r[2] for r in rows if r[1] == n]) for n in n_list},
                    "O_tau",
                    "effective bits",
                    "Effective number of bits",
                    markers=True,
                )
            )
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_beampattern(args: argparse.Namespace) -> int:
        cfg, acfg, explicit = TmaSim._resolve(args)
        configs = [cfg] if explicit else [dataclasses.replace(cfg, o_tau=o_tau) for o_tau in BEAMPATTERN_O_TAU]
        harmonics = sorted(set(args.harmonics))
        assumptions = {"spacing_wl": acfg.spacing_wl, "spacing_wl_assumed": args.spacing_wl is None, "mode": args.mode}

        output = TmaSim._output(args, {"configs": [ConfigLoader.to_dict(c, acfg) for c in configs], "harmonics": harmonics, "grid_step": args.grid_step}, assumptions)
        for panel in configs:
            with structlog.contextvars.bound_contextvars(o_tau=panel.o_tau):
                delays = sorted(set(args.delays)) if args.delays is not None else list(range(panel.num_delays))
                patterns = sweep_daemon.ordered_map(
                    lambda d: Beamformer.beampattern_sweep(acfg, panel, d, harmonics, args.grid_step, args.tapers, args.element_delays, args.mode),
                    delays,
                )
                angles = patterns[0].angles
                columns = [(i, pattern) for i in harmonics for pattern in patterns]
                header = ["theta_deg"] + [f"i{i}_d{pattern.delay}_db" for i, pattern in columns]
                power = [pattern.power_db(i) for i, pattern in columns]
                rows = [[angle] + [float(p[row]) for p in power] for row, angle in enumerate(angles)]

                name = f"beampattern_otau{panel.o_tau}.csv"
                output.write_csv(name, header, rows, metadata=ConfigLoader.to_dict(panel, acfg))

                direction_rows = [
                    [i, pattern.delay, Beamformer.beam_direction(panel, acfg, i, pattern.delay), Beamformer.beam_direction(panel, acfg, i, pattern.delay, alias=True), pattern.peak_angle(i)]
                    for i, pattern in columns
                ]
                output.write_csv(f"beam_directions_otau{panel.o_tau}.csv", ["harmonic_index", "delay", "direction_deg", "aliased_direction_deg", "peak_deg"], direction_rows)

                if args.svg:
                    output.record(
                        Plotting.line_plot(
                            output.svg_path(name),
                            angles,
                            {f"i={i}, d={pattern.delay}": np.maximum(p, -40.0) for (i, pattern), p in zip(columns, power)},
                            "theta [deg]",
                            "|AF|^2 [dB]",
                            f"Beampattern, M={acfg.n_antennas}, N={panel.n_phases}, O_tau={panel.o_tau}",
                        )
                    )
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_tapering(args: argparse.Namespace) -> int:
        n_list = [TmaValidation.check_positive_int("n_phases", n, minimum=2) for n in args.n_phases_list]
        o_tau = TmaValidation.check_positive_int("o_tau", args.o_tau)
        i_max = TmaValidation.check_positive_int("i_max", args.i_max)
        assumptions = {"o_tau": o_tau, "taper_levels": list(range(1, o_tau)), "harmonics": f"0 < |i| <= {i_max}"}

        worst = sweep_daemon.ordered_map(lambda n: Taper.worst_case(n, o_tau, i_max), n_list)
        output = TmaSim._output(args, {"n_phases_list": n_list, "o_tau": o_tau, "i_max": i_max}, assumptions)
        output.write_csv("worst_case_gain.csv", ["n_phases", "worst_case_gain_db"], [[n, w.gain_db] for n, w in zip(n_list, worst)])

        gain_rows = [
            [n, level, i, Taper.harmonic_gain_db(n, i, o_tau, level)] for n in n_list for level in range(1, o_tau) for i in range(-i_max, i_max + 1) if i != 0
        ]
        output.write_csv("taper_harmonic_gain.csv", ["n_phases", "taper_level", "harmonic_index", "gain_db"], gain_rows)

        offset_rows = []
        for n in n_list:
            cfg = TmaConfig(n_phases=n, o_tau=o_tau)
            for level in range(1, o_tau):
                for i in (-1, 0, 1):
                    compensation = Taper.residual_phase_error(cfg, 1 + i * n, level)
                    offset_rows.append([n, level, i, compensation.phase_offset, compensation.delay, compensation.residual])
        output.write_csv("taper_phase_offsets.csv", ["n_phases", "taper_level", "harmonic_index", "phase_offset_rad", "best_delay", "residual_rad"], offset_rows)

        if args.svg:
            output.record(
                Plotting.line_plot(
                    output.svg_path("worst_case_gain.csv"),
                    np.array(n_list),
                    {f"O_tau={o_tau}": np.array([w.gain_db for w in worst])},
                    "N",
                    "worst-case gain [dB]",
                    "Worst-case undesired harmonic power increase",
                    markers=True,
                )
            )
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_spectrum(args: argparse.Namespace) -> int:
        cfg, _, _ = TmaSim._resolve(args)
        samples_per_slot = TmaValidation.check_positive_int("samples_per_slot", args.samples_per_slot, minimum=2)
        i_max = args.i_max if args.i_max is not None else Modulator.folding_i_max(cfg, samples_per_slot)

        baseband = Modulator.make_test_baseband(cfg, n_symbols=args.n_symbols, seed=args.seed, samples_per_slot=samples_per_slot)
        modulated = Modulator.modulate(baseband, cfg, args.delay, args.taper)
        predicted = Modulator.predict_replicas(cfg, args.delay, i_max)
        frequencies, psd = Modulator.measured_spectrum(modulated)

        output = TmaSim._output(
            args, {**ConfigLoader.to_dict(cfg), "delay": args.delay, "taper": args.taper, "samples_per_slot": samples_per_slot, "n_symbols": args.n_symbols, "seed": args.seed, "i_max": i_max}
        )
        output.write_csv("spectrum.csv", ["freq_hz", "psd_db"], zip(frequencies, psd))
        replicas = predicted.to_dict()
        if args.taper == 0:
            replicas["relative_residual"] = Modulator.verify_replicas(modulated, predicted, baseband)
        output.write_json("replicas.json", replicas)

        if args.svg:
            output.record(Plotting.line_plot(output.svg_path("spectrum.csv"), frequencies, {"measured": np.maximum(psd, -150.0)}, "f [Hz]", "PSD [dB]", "Modulated spectrum"))
        output.write_manifest()
        return ExitCodes.SUCCESS

    @staticmethod
    @Tracing.traced
    @Decorators.add_command_to_logging_context
    @TmaValidation.customize_exit_code_based_on_exception_type
    def cmd_verify(args: argparse.Namespace) -> int:
        report = Verification.run(inject_fault=args.inject_fault, workers=args.workers)
        output = TmaSim._output(args, {"inject_fault": args.inject_fault})
        output.write_csv(
            "verification.csv",
            ["check", "passed", "max_error", "tolerance", "cases", "detail"],
            [[c.name, c.passed, c.max_error, c.tolerance, c.cases, c.detail] for c in report.checks],
        )
        output.write_manifest()
        print(report.table())

        if not report.passed:
            raise VerificationFailureException(f"{len(report.failures())} verification check(s) failed: {', '.join(c.name for c in report.failures())}")
        return ExitCodes.SUCCESS

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="JSON configuration file, defaults to $TMASIM_CONFIG")
        common.add_argument("--out", help=f"output directory, defaults to $TMASIM_OUTPUT_DIR or '{DEFAULT_OUTPUT_DIR}'")
        common.add_argument("--svg", action="store_true", help="also write SVG line plots")

        tma = argparse.ArgumentParser(add_help=False)
        tma.add_argument("--n-phases", type=int, help="N, number of switch phase states")
        tma.add_argument("--o-f", type=int, help="pulse-frequency scaling factor")
        tma.add_argument("--o-tau", type=int, help="pulse-duration scaling factor")
        tma.add_argument("--sample-rate", type=float, help="baseband sample rate f_s in Hz")

        parser = TmaArgumentParser(prog="tmasim", description="Oversampled time-modulated array simulation")
        subparsers = parser.add_subparsers(dest="command", required=True)

        modsig = subparsers.add_parser("modsig", parents=[common, tma], help="time-domain modulating signal")
        modsig.add_argument("--delay", type=int, default=0, help="cyclic delay d in slots")
        modsig.add_argument("--taper", type=int, default=0, help="taper level l")
        modsig.add_argument("--samples-per-slot", type=int, default=1, help="K, samples per switch slot")
        modsig.set_defaults(func=TmaSim.cmd_modsig)

        harmonics = subparsers.add_parser("harmonics", parents=[common, tma], help="harmonic power per N")
        harmonics.add_argument("--n-phases-list", type=int, nargs="+", default=[2, 4, 8])
        harmonics.add_argument("--n-max", type=int, default=16, help="largest N of the main-harmonic sweep")
        harmonics.add_argument("--i-max", type=int, default=DEFAULT_I_MAX)
        harmonics.set_defaults(func=TmaSim.cmd_harmonics)

        resolution = subparsers.add_parser("resolution", parents=[common], help="effective number of bits")
        resolution.add_argument("--n-phases-list", type=int, nargs="+", default=[2, 4, 8])
        resolution.add_argument("--o-tau-max", type=int, default=16)
        resolution.set_defaults(func=TmaSim.cmd_resolution)

        beampattern = subparsers.add_parser("beampattern", parents=[common, tma], help="per-harmonic array factor")
        beampattern.add_argument("--n-antennas", type=int, help="M")
        beampattern.add_argument("--spacing-wl", type=float, help="element spacing in wavelengths, 0.5 when not given")
        beampattern.add_argument("--carrier-freq", type=float, help="f_c in Hz, needed by --mode exact")
        beampattern.add_argument("--delays", type=int, nargs="+", help="delays to sweep, all D by default")
        beampattern.add_argument("--harmonics", type=int, nargs="+", default=[0])
        beampattern.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP, help="degrees")
        beampattern.add_argument("--tapers", type=int, nargs="+", help="taper level per antenna")
        beampattern.add_argument("--element-delays", type=int, nargs="+", help="delay per antenna, replacing m*d")
        beampattern.add_argument("--mode", choices=[m.value for m in ArrayFactorMode], default=ArrayFactorMode.SIMPLIFIED.value)
        beampattern.set_defaults(func=TmaSim.cmd_beampattern)

        tapering = subparsers.add_parser("tapering", parents=[common], help="worst-case harmonic gain of tapering")
        tapering.add_argument("--n-phases-list", type=int, nargs="+", default=[2, 4, 8, 16, 32])
        tapering.add_argument("--o-tau", type=int, default=2)
        tapering.add_argument("--i-max", type=int, default=DEFAULT_I_MAX)
        tapering.set_defaults(func=TmaSim.cmd_tapering)

        spectrum = subparsers.add_parser("spectrum", parents=[common, tma], help="spectrum of a modulated test signal")
        spectrum.add_argument("--delay", type=int, default=0)
        spectrum.add_argument("--taper", type=int, default=0)
        spectrum.add_argument("--samples-per-slot", type=int, default=4)
        spectrum.add_argument("--n-symbols", type=int, default=16)
        spectrum.add_argument("--seed", type=int, default=0)
        spectrum.add_argument("--i-max", type=int, help="replicas to predict, enough to cover the simulated band by default")
        spectrum.set_defaults(func=TmaSim.cmd_spectrum)

        verify = subparsers.add_parser("verify", parents=[common], help="closed forms against brute force")
        verify.add_argument("--inject-fault", action="store_true", help="perturb one analytic coefficient to prove the checks bite")
        verify.add_argument("--workers", type=int, help="threads for the sweeps, defaults to $TMASIM_WORKERS")
        verify.set_defaults(func=TmaSim.cmd_verify)

        return parser

    @staticmethod
    def main(argv: Sequence[str] | None = None) -> int:
        args = TmaSim.build_parser().parse_args(argv)
        return args.func(args)


if __name__ == "__main__":
    load_dotenv()
    AppLogging.configure_logging()
    Tracing.configure_tracing()
    sys.exit(TmaSim.main())
