from dataclasses import dataclass
from typing import Iterable

import numpy as np
import structlog

from decorators import Decorators
from tma_config import TmaConfig
from tma_validation import TmaValidation

OFF = -1
"""Slot state of a switch in its off position"""

DEFAULT_I_MAX = 8

POWER_FLOOR = 1e-30
"""Smallest power converted to dB; exact nulls print as -300 dB"""


def sinc(x):
    """Unnormalized sinc, sin(x)/x with sinc(0) = 1"""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


@dataclass(frozen=True)
class SwitchSchedule:
    """One period of per-slot switch states; the time-domain ground truth of the modulating signal"""

    slots: tuple[int, ...]
    slot_duration: float
    n_phases: int
    o_tau: int
    delay: int = 0
    taper: int = 0

    @property
    def period_slots(self) -> int:
        return len(self.slots)

    def active_slots(self) -> int:
        return sum(1 for state in self.slots if state != OFF)

    def duty_cycle(self) -> float:
        """eta(l), the fraction of the period the switch radiates"""
        return self.active_slots() / self.period_slots


@dataclass(frozen=True)
class HarmonicEntry:
    freq: float
    coeff: complex


@dataclass(frozen=True)
class HarmonicSpectrum:
    """alpha(i) at f_p/N + i*f_p for |i| <= i_max"""

    entries: dict[int, HarmonicEntry]
    i_max: int
    n_phases: int

    def total_power(self) -> float:
        return float(sum(abs(entry.coeff) ** 2 for entry in self.entries.values()))

    def sequence_coefficients(self) -> dict[int, complex]:
        """The same coefficients keyed by sequence harmonic k = 1 + iN"""
        return {1 + i * self.n_phases: entry.coeff for i, entry in self.entries.items()}


class ModulatingSequence:
    """Synthesis of the periodic switch schedule and its closed-form Fourier coefficients"""

    @staticmethod
    def state_phase(n_phases: int, n: int) -> float:
        """phi(n) = 2 pi n / N"""
        TmaValidation.check_index("n", n, n_phases)
        return 2 * np.pi * n / n_phases

    @staticmethod
    @Decorators.log_invocation_with_scalar_args
    def build_schedule(cfg: TmaConfig, delay: int = 0, taper: int = 0) -> SwitchSchedule:
        """States 0..N-1 each held for O_tau slots, the last `taper` slots of every pulse switched off, then cyclically right-shifted by `delay` slots"""
        cfg.validate()
        delay = TmaValidation.check_delay(delay, cfg.num_delays)
        taper = TmaValidation.check_taper(taper, cfg.o_tau)

        pulse = np.arange(cfg.o_tau)
        states = np.repeat(np.arange(cfg.n_phases), cfg.o_tau)
        states = np.where(np.tile(pulse, cfg.n_phases) >= cfg.o_tau - taper, OFF, states)
        shifted = np.roll(states, delay)
        return SwitchSchedule(tuple(int(s) for s in shifted), cfg.slot_duration, cfg.n_phases, cfg.o_tau, delay, taper)

    @staticmethod
    def pulse_coefficient(n_phases: int, n: int, k):
        """G_n(k) = e^{j phi(n)} sinc(pi k/N) e^{-j pi k/N}"""
        x = np.pi * np.asarray(k) / n_phases
        return (np.exp(1j * ModulatingSequence.state_phase(n_phases, n)) * sinc(x) * np.exp(-1j * x))[()]

    @staticmethod
    def existence_indicator(n_phases: int, k):
        """I(k): 1 where k = 1 + iN, otherwise 0"""
        return (np.mod(np.asarray(k), n_phases) == 1 % n_phases).astype(int)[()]

    @staticmethod
    def shortened_sequence_coefficient(n_phases: int, k, eta: float):
        """eta sinc(pi k eta/N) e^{-j pi k eta/N} I(k); eta = 1 is the untapered sequence"""
        x = np.pi * np.asarray(k) * eta / n_phases
        return (eta * sinc(x) * np.exp(-1j * x) * ModulatingSequence.existence_indicator(n_phases, k))[()]

    @staticmethod
    def sequence_coefficient(n_phases: int, k):
        """C(k), the coefficient at frequency k * f_mod"""
        return ModulatingSequence.shortened_sequence_coefficient(n_phases, k, 1.0)

    @staticmethod
    def harmonic_alpha(n_phases: int, i):
        """alpha(i) = sinc(pi(i + 1/N)) e^{-j pi(i + 1/N)}, which is C(1 + iN)"""
        return ModulatingSequence.sequence_coefficient(n_phases, 1 + np.asarray(i) * n_phases)

    @staticmethod
    def harmonic_power_db(n_phases: int, i):
        return (10 * np.log10(np.abs(sinc(np.pi * (1 / n_phases + np.asarray(i)))) ** 2))[()]

    @staticmethod
    def schedule_coefficients(cfg: TmaConfig, delay: int, taper: int, ks: Iterable[int]) -> dict[int, complex]:
        """Closed-form coefficients of the schedule built with (delay, taper)"""
        ks = np.asarray(list(ks))
        eta = (cfg.o_tau - taper) / cfg.o_tau
        coefficients = ModulatingSequence.shortened_sequence_coefficient(cfg.n_phases, ks, eta) * np.exp(-2j * np.pi * ks * delay / cfg.num_delays)
        return {int(k): complex(c) for k, c in zip(ks, np.atleast_1d(coefficients))}

    @staticmethod
    def spectrum(cfg: TmaConfig, i_max: int = DEFAULT_I_MAX) -> HarmonicSpectrum:
        cfg.validate()
        i_max = TmaValidation.check_positive_int("i_max", i_max, minimum=0)
        indices = np.arange(-i_max, i_max + 1)
        coefficients = ModulatingSequence.harmonic_alpha(cfg.n_phases, indices)
        frequencies = cfg.pulse_frequency / cfg.n_phases + indices * cfg.pulse_frequency
        structlog.getLogger(ModulatingSequence.__name__).debug("Spectrum", n_phases=cfg.n_phases, i_max=i_max)
        return HarmonicSpectrum(
            {int(i): HarmonicEntry(float(f), complex(c)) for i, f, c in zip(indices, frequencies, np.atleast_1d(coefficients))},
            i_max,
            cfg.n_phases,
        )
