import math
from dataclasses import dataclass

import numpy as np
import structlog

from tma_config import TmaConfig
from tma_delay import wrap_phase
from tma_exception import NoTaperLevelsException
from tma_modseq import DEFAULT_I_MAX, ModulatingSequence
from tma_validation import TmaValidation


@dataclass(frozen=True)
class TaperSetting:
    """l OFF slots in every pulse of O_tau slots"""

    level: int
    o_tau: int

    def validate(self) -> "TaperSetting":
        TmaValidation.check_positive_int("o_tau", self.o_tau)
        TmaValidation.check_taper(self.level, self.o_tau)
        return self

    @property
    def eta(self) -> float:
        return (self.o_tau - self.level) / self.o_tau


@dataclass(frozen=True)
class WorstCaseGain:
    gain_db: float
    harmonic: int
    level: int


@dataclass(frozen=True)
class TaperCompensation:
    """Best quantized delay for absorbing a taper phase offset and what it leaves behind"""

    phase_offset: float
    delay: int
    residual: float


class Taper:
    """Zero-insertion amplitude tapering of the oversampled pulse"""

    @staticmethod
    def eta(o_tau: int, level: int) -> float:
        """(O_tau - l) / O_tau"""
        return TaperSetting(level, o_tau).validate().eta

    @staticmethod
    def amplitude_levels(o_tau: int) -> list[float]:
        """O_tau + 1 amplitudes uniformly spread over [0, 1]"""
        o_tau = TmaValidation.check_positive_int("o_tau", o_tau)
        return [active / o_tau for active in range(o_tau + 1)]

    @staticmethod
    def amplitude_bits(o_tau: int) -> float:
        return math.log2(len(Taper.amplitude_levels(o_tau)))

    @staticmethod
    def tapered_coefficient(n_phases: int, k, o_tau: int, level: int):
        return ModulatingSequence.shortened_sequence_coefficient(n_phases, k, Taper.eta(o_tau, level))

    @staticmethod
    def taper_phase_offset(n_phases: int, k, o_tau: int, level: int):
        """Phase of the tapered coefficient minus the untapered one, -pi (k/N)(eta - 1)"""
        return (-np.pi * np.asarray(k) / n_phases * (Taper.eta(o_tau, level) - 1))[()]

    @staticmethod
    def residual_phase_error(cfg: TmaConfig, k: int, level: int) -> TaperCompensation:
        """
        The delay whose phase shift on harmonic k best cancels the taper phase offset.
        Offsets are generally not multiples of 2 pi/D so a residual is left over.
        """
        cfg.validate()
        offset = float(Taper.taper_phase_offset(cfg.n_phases, k, cfg.o_tau, level))
        delays = np.arange(cfg.num_delays)
        # a delay of d slots turns harmonic k by -2 pi d k / D
        residuals = wrap_phase(offset - 2 * np.pi * delays * k / cfg.num_delays)
        # delays d and 1 - d leave residuals of equal size and opposite sign; rounding settles the tie on the smaller delay
        best = int(np.argmin(np.round(np.abs(residuals), 12)))
        return TaperCompensation(offset, best, float(residuals[best]))

    @staticmethod
    def harmonic_gain_db(n_phases: int, i: int, o_tau: int, level: int) -> float:
        """Power of harmonic i with taper level l relative to the untapered sequence"""
        k = 1 + i * n_phases
        tapered = abs(Taper.tapered_coefficient(n_phases, k, o_tau, level)) ** 2
        untapered = abs(ModulatingSequence.sequence_coefficient(n_phases, k)) ** 2
        return float(10 * np.log10(tapered / untapered))

    @staticmethod
    def worst_case(n_phases: int, o_tau: int, i_max: int = DEFAULT_I_MAX) -> WorstCaseGain:
        """Largest undesired-harmonic (i != 0) power increase over the radiating taper levels 1..O_tau-1"""
        TmaValidation.check_positive_int("n_phases", n_phases, minimum=2)
        o_tau = TmaValidation.check_positive_int("o_tau", o_tau)
        if o_tau < 2:
            raise NoTaperLevelsException(f"O_tau={o_tau} has no taper level between fully on and fully off", invariant="O_tau >= 2")
        i_max = TmaValidation.check_positive_int("i_max", i_max)

        worst: WorstCaseGain | None = None
        for level in range(1, o_tau):
            for i in range(-i_max, i_max + 1):
                if i == 0:
                    continue
                gain = Taper.harmonic_gain_db(n_phases, i, o_tau, level)
                if worst is None or gain > worst.gain_db:
                    worst = WorstCaseGain(gain, i, level)

        assert worst is not None
        structlog.getLogger(Taper.__name__).debug("Worst-case harmonic gain", n_phases=n_phases, o_tau=o_tau, gain_db=worst.gain_db, harmonic=worst.harmonic, level=worst.level)
        return worst

    @staticmethod
    def worst_case_harmonic_gain_db(n_phases: int, o_tau: int, i_max: int = DEFAULT_I_MAX) -> float:
        return Taper.worst_case(n_phases, o_tau, i_max).gain_db
