import math
from dataclasses import dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

from typing import Sequence

import numpy as np
import structlog

from decorators import Decorators
from observability.tracing import Tracing
from tma_config import ArrayConfig, TmaConfig
from tma_delay import wrap_phase
from tma_exception import InvalidConfigException, InvalidGridException
from tma_modseq import POWER_FLOOR
from tma_taper import Taper
from tma_validation import TmaValidation

DEFAULT_GRID_STEP = 0.1


class ArrayFactorMode(StrEnum):
    EXACT = "exact"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class BeamPattern:
    """Complex array factor per harmonic over a linear degree grid"""

    angles: np.ndarray
    values: dict[int, np.ndarray]
    delay: int
    cfg: TmaConfig
    acfg: ArrayConfig
    element_delays: tuple[int, ...]
    tapers: tuple[int, ...] = field(default=())

    def magnitude(self, i: int) -> np.ndarray:
        return np.abs(self.values[i])

    def power_db(self, i: int) -> np.ndarray:
        return 10 * np.log10(np.maximum(self.magnitude(i) ** 2, POWER_FLOOR))

    def peak_angle(self, i: int) -> float:
        return float(self.angles[int(np.argmax(self.magnitude(i)))])

    def sidelobe_level_db(self, i: int) -> float:
        """Highest lobe outside the main lobe, relative to the peak; the main lobe ends at the first local minimum either side"""
        magnitude = self.magnitude(i)
        peak = int(np.argmax(magnitude))

        right = peak
        while right + 1 < len(magnitude) and magnitude[right + 1] <= magnitude[right]:
            right += 1
        left = peak
        while left > 0 and magnitude[left - 1] <= magnitude[left]:
            left -= 1

        outside = np.concatenate([magnitude[:left], magnitude[right + 1 :]])
        if len(outside) == 0:
            return -math.inf
        return float(20 * np.log10(np.max(outside) / magnitude[peak]))


class Beamformer:
    """Per-harmonic array factor of a uniform linear TMA steered by progressive cyclic delays"""

    @staticmethod
    def antenna_phase(cfg: TmaConfig, m: int, i: int, d: int, n_antennas: int | None = None) -> float:
        """phi_m(i, d) = -2 pi m d (1/D + i/O_tau), wrapped"""
        cfg.validate()
        if n_antennas is None:
            TmaValidation.check_positive_int("m", m, minimum=0)
        else:
            TmaValidation.check_index("m", m, n_antennas)
        TmaValidation.check_delay(d, cfg.num_delays)
        # 1/D + i/O_tau = (1 + N i)/D, reduced exactly in integers
        cycles = (m * d * (1 + cfg.n_phases * i)) % cfg.num_delays
        return float(wrap_phase(-2 * np.pi * cycles / cfg.num_delays))

    @staticmethod
    def element_coefficients(cfg: TmaConfig, i: int, tapers: Sequence[int]) -> np.ndarray:
        """The harmonic-i coefficient each antenna radiates with, tapered per antenna"""
        k = 1 + i * cfg.n_phases
        return np.array([complex(Taper.tapered_coefficient(cfg.n_phases, k, cfg.o_tau, level)) for level in tapers])

    @staticmethod
    def _array_factor(
        acfg: ArrayConfig,
        cfg: TmaConfig,
        theta_deg: np.ndarray,
        i: int,
        element_delays: Sequence[int],
        coefficients: np.ndarray,
        mode: ArrayFactorMode,
    ) -> np.ndarray:
        m = np.arange(acfg.n_antennas)
        # progressive phase from the cyclic delays, reduced mod D
        cycles = np.mod(np.asarray(element_delays) * (1 + cfg.n_phases * i), cfg.num_delays) / cfg.num_delays
        sin_theta = np.sin(np.radians(np.atleast_1d(theta_deg)))

        if mode == ArrayFactorMode.EXACT:
            harmonic_freq = cfg.pulse_frequency / cfg.n_phases + i * cfg.pulse_frequency
            frequency_ratio = (acfg.require_carrier() + harmonic_freq) / acfg.require_carrier()
        else:
            frequency_ratio = 1.0

        propagation = np.outer(sin_theta, m) * acfg.spacing_wl * frequency_ratio
        terms = coefficients[np.newaxis, :] * np.exp(-2j * np.pi * (cycles[np.newaxis, :] + propagation))
        return terms.sum(axis=1) / np.sqrt(acfg.n_antennas)

    @staticmethod
    def _element_delays(cfg: TmaConfig, acfg: ArrayConfig, d: int, delays: Sequence[int] | None) -> tuple[int, ...]:
        if delays is None:
            return tuple((m * d) % cfg.num_delays for m in range(acfg.n_antennas))
        if len(delays) != acfg.n_antennas:
            raise InvalidConfigException(f"Expected {acfg.n_antennas} per-antenna delays, got {len(delays)}", invariant="one delay per antenna")
        return tuple(TmaValidation.check_delay(delay, cfg.num_delays) for delay in delays)

    @staticmethod
    def _tapers(cfg: TmaConfig, acfg: ArrayConfig, tapers: Sequence[int] | None) -> tuple[int, ...]:
        if tapers is None:
            return (0,) * acfg.n_antennas
        if len(tapers) != acfg.n_antennas:
            raise InvalidConfigException(f"Expected {acfg.n_antennas} per-antenna taper levels, got {len(tapers)}", invariant="one taper level per antenna")
        return tuple(TmaValidation.check_taper(level, cfg.o_tau) for level in tapers)

    @staticmethod
    def array_factor(
        acfg: ArrayConfig,
        cfg: TmaConfig,
        theta_deg,
        i: int,
        d: int,
        mode: ArrayFactorMode | str = ArrayFactorMode.SIMPLIFIED,
    ):
        """
        AF(theta, i, d) of the progressively delayed array.
        The simplified form drops the harmonic frequency offset from the propagation term, valid while (1/N + i) f_p << f_c.
        """
        cfg.validate()
        acfg.validate()
        TmaValidation.check_delay(d, cfg.num_delays)
        mode = ArrayFactorMode(mode)
        element_delays = Beamformer._element_delays(cfg, acfg, d, None)
        coefficients = Beamformer.element_coefficients(cfg, i, Beamformer._tapers(cfg, acfg, None))
        values = Beamformer._array_factor(acfg, cfg, np.asarray(theta_deg, dtype=float), i, element_delays, coefficients, mode)
        return values[0] if np.ndim(theta_deg) == 0 else values

    @staticmethod
    def beam_direction(cfg: TmaConfig, acfg: ArrayConfig, i: int, d: int, alias: bool = False) -> float | None:
        """
        -arcsin(d (1 + iN) / (D d_lambda)) in degrees, None in the invisible region.
        With alias the progressive phase is first wrapped to half a cycle either side, giving the beam that actually forms.
        """
        cfg.validate()
        acfg.validate()
        TmaValidation.check_delay(d, cfg.num_delays)
        cycles = d * (1 + i * cfg.n_phases) / cfg.num_delays
        if alias:
            cycles = 0.5 - (0.5 - cycles) % 1.0
        argument = cycles / acfg.spacing_wl
        if abs(argument) > 1:
            return None
        return -math.degrees(math.asin(argument))

    @staticmethod
    def angle_grid(grid_step: float = DEFAULT_GRID_STEP) -> np.ndarray:
        """Linear degree grid over [-90, 90], symmetric about broadside"""
        if isinstance(grid_step, bool) or not isinstance(grid_step, (int, float)) or not math.isfinite(grid_step) or grid_step <= 0:
            raise InvalidGridException(f"Grid step must be positive, got {grid_step!r}", invariant="grid_step > 0")
        intervals = 180 / grid_step
        if abs(intervals - round(intervals)) > 1e-9 * intervals:
            raise InvalidGridException(f"Grid step {grid_step} does not divide 180 degrees", invariant="180 / grid_step is an integer")
        return np.linspace(-90.0, 90.0, round(intervals) + 1)

    @staticmethod
    @Tracing.traced
    @Decorators.log_invocation_with_scalar_args
    def beampattern_sweep(
        acfg: ArrayConfig,
        cfg: TmaConfig,
        d: int = 0,
        harmonics: Sequence[int] = (0,),
        grid_step: float = DEFAULT_GRID_STEP,
        tapers: Sequence[int] | None = None,
        delays: Sequence[int] | None = None,
        mode: ArrayFactorMode | str = ArrayFactorMode.SIMPLIFIED,
    ) -> BeamPattern:
        """
        Evaluates AF on the grid for each harmonic.
        Per-antenna taper levels replace alpha(i) with each antenna's tapered coefficient, phase included.
        Per-antenna delays replace the progressive m*d.
        """
        cfg.validate()
        acfg.validate()
        TmaValidation.check_delay(d, cfg.num_delays)
        mode = ArrayFactorMode(mode)
        angles = Beamformer.angle_grid(grid_step)
        element_delays = Beamformer._element_delays(cfg, acfg, d, delays)
        levels = Beamformer._tapers(cfg, acfg, tapers)

        with structlog.contextvars.bound_contextvars(delay=d, mode=str(mode)):
            structlog.getLogger(Beamformer.__name__).debug("Sweeping beampattern", harmonics=list(harmonics), points=len(angles))
            values = {
                int(i): Beamformer._array_factor(acfg, cfg, angles, int(i), element_delays, Beamformer.element_coefficients(cfg, int(i), levels), mode)
                for i in harmonics
            }
        return BeamPattern(angles, values, d, cfg, acfg, element_delays, levels)

    @staticmethod
    def steering_directions(cfg: TmaConfig, acfg: ArrayConfig, grid_step: float = DEFAULT_GRID_STEP) -> list[float]:
        """Distinct main-harmonic peak angles over every delay"""
        peaks = {Beamformer.beampattern_sweep(acfg, cfg, d, (0,), grid_step).peak_angle(0) for d in range(cfg.num_delays)}
        return sorted(peaks)
