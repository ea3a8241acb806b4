import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import structlog
from scipy.constants import speed_of_light

from tma_exception import InvalidConfigException, PhaseCountTooSmallException, TmaException
from tma_validation import TmaValidation


@dataclass(frozen=True)
class TmaConfig:
    """
    Parameterization of a time-modulated array switch.
    All timing quantities are derived from these four values; frequencies are in Hz, and sample_rate=1 gives normalized units.
    """

    n_phases: int = 4
    """N, the number of switch phase states"""
    o_f: int = 1
    """Pulse-frequency scaling factor"""
    o_tau: int = 1
    """Pulse-duration scaling factor"""
    sample_rate: float = 1.0
    """Baseband sample rate f_s"""

    def validate(self) -> "TmaConfig":
        if TmaValidation.is_integer(self.n_phases) and self.n_phases < 2:
            raise PhaseCountTooSmallException(f"n_phases must be at least 2, got {self.n_phases}", invariant="n_phases >= 2")
        TmaValidation.check_positive_int("n_phases", self.n_phases, minimum=2)
        TmaValidation.check_positive_int("o_f", self.o_f)
        TmaValidation.check_positive_int("o_tau", self.o_tau)
        TmaValidation.check_positive_real("sample_rate", self.sample_rate)
        return self

    @property
    def oversampling(self) -> int:
        """O = O_f * O_tau"""
        return self.o_f * self.o_tau

    @property
    def switch_rate(self) -> float:
        """f_sw = O * f_s"""
        return self.oversampling * self.sample_rate

    @property
    def slot_duration(self) -> float:
        """T_sw"""
        return 1.0 / self.switch_rate

    @property
    def pulse_frequency(self) -> float:
        """f_p = O_f * f_s"""
        return self.o_f * self.sample_rate

    @property
    def pulse_duration(self) -> float:
        """T_p = O_tau * T_sw, kept as the reciprocal of f_p"""
        return 1.0 / self.pulse_frequency

    @property
    def modulating_frequency(self) -> float:
        """f_mod = f_p / N, the offset of the main harmonic"""
        return self.pulse_frequency / self.n_phases

    @property
    def num_delays(self) -> int:
        """D = N * O_tau, also the number of slots in one schedule period"""
        return self.n_phases * self.o_tau

    @property
    def period(self) -> float:
        """N * T_p"""
        return self.n_phases * self.pulse_duration

    def derived(self) -> dict[str, float | int]:
        return {
            "oversampling": self.oversampling,
            "switch_rate": self.switch_rate,
            "slot_duration": self.slot_duration,
            "pulse_duration": self.pulse_duration,
            "pulse_frequency": self.pulse_frequency,
            "modulating_frequency": self.modulating_frequency,
            "num_delays": self.num_delays,
        }


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array of isotropic elements"""

    n_antennas: int = 8
    """M"""
    spacing_wl: float = 0.5
    """d_lambda, element spacing in wavelengths"""
    carrier_freq: float | None = None
    """f_c, only needed for the exact array factor"""

    def validate(self) -> "ArrayConfig":
        TmaValidation.check_positive_int("n_antennas", self.n_antennas)
        TmaValidation.check_positive_real("spacing_wl", self.spacing_wl)
        if self.carrier_freq is not None:
            TmaValidation.check_positive_real("carrier_freq", self.carrier_freq)
        return self

    def require_carrier(self) -> float:
        if self.carrier_freq is None:
            raise InvalidConfigException("carrier_freq must be set for this calculation", invariant="carrier_freq > 0")
        return self.carrier_freq

    @property
    def element_spacing(self) -> float:
        """d_a in metres"""
        return self.spacing_wl * speed_of_light / self.require_carrier()

    def path_difference(self, m: int, theta_deg: float) -> float:
        """Extra path of element m relative to element 0 towards theta, in metres"""
        return m * self.element_spacing * math.sin(math.radians(theta_deg))


class ConfigLoader:
    """Reads and echoes the JSON configuration file"""

    ARRAY_KEY = "array"

    @staticmethod
    def _build(cls, values: dict[str, Any], where: str):
        logger = structlog.getLogger(ConfigLoader.__name__)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            logger.warning("Ignoring unknown configuration keys", section=where, keys=unknown)
        try:
            return cls(**{k: v for k, v in values.items() if k in known}).validate()
        except TmaException:
            raise
        except TypeError as type_error:
            raise InvalidConfigException(f"Invalid '{where}' section: {type_error}")

    @staticmethod
    def from_dict(values: dict[str, Any]) -> tuple[TmaConfig, ArrayConfig]:
        if not isinstance(values, dict):
            raise InvalidConfigException("Configuration must be a JSON object")
        tma_values = {k: v for k, v in values.items() if k != ConfigLoader.ARRAY_KEY}
        array_values = values.get(ConfigLoader.ARRAY_KEY, {})
        if not isinstance(array_values, dict):
            raise InvalidConfigException("'array' must be a JSON object")
        return ConfigLoader._build(TmaConfig, tma_values, "root"), ConfigLoader._build(ArrayConfig, array_values, ConfigLoader.ARRAY_KEY)

    @staticmethod
    def load(path: Path | str) -> tuple[TmaConfig, ArrayConfig]:
        path = Path(path)
        with structlog.contextvars.bound_contextvars(config_path=str(path)):
            structlog.getLogger(ConfigLoader.__name__).info("Loading configuration")
            try:
                values = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as decode_error:
                raise InvalidConfigException(f"Configuration {path} is not valid JSON: {decode_error}")
            except OSError as os_error:
                raise InvalidConfigException(f"Unable to read configuration {path}: {os_error}")
            return ConfigLoader.from_dict(values)

    @staticmethod
    def to_dict(cfg: TmaConfig, acfg: ArrayConfig | None = None) -> dict[str, Any]:
        """The resolved configuration, derived quantities included"""
        result: dict[str, Any] = {
            "n_phases": cfg.n_phases,
            "o_f": cfg.o_f,
            "o_tau": cfg.o_tau,
            "sample_rate": cfg.sample_rate,
            "derived": cfg.derived(),
        }
        if acfg is not None:
            result[ConfigLoader.ARRAY_KEY] = {
                "n_antennas": acfg.n_antennas,
                "spacing_wl": acfg.spacing_wl,
                "carrier_freq": acfg.carrier_freq,
            }
        return result
