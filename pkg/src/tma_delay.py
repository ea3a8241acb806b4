import math
from dataclasses import dataclass

import numpy as np

from tma_config import TmaConfig
from tma_validation import TmaValidation


def wrap_phase(phase):
    """Wrap to (-pi, pi]"""
    return (np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), 2 * np.pi))[()]


@dataclass(frozen=True)
class DelaySetting:
    d: int
    num_delays: int

    def validate(self) -> "DelaySetting":
        TmaValidation.check_positive_int("num_delays", self.num_delays)
        TmaValidation.check_delay(self.d, self.num_delays)
        return self

    @staticmethod
    def for_config(cfg: TmaConfig, d: int) -> "DelaySetting":
        return DelaySetting(d, cfg.num_delays).validate()


class DelayControl:
    """Digital cyclic delays as per-harmonic phase shifters"""

    @staticmethod
    def num_delays(cfg: TmaConfig) -> int:
        """D = N * O_tau"""
        return cfg.validate().num_delays

    @staticmethod
    def delay_phase(cfg: TmaConfig, i: int, d: int, wrapped: bool = True) -> float:
        """phi(i, d) = -2 pi (d/D)(1 + N i)"""
        setting = DelaySetting.for_config(cfg, d)
        phase = -2 * np.pi * setting.d * (1 + cfg.n_phases * i) / setting.num_delays
        return float(wrap_phase(phase)) if wrapped else phase

    @staticmethod
    def continuous_delay_phase(cfg: TmaConfig, i: int, d: int) -> float:
        """-2 pi d T_sw f at the harmonic frequency f = f_p/N + i f_p, unwrapped"""
        DelaySetting.for_config(cfg, d)
        frequency = cfg.pulse_frequency / cfg.n_phases + i * cfg.pulse_frequency
        return -2 * np.pi * d * cfg.slot_duration * frequency

    @staticmethod
    def main_harmonic_phases(cfg: TmaConfig) -> np.ndarray:
        return np.array([DelayControl.delay_phase(cfg, 0, d) for d in range(DelayControl.num_delays(cfg))])

    @staticmethod
    def phase_resolution(cfg: TmaConfig) -> float:
        """2 pi / (N O_tau)"""
        return 2 * np.pi / DelayControl.num_delays(cfg)

    @staticmethod
    def conventional_bits(n_phases: int) -> float:
        """Q, the bits of a switched phase shifter without oversampling"""
        return math.log2(TmaValidation.check_positive_int("n_phases", n_phases, minimum=2))

    @staticmethod
    def effective_bits(cfg: TmaConfig) -> float:
        """log2(N O_tau), which is Q + log2(O_tau)"""
        return math.log2(DelayControl.num_delays(cfg))
