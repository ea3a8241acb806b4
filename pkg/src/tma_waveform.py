from dataclasses import dataclass

import numpy as np

from tma_modseq import OFF, SwitchSchedule
from tma_validation import TmaValidation


@dataclass(frozen=True)
class SampledWaveform:
    """Complex samples at a uniform rate; sample n stands for the interval [n/rate, (n+1)/rate)"""

    samples: np.ndarray
    rate: float

    @property
    def duration(self) -> float:
        return len(self.samples) / self.rate

    def __len__(self) -> int:
        return len(self.samples)

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def samples_per_slot(self, switch_rate: float) -> int | None:
        """K when rate is an integer multiple of the switch rate, otherwise None"""
        ratio = self.rate / switch_rate
        k = round(ratio)
        if k >= 1 and abs(ratio - k) <= 1e-9 * ratio:
            return k
        return None

    @staticmethod
    def from_schedule(schedule: SwitchSchedule, samples_per_slot: int) -> "SampledWaveform":
        """Piecewise-constant realization: each slot is samples_per_slot copies of e^{j phi(n)}, or 0 when OFF"""
        k = TmaValidation.check_positive_int("samples_per_slot", samples_per_slot)
        states = np.asarray(schedule.slots)
        phasors = np.where(states == OFF, 0.0, np.exp(2j * np.pi * np.maximum(states, 0) / schedule.n_phases))
        return SampledWaveform(np.repeat(phasors, k), k / schedule.slot_duration)
