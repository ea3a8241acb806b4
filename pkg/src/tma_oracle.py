from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import structlog

from tma_exception import IndexOutOfRangeException
from tma_modseq import SwitchSchedule, sinc
from tma_validation import TmaValidation
from tma_waveform import SampledWaveform


@dataclass(frozen=True)
class OracleResult:
    """Fourier-series coefficients measured from one sampled period"""

    coefficients: dict[int, complex]
    """k -> coefficient at frequency k * resolution"""
    resolution: float
    """Frequency spacing of k, f_mod when the waveform is one schedule period"""
    samples_per_slot: int | None
    dft: np.ndarray
    """Normalized DFT bins 0..L-1 of the waveform"""
    zero_order_hold: bool

    def reconstruct(self) -> np.ndarray:
        """Inverse DFT, the sampled waveform again"""
        return np.fft.ifft(self.dft * len(self.dft))


class Oracle:
    """
    Brute-force ground truth. Nothing here uses the closed-form coefficients.

    A sampled waveform is piecewise constant over its samples, so the continuous-time Fourier-series coefficient at k is the
    length-normalized DFT bin times sinc(pi k/L) e^{-j pi k/L}. This holds for every k, including those beyond one DFT period.
    """

    @staticmethod
    def sample_schedule(schedule: SwitchSchedule, samples_per_slot: int) -> SampledWaveform:
        return SampledWaveform.from_schedule(schedule, samples_per_slot)

    @staticmethod
    def zero_order_hold_response(ks: np.ndarray, length: int) -> np.ndarray:
        x = np.pi * ks / length
        return sinc(x) * np.exp(-1j * x)

    @staticmethod
    def dft_coefficients(
        waveform: SampledWaveform,
        ks: Iterable[int] | None = None,
        zero_order_hold: bool = True,
        samples_per_slot: int | None = None,
    ) -> OracleResult:
        """
        Coefficients normalized so a constant waveform of value c yields c at k=0.
        Without zero_order_hold the plain DFT is returned, which only converges to the Fourier series as samples per slot grow.
        """
        length = TmaValidation.check_positive_int("length", len(waveform.samples))
        dft = np.fft.fft(waveform.samples) / length
        if ks is None:
            # one DFT period, centred on zero
            ks = range(-((length - 1) // 2), length // 2 + 1)
        ks = np.asarray(list(ks), dtype=int)

        values = dft[np.mod(ks, length)]
        if zero_order_hold:
            values = values * Oracle.zero_order_hold_response(ks, length)

        structlog.getLogger(Oracle.__name__).debug("DFT coefficients", length=length, coefficients=len(ks), zero_order_hold=zero_order_hold)
        return OracleResult(
            {int(k): complex(v) for k, v in zip(ks, values)},
            waveform.rate / length,
            samples_per_slot,
            dft,
            zero_order_hold,
        )

    @staticmethod
    def schedule_coefficients(schedule: SwitchSchedule, samples_per_slot: int = 1, ks: Iterable[int] | None = None) -> OracleResult:
        waveform = Oracle.sample_schedule(schedule, samples_per_slot)
        return Oracle.dft_coefficients(waveform, ks, samples_per_slot=samples_per_slot)

    @staticmethod
    def compare(analytic: Mapping[int, complex], oracle: OracleResult) -> float:
        """Largest |analytic(k) - oracle(k)| over the k both sides hold"""
        shared = sorted(set(analytic) & set(oracle.coefficients))
        if not shared:
            raise IndexOutOfRangeException("No harmonic index in common between analytic and oracle coefficients", invariant="common index range")
        return max(abs(complex(analytic[k]) - oracle.coefficients[k]) for k in shared)
