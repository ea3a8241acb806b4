import math
from dataclasses import dataclass

import numpy as np
import structlog
from scipy import signal

from decorators import Decorators
from tma_config import TmaConfig
from tma_delay import DelayControl
from tma_exception import RateMismatchException
from tma_modseq import DEFAULT_I_MAX, POWER_FLOOR, ModulatingSequence
from tma_oracle import Oracle
from tma_validation import TmaValidation
from tma_waveform import SampledWaveform


@dataclass(frozen=True)
class ReplicaEntry:
    center_freq: float
    weight: complex


@dataclass(frozen=True)
class ReplicaSpectrum:
    """Predicted harmonic replicas alpha(i) e^{j phi(i, d)} S(f - f_p/N - i f_p)"""

    entries: dict[int, ReplicaEntry]
    band: float
    """Baseband bandwidth B = f_s"""
    delay: int

    def zeroed(self) -> "ReplicaSpectrum":
        return ReplicaSpectrum({i: ReplicaEntry(e.center_freq, 0j) for i, e in self.entries.items()}, self.band, self.delay)

    def to_dict(self) -> dict:
        return {
            "band_hz": self.band,
            "delay": self.delay,
            "replicas": [
                {"harmonic": i, "center_freq_hz": e.center_freq, "weight_re": e.weight.real, "weight_im": e.weight.imag, "power_db": 10 * math.log10(max(abs(e.weight) ** 2, POWER_FLOOR))}
                for i, e in sorted(self.entries.items())
            ],
        }


class Modulator:
    """Time-domain modulation of a band-limited baseband by the switch schedule"""

    @staticmethod
    def analysis_window_slots(cfg: TmaConfig, n_symbols: int) -> int:
        """Whole numbers of symbol streams and schedule periods, so every spectral line falls on a DFT bin"""
        return math.lcm(n_symbols * cfg.oversampling, cfg.num_delays)

    @staticmethod
    def interpolate_symbols(cfg: TmaConfig, symbols: np.ndarray, samples_per_slot: int) -> SampledWaveform:
        """Periodic sinc interpolation of symbols at f_s up to K f_sw, normalized to unit mean power"""
        cfg.validate()
        samples_per_slot = TmaValidation.check_positive_int("samples_per_slot", samples_per_slot, minimum=2)
        symbols = np.asarray(symbols, dtype=complex)
        n_symbols = TmaValidation.check_positive_int("n_symbols", len(symbols))

        window_slots = Modulator.analysis_window_slots(cfg, n_symbols)
        repeated = np.tile(symbols, window_slots // (n_symbols * cfg.oversampling))
        samples = signal.resample(repeated, window_slots * samples_per_slot)
        power = np.mean(np.abs(samples) ** 2)
        if power > 0:
            samples = samples / np.sqrt(power)
        return SampledWaveform(samples, samples_per_slot * cfg.switch_rate)

    @staticmethod
    @Decorators.log_invocation_with_scalar_args
    def make_test_baseband(cfg: TmaConfig, n_symbols: int = 16, seed: int = 0, samples_per_slot: int = 4) -> SampledWaveform:
        """Seeded QPSK symbols band-limited to f_s"""
        n_symbols = TmaValidation.check_positive_int("n_symbols", n_symbols)
        rng = np.random.default_rng(seed)
        symbols = np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, size=n_symbols)))
        return Modulator.interpolate_symbols(cfg, symbols, samples_per_slot)

    @staticmethod
    def _samples_per_slot(waveform: SampledWaveform, cfg: TmaConfig) -> int:
        samples_per_slot = waveform.samples_per_slot(cfg.switch_rate)
        if samples_per_slot is None:
            raise RateMismatchException(f"Sample rate {waveform.rate} Hz is not an integer multiple of the switch rate {cfg.switch_rate} Hz", invariant="rate = K f_sw")
        return samples_per_slot

    @staticmethod
    @Decorators.log_invocation_with_scalar_args
    def modulate(baseband: SampledWaveform, cfg: TmaConfig, delay: int = 0, taper: int = 0) -> SampledWaveform:
        """y_d(t) = s(t) c(t - d T_sw), the schedule repeated over the whole baseband"""
        cfg.validate()
        samples_per_slot = Modulator._samples_per_slot(baseband, cfg)
        schedule = ModulatingSequence.build_schedule(cfg, delay, taper)
        control = Oracle.sample_schedule(schedule, samples_per_slot)
        return SampledWaveform(baseband.samples * np.resize(control.samples, len(baseband.samples)), baseband.rate)

    @staticmethod
    def predict_replicas(cfg: TmaConfig, delay: int = 0, i_max: int = DEFAULT_I_MAX) -> ReplicaSpectrum:
        spectrum = ModulatingSequence.spectrum(cfg, i_max)
        entries = {}
        for i, entry in spectrum.entries.items():
            # unwrapped phase, the weight is the same either way
            phase = DelayControl.delay_phase(cfg, i, delay, wrapped=False)
            entries[i] = ReplicaEntry(entry.freq, entry.coeff * np.exp(1j * phase))
        return ReplicaSpectrum(entries, cfg.sample_rate, delay)

    @staticmethod
    def folding_i_max(cfg: TmaConfig, samples_per_slot: int) -> int:
        """Smallest i_max whose replicas reach the edges of the simulated band +-K f_sw/2"""
        nyquist_harmonic = samples_per_slot * cfg.num_delays / 2
        return math.ceil((nyquist_harmonic + 1) / cfg.n_phases)

    @staticmethod
    def measured_spectrum(waveform: SampledWaveform) -> tuple[np.ndarray, np.ndarray]:
        """Ascending frequency grid and per-bin power in dB of the normalized DFT"""
        length = len(waveform.samples)
        frequencies = np.fft.fftshift(np.fft.fftfreq(length, 1 / waveform.rate))
        power = np.abs(np.fft.fftshift(np.fft.fft(waveform.samples) / length)) ** 2
        return frequencies, 10 * np.log10(np.maximum(power, POWER_FLOOR))

    @staticmethod
    def verify_replicas(modulated: SampledWaveform, predicted: ReplicaSpectrum, baseband: SampledWaveform) -> float:
        """
        Relative L2 error between the DFT of the modulated signal and the sum of weighted, shifted baseband DFTs.
        Weights are continuous-time Fourier coefficients, so each is divided by the zero-order-hold response of its line.
        Replicas beyond the simulated band are skipped: their power folds onto the in-band lines through that same division.
        """
        logger = structlog.getLogger(Modulator.__name__)
        if modulated.rate != baseband.rate or len(modulated.samples) != len(baseband.samples):
            raise RateMismatchException("Modulated and baseband waveforms must share rate and length", invariant="same rate and length")

        length = len(baseband.samples)
        measured = np.fft.fft(modulated.samples)
        source = np.fft.fft(baseband.samples)
        expected = np.zeros(length, dtype=complex)

        for i, entry in sorted(predicted.entries.items()):
            shift_bins = entry.center_freq * baseband.duration
            shift = round(shift_bins)
            if abs(shift_bins - shift) > 1e-6:
                raise RateMismatchException(f"Replica {i} at {entry.center_freq} Hz does not fall on a DFT bin", invariant="integer number of schedule periods")
            if not -length / 2 < shift <= length / 2:
                logger.debug("Replica beyond the simulated band", harmonic=i, center_freq=entry.center_freq)
                continue
            hold = Oracle.zero_order_hold_response(np.array([shift]), length)[0]
            expected += entry.weight / hold * np.roll(source, shift)

        norm = np.linalg.norm(measured)
        residual = np.linalg.norm(measured - expected)
        if norm == 0:
            return 0.0 if residual == 0 else math.inf
        return float(residual / norm)
