import numpy as np
import pytest

from tma_config import TmaConfig
from tma_exception import NonPositiveParameterException, RateMismatchException
from tma_modseq import ModulatingSequence, sinc
from tma_modulator import Modulator
from tma_waveform import SampledWaveform

REPLICA_CONFIGS = [TmaConfig(n_phases=4, o_f=2), TmaConfig(n_phases=4, o_tau=2), TmaConfig(n_phases=2, o_f=2, o_tau=2), TmaConfig(n_phases=8, o_f=2)]


def test_test_baseband_is_seeded_and_normalized(default_config):
    first = Modulator.make_test_baseband(default_config, seed=7)
    second = Modulator.make_test_baseband(default_config, seed=7)

    assert np.array_equal(first.samples, second.samples)
    assert first.mean_power() == pytest.approx(1.0, abs=1e-12)
    assert first.rate == 4 * default_config.switch_rate


def test_test_baseband_is_band_limited():
    cfg = TmaConfig(n_phases=4, o_f=2)
    baseband = Modulator.make_test_baseband(cfg)
    frequencies, power_db = Modulator.measured_spectrum(baseband)

    assert np.all(power_db[np.abs(frequencies) > cfg.sample_rate / 2] < -200)


def test_interpolation_needs_two_samples_per_slot(default_config):
    with pytest.raises(NonPositiveParameterException):
        Modulator.interpolate_symbols(default_config, np.ones(4), 1)


def test_untapered_modulation_preserves_power(grid_config):
    baseband = Modulator.make_test_baseband(grid_config)
    for delay in range(grid_config.num_delays):
        assert Modulator.modulate(baseband, grid_config, delay).mean_power() == pytest.approx(baseband.mean_power(), abs=1e-12)


def test_tapered_modulation_of_constant_envelope_scales_power_by_duty_cycle():
    cfg = TmaConfig(n_phases=4, o_tau=4)
    dc = Modulator.interpolate_symbols(cfg, np.ones(4), 2)

    assert np.allclose(dc.samples, 1.0, atol=1e-12)
    for taper in range(cfg.o_tau + 1):
        assert Modulator.modulate(dc, cfg, 1, taper).mean_power() == pytest.approx((cfg.o_tau - taper) / cfg.o_tau, abs=1e-12)


def test_modulate_rejects_incompatible_rate(default_config):
    with pytest.raises(RateMismatchException):
        Modulator.modulate(SampledWaveform(np.ones(10, dtype=complex), 1.5), default_config)


def test_folding_i_max():
    assert Modulator.folding_i_max(TmaConfig(n_phases=4), 4) == 3
    assert Modulator.folding_i_max(TmaConfig(n_phases=4, o_tau=2), 4) == 5


def test_predicted_replicas_are_delayed_harmonics():
    cfg = TmaConfig(n_phases=4, o_tau=2)
    predicted = Modulator.predict_replicas(cfg, 3, i_max=2)

    for i, entry in predicted.entries.items():
        alpha = ModulatingSequence.harmonic_alpha(4, i)
        assert abs(entry.weight) == pytest.approx(abs(alpha))
        assert entry.weight == pytest.approx(alpha * np.exp(-2j * np.pi * 3 * (1 + 4 * i) / 8))
        assert entry.center_freq == pytest.approx(0.25 + i)


@pytest.mark.parametrize("cfg", REPLICA_CONFIGS)
def test_replica_sum_reproduces_modulated_spectrum(cfg):
    samples_per_slot = 4
    baseband = Modulator.make_test_baseband(cfg, samples_per_slot=samples_per_slot)
    i_max = Modulator.folding_i_max(cfg, samples_per_slot)
    for delay in range(cfg.num_delays):
        modulated = Modulator.modulate(baseband, cfg, delay)
        assert Modulator.verify_replicas(modulated, Modulator.predict_replicas(cfg, delay, i_max), baseband) < 1e-6


def test_main_replica_alone_leaves_the_harmonic_power():
    cfg = TmaConfig(n_phases=4, o_f=2)
    samples_per_slot = 8
    baseband = Modulator.make_test_baseband(cfg, samples_per_slot=samples_per_slot)
    residual = Modulator.verify_replicas(Modulator.modulate(baseband, cfg), Modulator.predict_replicas(cfg, 0, 0), baseband)

    alpha = abs(ModulatingSequence.harmonic_alpha(4, 0))
    held = alpha / abs(sinc(np.pi / (cfg.num_delays * samples_per_slot)))
    assert residual == pytest.approx(np.sqrt(1 - held**2), abs=1e-9)
    assert residual**2 == pytest.approx(1 - alpha**2, abs=0.005)


def test_zero_prediction_leaves_everything():
    cfg = TmaConfig(n_phases=4, o_f=2)
    baseband = Modulator.make_test_baseband(cfg)
    modulated = Modulator.modulate(baseband, cfg)

    assert Modulator.verify_replicas(modulated, Modulator.predict_replicas(cfg).zeroed(), baseband) == pytest.approx(1.0)


def test_verify_replicas_needs_matching_waveforms(default_config):
    baseband = Modulator.make_test_baseband(default_config)
    shorter = SampledWaveform(baseband.samples[:-4], baseband.rate)

    with pytest.raises(RateMismatchException):
        Modulator.verify_replicas(shorter, Modulator.predict_replicas(default_config), baseband)


def test_measured_spectrum_is_ascending():
    cfg = TmaConfig(n_phases=4, o_f=2)
    frequencies, power_db = Modulator.measured_spectrum(Modulator.make_test_baseband(cfg))

    assert len(frequencies) == len(power_db)
    assert np.all(np.diff(frequencies) > 0)


def test_replica_listing_floors_zero_weights():
    replicas = Modulator.predict_replicas(TmaConfig(), i_max=2).zeroed().to_dict()["replicas"]

    assert [replica["harmonic"] for replica in replicas] == [-2, -1, 0, 1, 2]
    assert [replica["power_db"] for replica in replicas] == pytest.approx([-300.0] * 5)
