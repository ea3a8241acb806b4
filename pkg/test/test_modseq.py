import numpy as np
import pytest

from tma_config import TmaConfig
from tma_exception import DelayOutOfRangeException, IndexOutOfRangeException, NonPositiveParameterException, TaperOutOfRangeException
from tma_modseq import OFF, ModulatingSequence, sinc


def test_sinc_is_unnormalized():
    assert sinc(0.0) == 1.0
    assert sinc(np.pi / 2) == pytest.approx(2 / np.pi)
    assert sinc(np.pi) == pytest.approx(0.0, abs=1e-16)


def test_state_phase():
    assert ModulatingSequence.state_phase(4, 0) == 0.0
    assert ModulatingSequence.state_phase(4, 1) == pytest.approx(np.pi / 2)
    with pytest.raises(IndexOutOfRangeException):
        ModulatingSequence.state_phase(4, 4)


def test_schedule_without_oversampling_is_ascending_states():
    schedule = ModulatingSequence.build_schedule(TmaConfig(n_phases=4))

    assert schedule.slots == (0, 1, 2, 3)
    assert schedule.duty_cycle() == 1.0


def test_delayed_schedule_is_cyclic_right_shift():
    schedule = ModulatingSequence.build_schedule(TmaConfig(n_phases=4, o_tau=2), delay=1)

    assert schedule.slots == (3, 0, 0, 1, 1, 2, 2, 3)
    assert schedule.delay == 1


def test_taper_switches_off_the_end_of_every_pulse():
    schedule = ModulatingSequence.build_schedule(TmaConfig(n_phases=4, o_tau=2), taper=1)

    assert schedule.slots == (0, OFF, 1, OFF, 2, OFF, 3, OFF)
    assert schedule.active_slots() == 4
    assert schedule.duty_cycle() == 0.5


def test_full_taper_switches_everything_off():
    schedule = ModulatingSequence.build_schedule(TmaConfig(n_phases=3, o_tau=2), taper=2)

    assert set(schedule.slots) == {OFF}


def test_schedule_states_repeat_o_tau_times(grid_config):
    schedule = ModulatingSequence.build_schedule(grid_config)

    assert schedule.period_slots == grid_config.num_delays
    assert list(schedule.slots) == [n for n in range(grid_config.n_phases) for _ in range(grid_config.o_tau)]


def test_schedule_rejects_out_of_range_delay_and_taper():
    cfg = TmaConfig(n_phases=4, o_tau=2)
    with pytest.raises(DelayOutOfRangeException):
        ModulatingSequence.build_schedule(cfg, delay=8)
    with pytest.raises(DelayOutOfRangeException):
        ModulatingSequence.build_schedule(cfg, delay=-1)
    with pytest.raises(TaperOutOfRangeException):
        ModulatingSequence.build_schedule(cfg, taper=3)


def test_existence_indicator():
    assert list(ModulatingSequence.existence_indicator(4, np.array([1, 5, -3, 2, 0, 4]))) == [1, 1, 1, 0, 0, 0]
    assert ModulatingSequence.existence_indicator(2, -1) == 1


def test_sequence_coefficient_vanishes_off_the_harmonic_lattice(n_phases):
    ks = np.arange(-40, 41)
    coefficients = ModulatingSequence.sequence_coefficient(n_phases, ks)

    assert np.all(coefficients[np.mod(ks, n_phases) != 1] == 0)
    assert np.all(np.abs(coefficients[np.mod(ks, n_phases) == 1]) > 0)


def test_harmonic_alpha_is_sequence_coefficient_on_the_lattice(n_phases):
    for i in range(-5, 6):
        assert ModulatingSequence.harmonic_alpha(n_phases, i) == ModulatingSequence.sequence_coefficient(n_phases, 1 + i * n_phases)


def test_pulse_coefficients_sum_to_the_sequence_coefficient(n_phases):
    # C(k) = (1/N) sum_n G_n(k) e^{-j 2 pi k n / N}
    for k in range(-9, 10):
        total = sum(ModulatingSequence.pulse_coefficient(n_phases, n, k) * np.exp(-2j * np.pi * k * n / n_phases) for n in range(n_phases)) / n_phases
        assert abs(total - ModulatingSequence.sequence_coefficient(n_phases, k)) < 1e-12


def test_shortened_coefficient_at_full_width_is_untapered(n_phases):
    ks = np.arange(-20, 21)
    assert np.array_equal(ModulatingSequence.shortened_sequence_coefficient(n_phases, ks, 1.0), ModulatingSequence.sequence_coefficient(n_phases, ks))


@pytest.mark.parametrize(
    "n_phases, i, power_db",
    [(2, 0, -3.922), (2, -1, -3.922), (4, 0, -0.912), (4, -1, -10.45), (8, 0, -0.2244)],
)
def test_harmonic_power_db(n_phases, i, power_db):
    assert ModulatingSequence.harmonic_power_db(n_phases, i) == pytest.approx(power_db, abs=0.005)


def test_main_harmonic_loss_is_small_from_eight_phases():
    for n in range(8, 65):
        assert ModulatingSequence.harmonic_power_db(n, 0) > -0.23


def test_spectrum_frequencies_and_power():
    cfg = TmaConfig(n_phases=4, o_f=2)
    spectrum = ModulatingSequence.spectrum(cfg, i_max=2)

    assert sorted(spectrum.entries) == [-2, -1, 0, 1, 2]
    assert spectrum.entries[0].freq == pytest.approx(0.5)
    assert spectrum.entries[-1].freq == pytest.approx(-1.5)
    assert spectrum.sequence_coefficients()[-3] == spectrum.entries[-1].coeff


def test_spectrum_power_approaches_unity():
    spectrum = ModulatingSequence.spectrum(TmaConfig(n_phases=4), i_max=1000)

    assert spectrum.total_power() == pytest.approx(1.0, abs=1e-3)


def test_spectrum_rejects_negative_i_max():
    with pytest.raises(NonPositiveParameterException):
        ModulatingSequence.spectrum(TmaConfig(), i_max=-1)


def test_schedule_coefficients_carry_the_delay_phase():
    cfg = TmaConfig(n_phases=4, o_tau=2)
    undelayed = ModulatingSequence.schedule_coefficients(cfg, 0, 0, [1, -3, 5])
    delayed = ModulatingSequence.schedule_coefficients(cfg, 3, 0, [1, -3, 5])

    for k in undelayed:
        assert delayed[k] == pytest.approx(undelayed[k] * np.exp(-2j * np.pi * k * 3 / 8))


@pytest.mark.parametrize(
    "coefficient, magnitude, phase",
    [
        (ModulatingSequence.pulse_coefficient(2, 0, 1), 2 / np.pi, -np.pi / 2),
        (ModulatingSequence.pulse_coefficient(4, 1, 1), 0.9003163161571061, np.pi / 4),
        (ModulatingSequence.sequence_coefficient(4, -3), 0.3001054387190354, 3 * np.pi / 4),
        (ModulatingSequence.sequence_coefficient(4, 1), 0.9003163161571061, -np.pi / 4),
        (ModulatingSequence.harmonic_alpha(2, -1), 2 / np.pi, np.pi / 2),
    ],
)
def test_coefficient_examples(coefficient, magnitude, phase):
    assert abs(coefficient) == pytest.approx(magnitude, abs=1e-12)
    assert np.angle(coefficient) == pytest.approx(phase, abs=1e-12)


def test_pulse_coefficient_components():
    assert ModulatingSequence.pulse_coefficient(2, 0, 1) == pytest.approx(-0.6366197723675814j, abs=1e-12)
    assert ModulatingSequence.pulse_coefficient(4, 1, 1) == pytest.approx(0.6366197723675814 + 0.6366197723675814j, abs=1e-12)


def test_main_harmonic_grows_and_strongest_image_shrinks_with_n():
    main = np.array([abs(ModulatingSequence.harmonic_alpha(n, 0)) for n in range(2, 65)])
    image = np.array([abs(ModulatingSequence.harmonic_alpha(n, -1)) for n in range(3, 65)])

    assert np.all(np.diff(main) > 0)
    assert np.all(np.diff(image) < 0)
