import csv
import json
from pathlib import Path
from typing import Sequence

import pytest

from exit_codes import ExitCodes
from tmasim import TmaSim

MODSIG_PANELS = ["modsig_of1_otau1.csv", "modsig_of4_otau1.csv", "modsig_of2_otau2.csv", "modsig_of1_otau4.csv"]


def run(*argv) -> int:
    return TmaSim.main([str(arg) for arg in argv])


def read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as csv_file:
        lines = [line for line in csv_file if not line.startswith("#")]
    return list(csv.DictReader(lines))


def csv_bytes(directory: Path) -> dict[str, bytes]:
    return {path.name: path.read_bytes() for path in sorted(directory.glob("*.csv"))}


def read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    """Metadata lines and CSV rows, header first"""
    lines = path.read_text(encoding="utf-8").splitlines()
    return [line for line in lines if line.startswith("#")], list(csv.reader(line for line in lines if not line.startswith("#")))


def assert_matches_golden(path: Path, golden: Path, floor_db: float | None = None, tied_columns: Sequence[str] = ()):
    """
    Same metadata, header and shape as the golden file, every number within 1e-9.
    Values below floor_db are compared as floor_db; tied_columns compare magnitudes only at +-90 degrees, where both endfire directions peak equally.
    """
    metadata, rows = read_table(path)
    golden_metadata, golden_rows = read_table(golden)
    assert metadata == golden_metadata, path.name
    assert rows[0] == golden_rows[0], path.name
    assert len(rows) == len(golden_rows), path.name

    for row, golden_row in zip(rows[1:], golden_rows[1:]):
        for column, cell, golden_cell in zip(rows[0], row, golden_row):
            if golden_cell == "":
                assert cell == "", (path.name, column, row)
                continue
            value, expected = float(cell), float(golden_cell)
            if floor_db is not None:
                value, expected = max(value, floor_db), max(expected, floor_db)
            if column in tied_columns and abs(expected) == 90:
                value, expected = abs(value), abs(expected)
            assert value == pytest.approx(expected, rel=1e-9, abs=1e-9), (path.name, column, row)


def test_modsig_defaults_match_golden_files(out_path, golden_path):
    assert run("modsig", "--out", out_path) == ExitCodes.SUCCESS

    for name in MODSIG_PANELS:
        assert (out_path / name).read_bytes() == (golden_path / name).read_bytes(), name
    manifest = json.loads((out_path / "modsig.manifest.json").read_text(encoding="utf-8"))
    assert sorted(manifest["outputs"]) == sorted(MODSIG_PANELS)
    assert manifest["command"] == "modsig"


def test_modsig_with_o_tau_equal_to_o_is_one_stretched_sequence(out_path, golden_path):
    assert run("modsig", "--out", out_path, "--o-f", 1, "--o-tau", 4) == ExitCodes.SUCCESS

    assert [path.name for path in out_path.glob("*.csv")] == ["modsig_of1_otau4.csv"]
    assert (out_path / "modsig_of1_otau4.csv").read_bytes() == (golden_path / "modsig_of1_otau4.csv").read_bytes()


def test_modsig_writes_off_slots(out_path):
    assert run("modsig", "--out", out_path, "--o-tau", 2, "--taper", 1, "--delay", 1) == ExitCodes.SUCCESS

    rows = read_rows(out_path / "modsig_of1_otau2.csv")
    assert [row["state_index"] for row in rows[:4]] == ["-1", "0", "-1", "1"]
    assert rows[0]["re"] == "0" and rows[0]["phase_rad"] == "0"


def test_resolution_matches_golden_files(out_path, golden_path):
    assert run("resolution", "--out", out_path, "--n-phases-list", 2, 4, "--o-tau-max", 4) == ExitCodes.SUCCESS

    for name in ("resolution.csv", "taper_amplitude_bits.csv"):
        assert (out_path / name).read_bytes() == (golden_path / name).read_bytes(), name


def test_harmonics_match_golden_files(out_path, golden_path):
    assert run("harmonics", "--out", out_path, "--n-max", 8, "--i-max", 2) == ExitCodes.SUCCESS

    for name in ("harmonic_power.csv", "main_harmonic_power.csv"):
        assert_matches_golden(out_path / name, golden_path / name)


def test_tapering_matches_golden_files(out_path, golden_path):
    assert run("tapering", "--out", out_path, "--n-phases-list", 4, 8, 16) == ExitCodes.SUCCESS

    for name in ("worst_case_gain.csv", "taper_harmonic_gain.csv", "taper_phase_offsets.csv"):
        assert_matches_golden(out_path / name, golden_path / name)


def test_beampattern_matches_golden_files(out_path, golden_path):
    assert run("beampattern", "--out", out_path, "--grid-step", 1.0) == ExitCodes.SUCCESS

    for o_tau in (1, 2):
        name = f"beampattern_otau{o_tau}.csv"
        assert_matches_golden(out_path / name, golden_path / name, floor_db=-100.0)
        name = f"beam_directions_otau{o_tau}.csv"
        assert_matches_golden(out_path / name, golden_path / name, tied_columns=("peak_deg",))


def test_resolution_without_oversampling_is_log2_n(out_path):
    assert run("resolution", "--out", out_path, "--n-phases-list", 4, "--o-tau-max", 16) == ExitCodes.SUCCESS

    bits = [float(row["effective_bits"]) for row in read_rows(out_path / "resolution.csv")]
    assert bits[0] == 2.0
    assert bits[-1] == 6.0
    assert bits == sorted(bits)


def test_harmonics(out_path):
    assert run("harmonics", "--out", out_path, "--n-max", 8) == ExitCodes.SUCCESS

    main = {(row["n_phases"], row["harmonic_index"]): float(row["power_db"]) for row in read_rows(out_path / "main_harmonic_power.csv")}
    assert main[("8", "0")] == pytest.approx(-0.2244, abs=0.001)
    assert main[("2", "0")] == main[("2", "-1")]
    per_harmonic = read_rows(out_path / "harmonic_power.csv")
    assert {row["n_phases"] for row in per_harmonic} == {"2", "4", "8"}
    assert len(per_harmonic) == 3 * 17


def test_beampattern_defaults_give_four_and_eight_beams(out_path):
    assert run("beampattern", "--out", out_path, "--grid-step", 0.5) == ExitCodes.SUCCESS

    for o_tau, beams in ((1, 4), (2, 8)):
        directions = read_rows(out_path / f"beam_directions_otau{o_tau}.csv")
        assert len({row["peak_deg"] for row in directions}) == beams
        assert next(row for row in directions if row["delay"] == "0")["peak_deg"] == "0"

        pattern = read_rows(out_path / f"beampattern_otau{o_tau}.csv")
        assert len(pattern) == 361
        assert list(pattern[0]) == ["theta_deg"] + [f"i0_d{d}_db" for d in range(4 * o_tau)]

    header = (out_path / "beampattern_otau1.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("# ") and json.loads(header[2:])["array"]["spacing_wl"] == 0.5
    manifest = json.loads((out_path / "beampattern.manifest.json").read_text(encoding="utf-8"))
    assert manifest["assumptions"]["spacing_wl_assumed"] is True


def test_beampattern_rejects_bad_grid(out_path):
    assert run("beampattern", "--out", out_path, "--grid-step", 0.7) == ExitCodes.VALIDATION_ERROR


def test_tapering(out_path):
    assert run("tapering", "--out", out_path, "--n-phases-list", 4, 8, 16) == ExitCodes.SUCCESS

    gains = [float(row["worst_case_gain_db"]) for row in read_rows(out_path / "worst_case_gain.csv")]
    assert gains[0] == pytest.approx(2.32, abs=0.01)
    for smaller, larger in zip(gains, gains[1:]):
        assert larger - smaller == pytest.approx(6.0, abs=0.5)
    assert (out_path / "taper_phase_offsets.csv").exists()
    assert (out_path / "taper_harmonic_gain.csv").exists()


def test_tapering_without_intermediate_levels_is_a_validation_error(out_path):
    assert run("tapering", "--out", out_path, "--o-tau", 1) == ExitCodes.VALIDATION_ERROR


def test_spectrum(out_path):
    assert run("spectrum", "--out", out_path, "--o-f", 2) == ExitCodes.SUCCESS

    replicas = json.loads((out_path / "replicas.json").read_text(encoding="utf-8"))
    assert replicas["relative_residual"] < 1e-6
    assert len(read_rows(out_path / "spectrum.csv")) > 0


@pytest.mark.parametrize(
    "argv",
    [
        ("modsig",),
        ("harmonics",),
        ("resolution",),
        ("beampattern", "--grid-step", 1.0),
        ("tapering",),
        ("spectrum", "--o-f", 2),
    ],
)
def test_reruns_are_byte_identical(argv, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"

    assert run(*argv, "--out", first) == ExitCodes.SUCCESS
    assert run(*argv, "--out", second) == ExitCodes.SUCCESS
    assert csv_bytes(first) == csv_bytes(second)
    assert len(csv_bytes(first)) > 0


def test_config_file_and_flag_precedence(out_path, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"n_phases": 2, "o_tau": 2, "o_f": 3}), encoding="utf-8")

    assert run("modsig", "--out", out_path, "--config", config, "--o-f", 1) == ExitCodes.SUCCESS

    assert [path.name for path in out_path.glob("*.csv")] == ["modsig_of1_otau2.csv"]
    assert len(read_rows(out_path / "modsig_of1_otau2.csv")) == 2 * 2


def test_output_directory_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("TMASIM_OUTPUT_DIR", str(tmp_path / "from_env"))

    assert run("resolution", "--o-tau-max", 2) == ExitCodes.SUCCESS
    assert (tmp_path / "from_env" / "resolution.csv").exists()


def test_invalid_config_is_a_validation_error(out_path, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"n_phases": 1}), encoding="utf-8")

    assert run("modsig", "--out", out_path, "--config", config) == ExitCodes.VALIDATION_ERROR


def test_unwritable_output_is_an_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf-8")

    assert run("resolution", "--out", blocker / "out") == ExitCodes.IO_ERROR


def test_usage_errors_exit_with_validation_error():
    with pytest.raises(SystemExit) as exit_info:
        run("modsig", "--delay", "one")

    assert exit_info.value.code == ExitCodes.VALIDATION_ERROR


@pytest.mark.slow
def test_verify_passes(out_path, capsys):
    assert run("verify", "--out", out_path) == ExitCodes.SUCCESS

    assert "FAIL" not in capsys.readouterr().out
    assert (out_path / "verification.csv").exists()


@pytest.mark.slow
def test_verify_with_injected_fault_fails(out_path, capsys):
    assert run("verify", "--out", out_path, "--inject-fault") == ExitCodes.VERIFICATION_FAILURE

    lines = capsys.readouterr().out.splitlines()
    assert "FAIL" in next(line for line in lines if line.startswith("oracle_equivalence"))
