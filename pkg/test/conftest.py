from pathlib import Path

import pytest
import structlog

from tma_config import ArrayConfig, TmaConfig


@pytest.fixture(scope="function", autouse=True)
def isolate_test(request: pytest.FixtureRequest, monkeypatch: pytest.MonkeyPatch):
    """Every test gets its own logging context and none of the caller's TMASIM_ settings"""
    for name in ("TMASIM_CONFIG", "TMASIM_OUTPUT_DIR", "TMASIM_WORKERS", "TMASIM_TRACE_CONSOLE"):
        monkeypatch.delenv(name, raising=False)
    with structlog.contextvars.bound_contextvars(test=request.node.name):
        yield


@pytest.fixture(scope="package")
def golden_path() -> Path:
    return Path(__file__).parent / "golden"


@pytest.fixture(scope="function")
def out_path(tmp_path: Path) -> Path:
    return tmp_path / "out"


@pytest.fixture(scope="package")
def default_config() -> TmaConfig:
    """N=4 without oversampling, normalized rates"""
    return TmaConfig()


@pytest.fixture(scope="package")
def array_config() -> ArrayConfig:
    """M=8 at half-wavelength spacing"""
    return ArrayConfig()


@pytest.fixture(scope="package", params=[2, 3, 4, 8])
def n_phases(request) -> int:
    return request.param


@pytest.fixture(scope="package", params=[1, 2, 4])
def o_tau(request) -> int:
    return request.param


@pytest.fixture(scope="package")
def grid_config(n_phases: int, o_tau: int) -> TmaConfig:
    return TmaConfig(n_phases=n_phases, o_tau=o_tau)
