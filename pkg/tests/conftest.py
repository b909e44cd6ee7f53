import pytest

from perfslice import benchmarks
from perfslice.instrument import instrument
from perfslice.lang import InputRecord, interpret, parse
from perfslice.profile import ProfileConfig, profile_batch


def run(src, *values):
    return interpret(parse(src), InputRecord(list(values)))


def records(*rows):
    return [InputRecord(list(r), f"in{i}") for i, r in enumerate(rows)]


@pytest.fixture(scope="session")
def gridwork_data():
    """Profiled gridwork corpus shared by the model and pipeline tests."""
    prog = benchmarks.load("gridwork")
    inputs = benchmarks.inputs("gridwork", 300, 0)
    ip, schema = instrument(prog)
    data = profile_batch(ip, schema, inputs, ProfileConfig(noise_sigma=0.02, rng_seed=0))
    return prog, inputs, ip, schema, data


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
