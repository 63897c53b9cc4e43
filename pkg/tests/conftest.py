import pytest

from odtload.config import build_configuration

# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

PAPER_SETTINGS = {
    "odt.power": "300 W",
    "odt.waist": "30 um",
    "odt.wavelength": "1070 nm",
    "odt.depth": "3.6 mK",
    "guide.gradient": "350 G/cm",
    "loop.radius": "0.5 mm",
    "beam.v_b": "5 m/s",
    "beam.T_r": "1 mK",
    "beam.T_z": "1 mK",
    "beam.z_start": "-0.05 m",
}


def paper_config(**overrides):
    settings = dict(PAPER_SETTINGS)
    settings.update(overrides)
    return build_configuration(settings)


@pytest.fixture(scope="session")
def config5():
    """Default configuration, v_b = 5 m/s."""
    return paper_config()


@pytest.fixture(scope="session")
def config1():
    """Default configuration, v_b = 1 m/s."""
    return paper_config(**{"beam.v_b": "1 m/s"})
