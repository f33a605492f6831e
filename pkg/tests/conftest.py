from importlib import resources

import pytest

from vassep.vass_core import parse_vass


def fixture_text(name: str) -> str:
    return (resources.files("vassep") / "fixtures" / name).read_text()


def fixture_vass(name: str):
    return parse_vass(fixture_text(name))


@pytest.fixture
def load_vass():
    return fixture_vass


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
