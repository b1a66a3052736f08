import pytest

from ngoa.traffic import TrafficConfig, load_day_profile


@pytest.fixture(scope="session")
def profiles():
    return {c: load_day_profile(f"builtin:{c}") for c in ("business", "residential")}


@pytest.fixture(scope="session")
def traffic(profiles):
    return TrafficConfig(profiles=profiles, session_rate=60.0)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
