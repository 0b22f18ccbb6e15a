import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example,
                                                 HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture(scope="session")
def kdv():
    from jacobi.catalog import kdv_structures
    return {k: v.density for k, v in kdv_structures().items()}


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record a criterion verdict; the lines are repeated in the terminal summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(k, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}" + (f": {detail}" if detail else "")
        log[k] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for k in sorted(log, key=lambda x: (int(str(x).rstrip("ab")), str(x))):
            terminalreporter.write_line(log[k])
