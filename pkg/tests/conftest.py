import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lrdu", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lrdu")

_ACCEPTANCE = []


def implied_covariance(model, n):
    """Covariance of the linear generator, probed with unit input vectors."""
    from lrdu.lrd_sim import CirculantEmbedding

    gen = CirculantEmbedding(model, n)
    M = gen.transform(np.eye(gen.input_dim))
    return M.T @ M


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], marker.args[1], rep.outcome, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, outcome, duration in sorted(_ACCEPTANCE):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{number:>2} {verdict}  {label} ({duration:.1f} s)")
