import numpy as np
import pytest


def planted_dataset(q_c=0.25, nu=1.3, shift=0.0, sizes=(16, 32, 64, 128),
                    q=np.linspace(0.1, 0.4, 61), noise=0.01, seed=0):
    """Sigmoid scaling function with known (q_c, nu, shift) and multiplicative noise."""
    rng = np.random.default_rng(seed)
    qs, ls, ys = [], [], []
    for size in sizes:
        x = (q - (q_c + shift * size ** (-nu))) * size ** (1.0 / nu)
        y = 1.0 / (1.0 + np.exp(-x / 2.0))
        y = y * (1.0 + noise * rng.standard_normal(q.size))
        qs.append(q)
        ls.append(np.full(q.size, float(size)))
        ys.append(y)
    return np.concatenate(qs), np.concatenate(ls), np.concatenate(ys)


@pytest.fixture
def planted():
    return planted_dataset


# ------------------------------------------------------------ acceptance

CRITERIA = {
    1: "stabilizer vs dense oracle",
    2: "commuting ensembles stay unentangled",
    3: "single-trajectory growth regimes",
    4: "factorizable r=3 transition location",
    5: "critical index is linear in r",
    6: "critical index is path independent",
    7: "cycle-model entanglement scaling",
    8: "frustration-graph classification",
    9: "collapse recovers planted parameters",
    10: "XYZ parity: r=3 crossing, r=4 log growth",
    11: "mixed-range transitions and k_eff",
}
_outcomes: dict = {}


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="run the long acceptance criteria (also enabled by MEASONLY_SLOW=1)")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(config, items):
    import os
    if config.getoption("--run-slow") or os.environ.get("MEASONLY_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="long-running; use --run-slow or MEASONLY_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties if k != "criterion")
    if report.when == "setup" and report.skipped:
        _outcomes[n] = ("SKIP", "long-running, not requested")
    elif report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        if report.failed and not detail:
            detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
        _outcomes[n] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status, detail = _outcomes[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}: {CRITERIA[n]} ({detail})")
