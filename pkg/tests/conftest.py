import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE: list[tuple[str, bool, str]] = []

# criterion 5 is the conjunction of these property tests (node-id prefixes)
PROPERTY_SUITES = {
    "kernel moments and polynomial reproduction": [
        "tests/test_kernel.py::test_moment_conditions",
        "tests/test_kernel.py::test_polynomial_reproduction",
    ],
    "line filter vs brute-force oracle": ["tests/test_line_filter.py::test_matches_brute_force_oracle"],
    "region counts 6 / 24, octant split 6 / 2": ["tests/test_line_filter.py::test_region_counts"],
    "stencil equals direct refine": [
        "tests/test_refine.py::test_stencil_matches_direct",
        "tests/test_refine.py::test_stencil_matches_direct_d2_p2_n8",
    ],
    "MRA round trip and Parseval": [
        "tests/test_mra.py::test_round_trip_and_parseval",
        "tests/test_mra.py::test_round_trip_property",
    ],
    "nested-projection error invariance": [
        "tests/test_projection.py::test_nested_error_invariance",
        "tests/test_experiments.py::test_nested_field_gives_identical_report",
    ],
    "translation-by-h equivariance": [
        "tests/test_line_filter.py::test_translation_equivariance_is_exact",
        "tests/test_refine.py::test_translation_equivariance",
    ],
}
OUTCOMES: dict[str, bool] = {}


@pytest.fixture
def acceptance_record():
    def record(label: str, ok: bool, detail: str = ""):
        ACCEPTANCE.append((label, ok, detail))
        return ok

    return record


def pytest_runtest_logreport(report):
    if report.when == "call" or report.failed:
        OUTCOMES[report.nodeid] = OUTCOMES.get(report.nodeid, True) and report.passed


def _property_criterion():
    parts, ok_all = [], True
    for name, prefixes in PROPERTY_SUITES.items():
        hits = [ok for nid, ok in OUTCOMES.items() if any(nid.startswith(p) for p in prefixes)]
        ok = bool(hits) and all(hits)
        ok_all &= ok
        parts.append(f"{name}: {sum(hits)}/{len(hits)}" if hits else f"{name}: not run")
    return ("5. property suites", ok_all, "; ".join(parts))


def pytest_terminal_summary(terminalreporter):
    lines = list(ACCEPTANCE)
    prefixes = [p for group in PROPERTY_SUITES.values() for p in group]
    if any(nid.startswith(p) for nid in OUTCOMES for p in prefixes):
        lines.append(_property_criterion())
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(lines, key=lambda t: t[0]):
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
