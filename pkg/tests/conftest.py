from collections import defaultdict

import pytest
from hypothesis import HealthCheck, settings

from motivic_bpgl.grading import FieldSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# five field cases per prime: C, R, and finite fields on both sides of the twist
FIELDS_P2 = [FieldSpec("C", 2), FieldSpec("R", 2), FieldSpec("F", 2, 5), FieldSpec("F", 2, 3), FieldSpec("F", 2, 9)]
FIELDS_P3 = [FieldSpec("C", 3), FieldSpec("R", 3), FieldSpec("F", 3, 7), FieldSpec("F", 3, 19), FieldSpec("F", 3, 2)]
FIELDS = FIELDS_P2 + FIELDS_P3


def field_id(spec: FieldSpec) -> str:
    return f"{spec.name}-p{spec.p}"


_CRITERIA: dict = defaultdict(list)

CRITERION_NAMES = {
    1: "oracle equivalence",
    2: "closed-form Ext charts",
    3: "Brown-Gitler decomposition",
    4: "Soule groups",
    5: "Quillen groups",
    6: "cooperations assembly",
    7: "bimodule Ext",
    8: "collapse verification",
    9: "property suites",
}


@pytest.fixture
def record():
    """record(n, case, ok, xfail=False): log one case of acceptance criterion n.
    ``xfail`` marks a case whose failure is expected and analysed."""

    def _record(n: int, case: str, ok: bool, xfail: bool = False) -> bool:
        _CRITERIA[n].append((case, bool(ok), xfail))
        print(f"criterion {n} [{case}]: {'pass' if ok else 'FAIL'}{' (expected)' if xfail and not ok else ''}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERION_NAMES):
        cases = _CRITERIA.get(n)
        if not cases:
            tr.write_line(f"criterion {n} ({CRITERION_NAMES[n]}): not run")
            continue
        bad = [c for c, ok, _ in cases if not ok]
        expected = [c for c, ok, xf in cases if not ok and xf]
        if bad:
            note = " (expected, strict xfail)" if len(expected) == len(bad) else ""
            tr.write_line(f"criterion {n} ({CRITERION_NAMES[n]}): FAIL in {len(bad)}/{len(cases)} cases{note}: "
                          + ", ".join(bad))
        else:
            tr.write_line(f"criterion {n} ({CRITERION_NAMES[n]}): PASS ({len(cases)} cases)")
