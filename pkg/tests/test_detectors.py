import re
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from alertminer.detectors import (
    DETECTORS,
    AlertInstance,
    AlertKind,
    DetectorConfig,
    boolean_terms,
    count_by_kind,
    detect_all,
)
from alertminer.source import parse_source
from detector_gen import with_bool_terms, with_branches, with_nesting, with_returns, with_statements

FIXTURES = Path(__file__).parent / "fixtures" / "detectors"
MARKER = re.compile(r"# expect: (.*)$")


def expected_alerts(text: str) -> list[tuple[str, int]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = MARKER.search(line)
        if m:
            out += [(kind.strip(), lineno) for kind in m.group(1).split(",")]
    return sorted(out)


def fixture_alerts(path: Path) -> list[tuple[str, int]]:
    unit = parse_source(path.read_bytes(), path.name)
    return sorted((a.kind.value, a.line) for a in detect_all(unit))


FIXTURE_FILES = sorted(FIXTURES.glob("*.py"))


@pytest.mark.parametrize("path", FIXTURE_FILES, ids=lambda p: p.stem)
def test_fixture_alerts_match_hand_enumeration(path):
    assert fixture_alerts(path) == expected_alerts(path.read_text())


@pytest.mark.parametrize("kind", list(AlertKind), ids=str)
def test_every_kind_has_firing_and_clean_fixture(kind):
    fires = FIXTURES / f"{kind.value}__fires.py"
    clean = FIXTURES / f"{kind.value}__clean.py"
    assert any(k == kind.value for k, _ in fixture_alerts(fires))
    assert all(k != kind.value for k, _ in fixture_alerts(clean))


def test_registry_covers_all_kinds():
    assert len(AlertKind) == 17
    assert len(DETECTORS) >= 1


def test_alerts_sorted_and_attributed_to_functions():
    unit = parse_source((FIXTURES / "unnecessary-pass__fires.py").read_text())
    alerts = detect_all(unit)
    assert [a.line for a in alerts] == sorted(a.line for a in alerts)
    assert [a.function for a in alerts] == [None, "noop"]


def test_unparseable_unit_has_no_alerts():
    assert detect_all(parse_source("def f(:\n")) == []


def test_count_by_kind_zero_fills():
    counts = count_by_kind([])
    assert set(counts) == set(AlertKind) and not any(counts.values())


def test_alert_round_trip():
    alert = AlertInstance(AlertKind.WILDCARD_IMPORT, "a.py", 3, None, "os")
    assert AlertInstance.from_dict(alert.to_dict()) == alert


def test_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        DetectorConfig(max_branches=0)


def test_boolean_terms_counts_leaves_through_parens():
    unit = parse_source("if a and (b or c) and not d:\n    pass\n")
    assert boolean_terms(unit.module_statements[0].condition) == 4


def test_superfluous_parens_after_not_and_keywords():
    alerts = detect_all(parse_source("if not (x):\n    pass\nassert (y)\ndel (z)\n"))
    assert [(a.kind, a.line) for a in alerts] == [(AlertKind.SUPERFLUOUS_PARENS, 1),
                                                  (AlertKind.SUPERFLUOUS_PARENS, 3),
                                                  (AlertKind.SUPERFLUOUS_PARENS, 4)]


def test_nested_blocks_reported_once_per_function():
    src = with_nesting(7)
    alerts = [a for a in detect_all(parse_source(src)) if a.kind is AlertKind.TOO_MANY_NESTED_BLOCKS]
    assert len(alerts) == 1 and alerts[0].line == 2


CASES = {
    "max_branches": (with_branches, AlertKind.TOO_MANY_BRANCHES),
    "max_statements": (with_statements, AlertKind.TOO_MANY_STATEMENTS),
    "max_returns": (with_returns, AlertKind.TOO_MANY_RETURN_STATEMENTS),
    "max_nested_blocks": (with_nesting, AlertKind.TOO_MANY_NESTED_BLOCKS),
    "max_bool_expr": (with_bool_terms, AlertKind.TOO_MANY_BOOLEAN_EXPRESSIONS),
}


def fires(field: str, threshold: int, amount: int) -> bool:
    build, kind = CASES[field]
    cfg = DetectorConfig(**{field: threshold})
    return count_by_kind(detect_all(parse_source(build(amount)), cfg))[kind] > 0


@pytest.mark.parametrize("field", sorted(CASES))
@given(threshold=st.integers(2, 14))
def test_threshold_boundary(field, threshold):
    assert not fires(field, threshold, threshold)
    assert fires(field, threshold, threshold + 1)


@given(st.integers(1, 150))
def test_line_length_boundary(limit):
    cfg = DetectorConfig(max_line_length=limit)

    def long_lines(text):
        return [a.line for a in detect_all(parse_source(text), cfg) if a.kind is AlertKind.LINE_TOO_LONG]

    assert long_lines("#" * limit + "\n") == []
    assert long_lines("\n" + "#" * (limit + 1) + "\n") == [2]
