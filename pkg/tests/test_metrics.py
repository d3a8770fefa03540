import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from alertminer.metrics import HalsteadMeasures, file_metrics, halstead, loc, mccabe
from alertminer.source import parse_source


def fn(src, index=0):
    unit = parse_source(src)
    assert unit.parse_ok, unit.parse_error
    return unit.functions[index], unit


COMPOSITE = '''\
def composite(items, mode):
    total = 0
    for item in items:                      # +1
        if item > 0 and mode:               # +1
            total += item
        elif item < 0:                      # +1
            total -= item
        while total > 100:                  # +1
            total //= 2
    try:
        check(total)
    except ValueError:                      # +1
        total = 0
    except (KeyError, TypeError):           # +1
        total = -1
    else:
        pass
    finally:
        done()
    evens = [i for i in items if i % 2 == 0 if i]   # +2
    sign = 1 if total >= 0 else -1          # +1
    with open("log") as handle:
        assert handle
    return total * sign, evens
'''


def test_straight_line_is_one():
    f, _ = fn("def f(a):\n    b = a + 1\n    return b\n")
    assert mccabe(f) == 1


def test_composite_hand_count():
    f, _ = fn(COMPOSITE)
    assert mccabe(f) == 1 + 9
    # one extra path per extra boolean operand when requested
    assert mccabe(f, extended=True) == 1 + 9 + 1


def test_nested_function_bodies_are_excluded():
    f, unit = fn("def outer(x):\n    if x:\n        pass\n    def inner(y):\n        if y:\n            return 1\n    return inner\n")
    assert mccabe(f) == 2
    assert mccabe(unit.functions[1]) == 2


def test_halstead_hand_count_arithmetic():
    f, unit = fn("def f(a, b):\n    return a + b * a\n")
    h = halstead(f, unit)
    assert (h.n1, h.n2, h.N1, h.N2) == (3, 2, 3, 3)
    assert h.volume == pytest.approx(6 * math.log2(5))
    assert h.difficulty == pytest.approx(1.5 * 1.5)
    assert h.effort == pytest.approx(2.25 * 6 * math.log2(5))


def test_halstead_brackets_count_as_pairs_and_commas_are_ignored():
    f, unit = fn("def f(a):\n    x = g(a, [1, 2])\n")
    h = halstead(f, unit)
    assert (h.n1, h.N1) == (3, 3)  # =, (), []
    assert (h.n2, h.N2) == (5, 5)  # x, g, a, 1, 2
    assert h.volume == pytest.approx(24.0)


def test_halstead_skips_docstring_unless_raw():
    f, unit = fn('def f():\n    """Doc."""\n    return 1\n')
    assert halstead(f, unit).length == 2
    assert halstead(f, unit, raw=True).length == 3


def test_halstead_of_pass_and_docstring_only():
    f, unit = fn("def f():\n    pass\n")
    assert halstead(f, unit).volume == 1.0  # one operator, vocabulary floored at 2
    f, unit = fn('def f():\n    """Only a docstring."""\n')
    h = halstead(f, unit)
    assert h.length == 0 and h.volume == 0.0


def test_loc_skips_blank_and_comment_lines():
    src = "# header\n\ndef f():\n    # note\n    x = 1\n\n    return x\n"
    f, unit = fn(src)
    assert loc(unit) == 3
    assert loc(unit, raw=True) == 7
    assert loc(f, unit) == 3
    assert loc(f, unit, raw=True) == 5


def test_loc_counts_multiline_string_lines():
    unit = parse_source('X = """a\n\nb"""\n')
    assert loc(unit) == 3


def test_file_metrics_max_and_sum():
    unit = parse_source("def a(x):\n    if x:\n        return 1\n\n\ndef b():\n    return 2\n")
    m = file_metrics(unit)
    assert (m.mccabe_max, m.mccabe_sum, m.function_count) == (2, 3, 2)


def test_file_metrics_without_functions():
    m = file_metrics(parse_source("x = 1\n"))
    assert (m.mccabe_max, m.mccabe_sum, m.loc) == (0, 0, 1)


def test_halstead_from_counts_zero():
    h = HalsteadMeasures.from_counts(0, 0, 0, 0)
    assert h.volume == 0.0 and h.effort == 0.0


@given(st.lists(st.sampled_from(["x = 1", "if x:\n    x = 2", "for i in y:\n    x += i",
                                 "while x:\n    x -= 1", "x = 1 if y else 2"]), max_size=10))
def test_mccabe_counts_generated_decisions(parts):
    body = "\n".join(parts) or "pass"
    src = "def f(x, y):\n" + "\n".join("    " + line for line in body.splitlines()) + "\n"
    f, _ = fn(src)
    expected = 1 + sum(1 for p in parts if p.startswith(("if", "for", "while")) or " if " in p)
    assert mccabe(f) == expected


@given(st.integers(0, 20))
def test_halstead_volume_positive_for_nonempty_body(n2_extra):
    names = " + ".join(f"v{i}" for i in range(n2_extra + 1))
    f, unit = fn(f"def f():\n    return {names}\n")
    h = halstead(f, unit)
    assert h.length > 0 and h.volume > 0
    assert h.vocabulary == h.n1 + h.n2 and h.length == h.N1 + h.N2
