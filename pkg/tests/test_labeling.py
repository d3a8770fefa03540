import pytest
from hypothesis import given
from hypothesis import strategies as st

from alertminer.labeling import (
    CLAUSES,
    LABELING_FUNCTIONS,
    LabeledEvent,
    LabelingFunction,
    attach_labels,
    clause_added_lines,
    clause_massive_change,
    clause_mccabe_reduced,
    clause_mostly_delete,
    clause_new_function,
    clause_verdicts,
    evaluate_functions,
    lf_added_function,
    lf_reduced_mccabe,
    lf_suitable_mccabe,
    read_labels,
)
from events import make_event


@pytest.mark.parametrize("added, hit", [(0, False), (1, True)])
def test_added_lines(added, hit):
    assert clause_added_lines(make_event(added=added)) is hit


@pytest.mark.parametrize("added, deleted, hit", [(0, 299, False), (0, 300, True), (150, 150, True), (0, 0, False)])
def test_massive_change_boundary(added, deleted, hit):
    assert clause_massive_change(make_event(added=added, deleted=deleted)) is hit


@pytest.mark.parametrize("added, deleted, hit", [(10, 31, True), (10, 30, False), (0, 5, True), (0, 0, False)])
def test_mostly_delete_is_strict(added, deleted, hit):
    assert clause_mostly_delete(make_event(added=added, deleted=deleted)) is hit


@pytest.mark.parametrize("diff, hit", [(-3, True), (0, False), (2, False)])
def test_mccabe_reduced(diff, hit):
    assert clause_mccabe_reduced(make_event(mccabe_max_diff=diff)) is hit


def test_new_function_passes_flag_through():
    assert clause_new_function(make_event(new_function=True))
    assert not clause_new_function(make_event())


def test_labeling_functions_jointly():
    extraction = make_event(added=30, deleted=10, mccabe_max_diff=-3, new_function=True)
    assert lf_reduced_mccabe(extraction) and lf_suitable_mccabe(extraction) and lf_added_function(extraction)
    inline = make_event(added=4, deleted=6, mccabe_max_diff=-1)
    assert lf_reduced_mccabe(inline) and not lf_added_function(inline)
    sweep = make_event(added=300, deleted=100, mccabe_max_diff=-2, new_function=True)
    assert not lf_suitable_mccabe(sweep) and lf_added_function(sweep)


def test_composed_function_with_negation():
    lf = LabelingFunction("pure cut", ("!added_lines", "mostly_delete"))
    assert lf(make_event(added=0, deleted=4))
    assert not lf(make_event(added=1, deleted=40))
    with pytest.raises(KeyError):
        LabelingFunction("bad", ("no_such_clause",))


def test_verdicts_cover_registry():
    verdicts = clause_verdicts(make_event())
    assert [v.clause for v in verdicts] == list(CLAUSES)


def test_evaluation_arithmetic():
    events = [LabeledEvent(make_event(new_function=i < 5), is_refactor=i < 4 or i == 7) for i in range(10)]
    (row,) = evaluate_functions(events, [lf_added_function])
    assert (row.hits, row.total) == (5, 10)
    assert row.recall == 0.5
    assert row.refactor_precision == 0.8


def test_always_firing_function_and_zero_hits():
    events = [LabeledEvent(make_event(added=1), is_refactor=i < 3) for i in range(10)]
    always, never = evaluate_functions(events, [clause_added_lines, clause_new_function])
    assert always.recall == 1.0 and always.refactor_precision == pytest.approx(0.3)
    assert never.hits == 0 and never.refactor_precision is None


def test_evaluation_requires_ground_truth():
    with pytest.raises(ValueError):
        evaluate_functions([LabeledEvent(make_event())], LABELING_FUNCTIONS)


def test_label_csv(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("event_id,is_refactor\nabc,true\ndef,0\n")
    labels = read_labels(path)
    assert labels == {"abc": True, "def": False}
    event = make_event()
    assert attach_labels([event], {event.id: True})[0].is_refactor is True
    path.write_text("event_id,is_refactor\nabc,maybe\n")
    with pytest.raises(ValueError, match=":2:"):
        read_labels(path)


events_strategy = st.builds(
    make_event,
    added=st.integers(0, 400), deleted=st.integers(0, 400),
    mccabe_max_diff=st.integers(-5, 5), new_function=st.booleans(),
)


@given(st.lists(events_strategy, max_size=30))
def test_suitable_hits_are_subset_of_reduced(events):
    for e in events:
        if lf_suitable_mccabe(e):
            assert lf_reduced_mccabe(e)
            # negated clauses never fire on accepted events
            assert not clause_mostly_delete(e) and not clause_massive_change(e)
