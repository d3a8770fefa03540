import io
import json

import pytest

from alertminer.config import ConfigError, RunConfig, env_overrides, keyword_pattern, load_config
from alertminer.detectors import AlertKind
from alertminer.store import SCHEMA, StoreError, dumps_event, read_events, write_events
from events import make_event, window


def test_defaults():
    cfg = RunConfig()
    assert cfg.detectors.max_branches == 12
    assert (cfg.min_window_commits, cfg.ccp_low, cfg.ccp_high, cfg.window_days) == (5, 0.09, 0.39, None)


def test_yaml_env_and_flag_layering(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("detectors:\n  max_branches: 15\nseed: 4\nrefactor_keywords: [refactor]\nwindow_days: 90\n")
    cfg = load_config(path, environ={"ALERTMINER_DETECTORS__MAX_RETURNS": "9", "ALERTMINER_SEED": "5"})
    assert cfg.detectors.max_branches == 15 and cfg.detectors.max_returns == 9
    assert cfg.seed == 5 and cfg.refactor_keywords == ("refactor",) and cfg.window_days == 90.0
    assert load_config(path, environ={}, seed=11).seed == 11


@pytest.mark.parametrize("text", [
    "bogus: 1\n",
    "detectors:\n  max_whatever: 3\n",
    "detectors:\n  max_branches: 0\n",
    "seed: abc\n",
    "ccp_low: 0.5\nccp_high: 0.2\n",
    "- a\n- b\n",
    "refactor_keywords: []\n",
])
def test_invalid_config_rejected(tmp_path, text):
    path = tmp_path / "c.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path, environ={})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.yaml", environ={})


def test_env_overrides_ignore_other_variables():
    assert env_overrides({"HOME": "/x", "ALERTMINER_JOBS": "3"}) == {"jobs": 3}


def test_keyword_pattern_word_boundaries():
    pattern = keyword_pattern(("clean up", "fix"))
    assert pattern.search("Clean   up the module")
    assert not pattern.search("cleanup")
    assert not pattern.search("suffix")


def test_event_round_trip(tmp_path):
    events = [make_event(added=3, deleted=1, new_function=True),
              make_event(kind=AlertKind.WILDCARD_IMPORT, windows=(window(1, 5), window(2, 6)))]
    path = tmp_path / "events.jsonl"
    assert write_events(events, path) == 2
    loaded = read_events(path)
    assert loaded == events
    assert [dumps_event(e) for e in loaded] == path.read_text().splitlines()


def test_lines_are_sorted_json_with_schema():
    buf = io.StringIO()
    write_events([make_event()], buf)
    data = json.loads(buf.getvalue())
    assert data["schema"] == SCHEMA
    assert list(data) == sorted(data)


def test_schema_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "events.jsonl"
    good = dumps_event(make_event())
    path.write_text(good + "\n" + json.dumps({"schema": "other/9"}) + "\n")
    with pytest.raises(StoreError, match=r"events.jsonl:2:"):
        read_events(path)
    path.write_text(good + "\n\n{not json\n")
    with pytest.raises(StoreError, match=r":3:"):
        read_events(path)
    bad = json.loads(good)
    del bad["path"]
    path.write_text(json.dumps(bad) + "\n")
    with pytest.raises(StoreError, match=r":1: invalid event: missing field"):
        read_events(path)
