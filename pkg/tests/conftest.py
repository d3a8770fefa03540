import os
import shutil

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

if shutil.which("git") is None:  # pragma: no cover
    collect_ignore_glob = ["test_vcs.py", "test_cli.py"]


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("ALERTMINER_"):
            monkeypatch.delenv(name)
