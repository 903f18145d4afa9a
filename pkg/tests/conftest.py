import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def config_path(name: str) -> str:
    return os.path.abspath(os.path.join(CONFIG_DIR, f"{name}.cfg"))


@pytest.fixture(scope="session")
def scenario_runs():
    """Closed-loop results of the four scenarios plus the baseline contrast.

    Computed once per session; the acceptance tests share them.
    """
    from locoforce.config import load_setup
    from locoforce.sim import run_scenario

    runs = {}
    for name in ("weight_lift", "table_push", "rail_hold", "slippery_walk"):
        setup, _, _ = load_setup(config_path(name))
        runs[name] = (setup, run_scenario(setup))
    setup, _, _ = load_setup(config_path("weight_lift"),
                             {"task.mode": "baseline"})
    runs["weight_lift_baseline"] = (setup, run_scenario(setup))
    return runs
