import math

import pytest

from rsmrepair import load_corpus
from rsmrepair.lang import Vec2


@pytest.fixture(scope="session")
def attacker():
    return load_corpus("attacker")


@pytest.fixture()
def golden_params():
    # aimMargin pi/50, maxDist 80, viewAng pi/6, kickTimeout 2
    return {
        "aimMargin": math.pi / 50,
        "maxDist": 80.0,
        "viewAng": math.pi / 6,
        "kickTimeout": 2.0,
    }


@pytest.fixture()
def tau5():
    """The element at t=5 of the kick-refusal trace: GOTO, ball 50 units out."""
    inputs = {
        "ballLoc": Vec2(30.0, 40.0),
        "robotLoc": Vec2(0.0, 0.0),
        "robotAng": 0.0,
        "targetAng": math.pi / 60,
        "time": 5.0,
    }
    vars_ = {"lastKick": 2.0, "timeInKick": 0.0}
    return inputs, vars_, "GOTO"
