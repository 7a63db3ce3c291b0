import numpy as np
import pytest

from regimevol import RegimeModel, TransitionSpec
from regimevol.regimes import LAGGED_VALUE, TIME, ThresholdVariable


def make_regime_model(kind, regimes, thresholds=(), transitions=(), tv=None, order=None):
    """Construct a RegimeModel record directly, for use as a simulation generator."""
    regimes = tuple(np.asarray(r, dtype=float) for r in regimes)
    order = order if order is not None else len(regimes[0]) - 1
    k = len(regimes)
    return RegimeModel(
        kind=kind,
        order=order,
        regimes=regimes,
        thresholds=np.asarray(thresholds, dtype=float),
        transitions=tuple(transitions),
        threshold_variable=tv or ThresholdVariable(TIME),
        rss=0.0,
        fitted=np.empty(0),
        residuals=np.empty(0),
        regime_proportions=np.full(k, 1.0 / k),
    )


@pytest.fixture
def ar1_model():
    return make_regime_model("ar", [[0.0, 0.9]])


@pytest.fixture
def setar_generator():
    """Oscillating 2-regime SETAR on the lagged value: all-0.5 vs all--0.5."""
    return make_regime_model(
        "setar",
        [[0.5, 0.5], [-0.5, -0.5]],
        thresholds=[0.0],
        tv=ThresholdVariable(LAGGED_VALUE, 1),
    )


@pytest.fixture
def lstar_time_generator():
    """Persistent positive level with a smooth persistence drop at mid-sample.

    Steepness 10 on the unit-scaled time axis (10/440 per raw step), so the
    transition spans a few hundred observations.
    """
    return make_regime_model(
        "lstar",
        [[0.02, 0.95], [0.0, -0.3]],
        thresholds=[220.0],
        transitions=[TransitionSpec("logistic", 10.0 / 440.0, 220.0)],
        tv=ThresholdVariable(TIME),
    )


@pytest.fixture
def lstar_lagged_generator():
    """Flip-flop limit cycle crossing the transition band every few steps."""
    return make_regime_model(
        "lstar",
        [[0.5, 0.8], [-1.0, -0.6]],
        thresholds=[0.0],
        transitions=[TransitionSpec("logistic", 10.0, 0.0)],
        tv=ThresholdVariable(LAGGED_VALUE, 1),
    )
