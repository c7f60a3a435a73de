import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modkernel import (
    Interval,
    PrecisionContext,
    Wedge,
    run_pipeline,
)

ACCEPTANCE_DIGITS = 300


@pytest.fixture(scope="session")
def ctx300():
    return PrecisionContext(ACCEPTANCE_DIGITS)


@pytest.fixture(scope="session")
def ctx100():
    return PrecisionContext(100)


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(40)


# -- heavy pipeline fixtures, one build per session --------------------------

@pytest.fixture(scope="session")
def wedge_m1(ctx300):
    return run_pipeline(Wedge("0"), "1", 64, "4", ctx300, mode="split")


@pytest.fixture(scope="session")
def wedge_m4(ctx300):
    return run_pipeline(Wedge("0"), "4", 64, "4", ctx300, mode="split")


@pytest.fixture(scope="session")
def interval_m001_n64(ctx300):
    return run_pipeline(Interval("-1", "1"), "0.001", 64, "4", ctx300,
                        mode="split")


@pytest.fixture(scope="session")
def interval_m001_n128(ctx300):
    # doubled resolution drives the weak limit jointly: N and b together,
    # keeping the spacing h fixed while the box artifacts shrink
    return run_pipeline(Interval("-1", "1"), "0.001", 128, "8", ctx300,
                        mode="split")


@pytest.fixture(scope="session")
def interval_m1(ctx300):
    return run_pipeline(Interval("-1", "1"), "1", 64, "4", ctx300,
                        mode="split")


@pytest.fixture(scope="session")
def interval_m4(ctx300):
    return run_pipeline(Interval("-1", "1"), "4", 64, "4", ctx300,
                        mode="split")


@pytest.fixture(scope="session")
def interval_m10(ctx300):
    return run_pipeline(Interval("-1", "1"), "10", 64, "4", ctx300,
                        mode="split")


def rel_err(ctx, value, want) -> float:
    with ctx.activate():
        return float(abs(value - want) / abs(want))
