import numpy as np
import pytest

from plcturbo import (
    BinaryPolynomial,
    DiscreteChannel,
    MixtureNoiseParams,
    PulseShape,
    vvf_4path_params,
)

PAPER_TAPS = np.array([0.8709, 0.4758, -0.1153, 0.0435])


@pytest.fixture(scope="session")
def vvf_params():
    return vvf_4path_params()


@pytest.fixture(scope="session")
def vvf_pulse():
    return PulseShape(beta=0.7, symbol_period=80e-9, span=12)


@pytest.fixture(scope="session")
def paper_channel():
    taps = PAPER_TAPS / np.sqrt(np.sum(PAPER_TAPS**2))
    return DiscreteChannel(taps=taps, normalized=True)


@pytest.fixture(scope="session")
def outer_ff():
    return BinaryPolynomial.parse("1+D+D^2+D^3")


@pytest.fixture(scope="session")
def outer_fb():
    return BinaryPolynomial.parse("1+D+D^3")


@pytest.fixture(scope="session")
def precoder_d3():
    return BinaryPolynomial.parse("1+D^3")


@pytest.fixture(scope="session")
def impulsive_noise():
    return MixtureNoiseParams.from_epsilon_k(0.1, 100.0, 1.0)
