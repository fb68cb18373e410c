import math

import numpy as np
import pytest

import interp_lab as il

INF = math.inf


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def l1_linf_8():
    return il.l1_linf_couple(8)


@pytest.fixture
def weighted_couples(rng):
    """A small zoo of couples: closed-form and solver-routed."""
    zoo = []
    for p0, p1 in ((1.0, INF), (1.0, 2.0), (2.0, INF), (2.0, 2.0)):
        w0 = np.exp(rng.uniform(-0.5, 0.5, 6)) + 0.5
        w1 = np.exp(rng.uniform(-0.5, 0.5, 6)) * 0.8
        zoo.append(il.CoupleSpec(il.SpaceSpec(p0, w0), il.SpaceSpec(p1, w1)))
    zoo.append(il.degenerate_couple(2.0, np.exp(rng.uniform(-1, 1, 6))))
    zoo.append(il.l1_linf_couple(6))
    return zoo
