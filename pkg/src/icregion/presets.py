"""Small named instances used in tests, docs and the CLI."""

import math

import numpy as np

from .channel_model import Dmic, GaussianIC, InterferencePattern


def sym3() -> GaussianIC:
    """P = (1,1,1); |h12| = |h23| = |h31| = 2, the other cross gains 1."""
    g = np.array([[1, 2, 1], [1, 1, 2], [2, 1, 1]], dtype=complex)
    return GaussianIC(g, [1.0, 1.0, 1.0])


def case2() -> GaussianIC:
    """P = (1,1,1); h12 = h13 = h21 = 1, h32 = h23 = h31 = 2."""
    g = np.array([[1, 1, 1], [1, 1, 2], [2, 2, 1]], dtype=complex)
    return GaussianIC(g, [1.0, 1.0, 1.0])


def k4() -> GaussianIC:
    """Four users at power 0.25, strong gain 1 from user j+1 at receiver j,
    very strong gain sqrt(2.5) elsewhere."""
    g = np.full((4, 4), math.sqrt(2.5), dtype=complex)
    np.fill_diagonal(g, 1.0)
    for j in range(4):
        g[(j + 1) % 4, j] = 1.0
    return GaussianIC(g, [0.25] * 4)


# receiver j -> (very strong user, strong user), 0-based
_ADDER3_ROLES = {0: (2, 1), 1: (0, 2), 2: (1, 0)}


def adder3() -> Dmic:
    """Binary inputs; ``Y_j = (X_vs, X_j + 2 X_strong)`` coded as ``4 X_vs + X_j + 2 X_strong``."""
    def outputs(xs):
        return tuple(4 * xs[vs] + xs[j] + 2 * xs[st] for j, (vs, st) in _ADDER3_ROLES.items())
    return Dmic.from_function((2, 2, 2), (8, 8, 8), outputs)


def adder3_pattern() -> InterferencePattern:
    return InterferencePattern.from_strong([_ADDER3_ROLES[j][1] for j in range(3)])
