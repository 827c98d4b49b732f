import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conekit import exact  # noqa: E402

F = Fraction


def horn_matrix():
    H = -np.ones((5, 5), dtype=int)
    for i in range(5):
        H[i, i] = 1
        H[i, (i + 1) % 5] = H[(i + 1) % 5, i] = -1
        H[i, (i + 2) % 5] = H[(i + 2) % 5, i] = 1
    return exact.exact_array(H)


# COR(2) facet -z11 - z22 + z12 >= -1 as a symmetric quadratic form
FACET_Q = exact.exact_array([[-1, F(1, 2)], [F(1, 2), -1]])


@pytest.fixture
def facet_q():
    return FACET_Q.copy()


@pytest.fixture(scope="session")
def cor2_cert():
    from conekit.cpext import factorize_cor_slack

    return factorize_cor_slack(2)
