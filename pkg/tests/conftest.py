"""Shared helpers: order separation of oracle solutions by detuning parity.

Every perturbative order k scales as 1/delta_big**k with coefficients that do
not otherwise depend on delta_big, so solving at +-delta_big and splitting the
harmonic coefficients into even and odd parts isolates the even-order and
odd-order content up to two-order-higher contamination.
"""

import numpy as np
import pytest

from tpa import oracle
from tpa.core import NormalizedParams


def build_pair(delta, a, mu, phi, dbig):
    plus = NormalizedParams.build(delta_tilde=delta, a_ratio=a, mu=mu,
                                  phi_tilde=phi, delta_big_tilde=dbig)
    minus = NormalizedParams.build(delta_tilde=delta, a_ratio=a, mu=mu,
                                   phi_tilde=phi, delta_big_tilde=-dbig)
    return plus, minus


def solve_pair(params_pair, omega, n_max=9):
    return tuple(
        oracle.solve_steady_state(oracle.SteadyStateProblem(p, omega, n_max))
        for p in params_pair)


def odd_part(rho_plus, rho_minus, i, j, n):
    return 0.5 * (rho_plus.coeff(i, j, n) - rho_minus.coeff(i, j, n))


def even_part(rho_plus, rho_minus, i, j, n):
    return 0.5 * (rho_plus.coeff(i, j, n) + rho_minus.coeff(i, j, n))


def rel_err(got, want):
    got, want = complex(got), complex(want)
    return abs(got - want) / max(abs(want), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
