import numpy as np
import pytest

from lpsquare.exceptions import DomainError
from lpsquare.operators import evaluate_on_grid
from lpsquare.oracles import dense_oracle, dense_oracle_many, monte_carlo_oracle


def test_dense_low_resolution_agrees(kernel, atom, params):
    x = np.array([[8.0, 0.0]])
    route = evaluate_on_grid("mu_s", kernel, atom, x, params).values[0]
    ref = dense_oracle(kernel, atom, x[0], "mu_s", resolution=8)
    assert abs(route / ref - 1) < 0.03


def test_dense_self_convergence(kernel, atom):
    X = np.array([[0.0, 16.0]])
    coarse = dense_oracle_many(kernel, atom, X, "mu_star", resolution=8)
    fine = dense_oracle_many(kernel, atom, X, "mu_star", resolution=16)
    assert abs(coarse[0] / fine[0] - 1) < 0.02


def test_dense_zero_function(kernel, atom):
    zero = atom.scaled(0.0)
    assert dense_oracle(kernel, zero, [8.0, 0.0], "mu_s", resolution=8) == 0.0


def test_dense_unknown_tag(kernel, atom):
    with pytest.raises(DomainError):
        dense_oracle(kernel, atom, [8.0, 0.0], "mu_x", resolution=8)


def test_monte_carlo_seeded(kernel, atom, params):
    X = np.array([[16.0, 0.0]])
    m1, s1 = monte_carlo_oracle(kernel, atom, X, "mu_star", n_y=4000, seed=3)
    m2, s2 = monte_carlo_oracle(kernel, atom, X, "mu_star", n_y=4000, seed=3)
    assert m1[0] == m2[0] and s1[0] == s2[0]
    route = evaluate_on_grid("mu_star", kernel, atom, X, params).values[0]
    assert abs(route ** 2 - m1[0]) < 4 * s1[0]
