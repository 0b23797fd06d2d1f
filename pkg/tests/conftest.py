"""Shared fixtures: the two reference systems and their known solutions.

The reference values (solutions, angle branches, chain parameter rows) are
frozen from hand calculations with the cofactor formulas plus previously
verified runs; every test states which independent route pins its numbers.
"""

import numpy as np
import pytest


class TwoEquations:
    """2x2 reference system with unit-norm rhs."""

    a = np.array([[-1.8, 0.6], [-0.4, 1.4]])
    b = np.array([-0.6, 0.8])
    det = -2.28                     # hand cofactor: (-1.8)(1.4) - (0.6)(-0.4)
    # adjugate / det, to 5 decimals
    inv = np.array([[-0.61404, 0.26316], [-0.17544, 0.78947]])
    x = np.array([0.5789, 0.7368])  # 4-decimal reference solution
    # reference angle branches reproducing the solution amplitudes
    betas = (-np.pi, 0.64350)
    alphas_k1 = (2.73670, 5.55160)
    alphas_k2 = (1.78947, 5.34119)


class ThreeEquations:
    """3x3 reference system used across circuit, chain and calibration runs."""

    a = np.array([[0.9, -0.6, -1.8],
                  [1.6, -0.5, -0.6],
                  [0.8, -1.4, -0.5]])
    b = np.array([-0.5, 0.7, -0.5])
    det = 2.589                     # hand cofactor expansion along row 1
    x = np.array([0.8185, 0.6578, 0.4677])   # 4-decimal reference solution
    b_norm = np.sqrt(0.99)
    betas = (2.94126, 3.66810, 4.09214)
    alphas = {
        1: (1.83056, 6.05229, 5.13645),
        2: (1.25816, 5.13077, 4.85991),
        3: (5.88224, 2.89173, 5.36144),
    }
    # chain parameter rows (d2, d3, omega1..omega4, t) solving one variable
    # each at readout site 3
    chain_rows = {
        1: ((1.92609, 1.10051), (1.88349, -0.82883, -1.05897, 0.37563), 1.51485),
        2: ((0.63225, 1.59251), (0.05200, 2.89465, 1.41259, -1.63479), 2.05543),
        3: ((1.52851, 1.22234), (1.74816, 1.62240, 2.16566, 2.87055), 3.64261),
    }


@pytest.fixture(scope="session")
def two_eq():
    return TwoEquations


@pytest.fixture(scope="session")
def three_eq():
    return ThreeEquations


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
