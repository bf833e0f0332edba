#!/usr/bin/env python3
"""Empirical convergence orders of the time-stepping building blocks.

Runs two studies and prints one table each:

1. L1 Caputo scheme on f(t) = t^2 against the closed form, for several
   fractional orders alpha.  The scheme's error should shrink like
   tau^(2 - alpha), so the fitted slope should sit near 2 - alpha.

2. Residual of the fractional Duhamel identity for the forward solution
   with g = phi_1 + phi_2 and rho(t) = 1 + t.  The residual combines the
   L1 derivative with product-trapezoid convolution; successive halvings
   should shrink it by roughly 2^(1 + alpha) at smooth rho.

Usage: python3 scripts/convergence_study.py
"""

import math

import numpy as np

from fracsource.forward import duhamel_residual
from fracsource.fracops import FractionalOrder, TimeGrid, TimeSeries, caputo_l1
from fracsource.profiles import make_rho
from fracsource.report import relative_l2
from fracsource.spectral import Domain1D, SpectralField

GRIDS = [64, 128, 256, 512, 1024]


def caputo_t2_error(alpha: FractionalOrder, n_steps: int) -> float:
    grid = TimeGrid(1.0, n_steps)
    t = grid.nodes()
    approx = caputo_l1(TimeSeries(grid, t**2), alpha).values
    exact = 2.0 * t ** (2.0 - alpha.alpha) / math.gamma(3.0 - alpha.alpha)
    return relative_l2(approx, exact, skip_first=1)


def duhamel_residual_norm(alpha: FractionalOrder, n_steps: int) -> float:
    domain = Domain1D(1.0, 8)
    grid = TimeGrid(1.0, n_steps)
    g = SpectralField(domain, np.array([1.0, 1.0, 0, 0, 0, 0, 0, 0]))
    rho = make_rho(grid, "affine", intercept=1.0, slope=1.0)
    return duhamel_residual(g, rho, alpha, grid)


def print_study(title, expected, error_fn, alphas):
    print(title)
    print(f"{'alpha':>6} {'n_steps':>8} {'error':>12} {'slope':>7} {'expected':>9}")
    for a in alphas:
        order = FractionalOrder(a)
        prev = None
        for n in GRIDS:
            err = error_fn(order, n)
            slope = "" if prev is None else f"{math.log2(prev / err):7.3f}"
            print(f"{a:6.2f} {n:8d} {err:12.4e} {slope:>7} {expected(a):9.2f}")
            prev = err
    print()


def main():
    print_study(
        "L1 Caputo derivative of t^2 (relative L2 error vs closed form)",
        lambda a: 2.0 - a,
        caputo_t2_error,
        [0.3, 0.5, 0.7, 0.9],
    )
    print_study(
        "Duhamel identity residual, g = phi_1 + phi_2, rho = 1 + t (relative sup defect)",
        lambda a: 1.0 + a,
        duhamel_residual_norm,
        [0.5, 0.9],
    )


if __name__ == "__main__":
    main()
