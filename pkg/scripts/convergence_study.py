#!/usr/bin/env python3
"""Mean-field convergence study: ground-energy error against N.

Diagonalizes N in {4, 8, ..., 2^k} bosons on the unit-scale torus
(L = 2*pi, modes |n| <= 2) with the weak Gaussian interaction, compares
against condensate constant + truncated Bogoliubov energy, and fits the
log-log rate.  Prints a table and the fitted slope.
"""

import argparse
import math

from bogospec.fock_ed import EDConfig
from bogospec.model import LatticeSpec, Potential
from bogospec.verify import compare_spectra, scaling_fit

SECTORS = [(0,), (1,), (-1,), (2,), (-2,)]


def run(n_max: int, amplitude: float, width: float) -> None:
    lat = LatticeSpec(2.0 * math.pi, 1)
    pot = Potential.gaussian(amplitude, width, 1)
    ns = []
    n = 4
    while n <= n_max:
        ns.append(n)
        n *= 2
    series = [EDConfig(n, lat, pot, mode_radius=2.0, max_excited=8) for n in ns]
    comp = compare_spectra(series, SECTORS, j_max=1)
    print(f"truncated Bogoliubov energy: {comp.e_bog_truncated:.12g}")
    print(f"{'N':>6} {'ground error':>14} {'|K^1(1) err|':>14}")
    for i, n in enumerate(comp.n_values):
        k_err = comp.gap_errors[((1,), 1)][i]
        print(f"{n:>6} {comp.ground_errors[i]:>14.6e} {k_err:>14.6e}")
    fit = scaling_fit(list(zip(comp.n_values, comp.ground_errors)))
    print(f"fitted log-log slope: {fit.slope:.4f} (bound {fit.slope_bound})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=64)
    ap.add_argument("--amplitude", type=float, default=0.1)
    ap.add_argument("--width", type=float, default=5.0)
    args = ap.parse_args()
    run(args.n_max, args.amplitude, args.width)
