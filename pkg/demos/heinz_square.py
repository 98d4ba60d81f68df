"""The square step map and the Heinz constant.

Four boundary arcs of length pi/2 carry the vertices of the inscribed square.
The Poisson extension is a harmonic map onto the square with dilatation -z^2.
Its derivative at the origin, 2 sqrt(2)/pi, gives c0(0) = pi^2/2.
"""

import math

import numpy as np

from minigraph.diskfield import build_grid
from minigraph.scherk import StepBoundary, c0_c1, dilatation_closed_form, dilatation_of, match_quadrilateral, poisson_step_map, step_f_z0


def main():
    sq = StepBoundary.square()
    print("prevertices:", np.round(sq.t, 6))
    print("vertex values:", np.round(sq.a, 6))

    fz0 = step_f_z0(sq).real
    print(f"f_z(0) = {fz0:.15f}   (2 sqrt2/pi = {2 * math.sqrt(2) / math.pi:.15f})")
    c0, c1 = c0_c1(0, fz0)
    print(f"c0(0) = {c0:.12f}   pi^2/2 = {math.pi**2 / 2:.12f}")

    z = np.array([0.3 + 0.2j, -0.5j])
    print("closed-form dilatation at", z, "->", np.round(dilatation_closed_form(sq, z), 12), " (-z^2 =", np.round(-z * z, 12), ")")

    grid = build_grid(64, 256)
    sample = dilatation_of(poisson_step_map(sq, grid))
    inner = grid.radial_nodes <= 0.6
    err = np.abs(sample.values[inner] + grid.z[inner] ** 2).max()
    print(f"spectral dilatation vs -z^2 on |z| <= 0.6: max error {err:.2e}")

    print("\nMatched step maps for other w (continuation from the square):")
    for w in (0.0, 0.3, 0.6, 0.3j):
        _, rep = match_quadrilateral(w)
        print(f"  w = {w!s:>6}: f_z(0) = {rep.f_z0:.8f}  c0 = {rep.c0:.6f}  c1 = {rep.c1:.6f}  mismatch {rep.details['mismatch']:.1e}")


if __name__ == "__main__":
    main()
