"""The two bound curves, their crossing and the resulting bound on c1.

f1 comes from the Heinz bound and increases in x = |w|^2.  f2 comes from
Hall's coefficient inequality and decreases.  Their crossing solves a
palindromic quartic whose reduced quadratic has a closed-form root.
"""

import numpy as np

from minigraph.bounds import REGISTRY, closed_form_bound, dense_max_min, f1, f2, intersection_quartic
from minigraph.scherk import match_quadrilateral


def main():
    inter = intersection_quartic()
    print(f"x*  = {inter.x_star:.17g}")
    print(f"y*  = {inter.y_star:.17g}  (rejected root {inter.y_rejected:.6f} gives complex x)")
    print(f"quartic residual at x*: {inter.quartic_residual:.1e}")
    print(f"bound = {closed_form_bound():.15f}; dense-grid max of min(f1, f2) = {dense_max_min()[1]:.15f}")

    print("\n   x      f1        f2      c1 from matched step map")
    for w in np.linspace(0, 0.9, 10):
        x = w * w
        c1 = match_quadrilateral(w)[1].c1
        print(f"{x:6.3f} {f1(x):9.5f} {f2(x):9.5f} {c1:9.5f}")

    print("\nregistry:", {k: round(v, 6) for k, v in REGISTRY.as_dict().items()})


if __name__ == "__main__":
    main()
