"""Solve one member of the dilatation family, check its curvature, export a mesh.

Usage: python demos/solve_and_export.py [w] [k] [out.obj]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from minigraph.beltrami import BeltramiCoefficient, extract_coefficients, hall_quantity, solve_self_map
from minigraph.bounds import hall_lower_bound_a1
from minigraph.cli import write_obj
from minigraph.diskfield import build_grid
from minigraph.weierstrass import (
    WeierstrassData,
    curvature,
    graph_curvature,
    parameterize_surface,
    probe_points,
    reconstruct_graph,
)


def main(w=0.3, k=0.5, out=None):
    grid = build_grid(64, 256)
    m = solve_self_map(BeltramiCoefficient.family(w, k), grid)
    print(f"w = {w}, k = {k}: {m.iterations} iterations, interior residual {m.residual_norm:.2e}")
    print(f"f_z(0) = {m.f_z_at_0:.10f}")

    c = extract_coefficients(m)
    print(f"a1 = {c.a1:.8f}, b1/a1 = {c.b1 / c.a1:.8f} (w^2 = {w * w})")
    print(f"Hall quantity {hall_quantity(c, abs(w)):.6f} >= {hall_lower_bound_a1(abs(w)):.6f}")

    data = WeierstrassData.from_solved(m)
    surface = parameterize_surface(data)
    print(f"K at the centre: {surface.center_curvature:.8f}")
    print("probe   K (Weierstrass)   K (graph, finite differences)")
    for zp, fp in zip(probe_points(5, seed=0), m.f(probe_points(5, seed=0))):
        K_fd = graph_curvature(reconstruct_graph(surface, (fp.real, fp.imag), 1e-2, 2))
        print(f"{zp:.3f}  {float(curvature(np.array([zp]), data)[0]):.8f}   {K_fd:.8f}")

    out = Path(out) if out else Path(tempfile.mkdtemp()) / "surface.obj"
    n = write_obj(out, surface)
    print(f"wrote {n} vertices to {out}")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(float(args[0]) if args else 0.3, float(args[1]) if len(args) > 1 else 0.5, args[2] if len(args) > 2 else None)
