"""Command-line front end.

Subcommands: solve, sweep-k, sweep-w, constants, theorem2, export-surface.
Every JSON report carries the package version and a hash of the effective
configuration.  Exit codes: 0 success, 1 invalid input, 2 solver failure,
3 I/O failure.

A config file (``--config``) holds ``key = value`` lines; ``#`` starts a
comment.  Recognised keys: grid, tol, residual_tol, interior_radius,
variant, k_list, w_grid, out, seed.  Command-line flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .beltrami import (
    BeltramiCoefficient,
    ConvergenceError,
    NoisyMapError,
    SolverConfig,
    extract_coefficients,
    solve_self_map,
)
from .bounds import (
    REGISTRY,
    closed_form_bound,
    combined_pointwise_bound,
    dense_max_min,
    intersection_quartic,
    quartic,
)
from .diskfield import build_grid
from .scherk import (
    ExtrapolationError,
    NoMatchError,
    default_grid_for_k,
    default_k_list,
    k_sweep_extrapolate,
    sup_sweep,
    sweep_k,
)
from .weierstrass import (
    FamilyParameter,
    FoldOverError,
    IntegrationInconsistencyError,
    WeierstrassData,
    curvature,
    curvature_at_origin_family,
    graph_curvature,
    parameterize_surface,
    probe_points,
    reconstruct_graph,
)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
VARIANT_NAMES = {"printed": "as_printed", "conjugated": "conjugated", "auto": "auto"}
DEFAULT_W_GRID = tuple(round(0.1 * i, 1) for i in range(10))


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    grid: tuple[int, int] | None = None
    tol: float = 1e-10
    residual_tol: float = 1e-3
    interior_radius: float = 0.6
    variant: str = "conjugated"
    k_list: tuple[float, ...] | None = None  # None: steepness-based default per w
    w_grid: tuple[complex, ...] = DEFAULT_W_GRID
    out: str = "."
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.tol > 0 and self.residual_tol > 0):
            raise UsageError("tolerances must be positive")
        if not 0 < self.interior_radius <= 1:
            raise UsageError("interior_radius must lie in (0, 1]")
        if self.variant not in ("conjugated", "as_printed", "auto"):
            raise UsageError(f"unknown variant {self.variant!r}")
        for k in self.k_list or ():
            if not 0 <= k <= 0.97:
                raise UsageError(f"k = {k} outside [0, 0.97]")
        for w in self.w_grid:
            if not abs(w) < 1:
                raise UsageError(f"w = {w} outside the open unit disk")

    def solver(self) -> SolverConfig:
        return SolverConfig(
            tol=self.tol,
            max_iter=3000,
            residual_tol=self.residual_tol,
            interior_radius=self.interior_radius,
            variant=self.variant,
        )

    def grid_for(self, k: float, w=0.0):
        return build_grid(*self.grid) if self.grid else default_grid_for_k(k, w)

    def digest(self) -> str:
        d = asdict(self)
        d.pop("extra")
        d.pop("out")  # where results land does not change them
        d["w_grid"] = [[complex(w).real, complex(w).imag] for w in self.w_grid]
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def parse_complex(text: str) -> complex:
    """'0.3' or '0.3,0.1' (re,im)."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"cannot parse {text!r} as a complex number (use 're' or 're,im')")


def parse_grid(text: str) -> tuple[int, int]:
    try:
        nr, na = (int(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise UsageError(f"grid must look like 64x256, got {text!r}") from None
    try:
        build_grid(nr, na)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return nr, na


def parse_float_list(text: str) -> tuple[float, ...]:
    text = str(text).strip().strip("[]")
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def parse_w_list(text: str) -> tuple[complex, ...]:
    """Semicolon-separated complex values, or a comma list of reals."""
    text = str(text).strip().strip("[]")
    if not text:
        return ()
    if ";" in text:
        return tuple(parse_complex(v) for v in text.split(";") if v.strip())
    return tuple(complex(v, 0.0) for v in parse_float_list(text))


def read_config_file(path: str) -> dict:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


_CONVERTERS = {
    "grid": parse_grid,
    "tol": float,
    "residual_tol": float,
    "interior_radius": float,
    "variant": lambda v: VARIANT_NAMES.get(v, v),
    "k_list": parse_float_list,
    "w_grid": parse_w_list,
    "out": str,
    "seed": int,
}


def build_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        for key, raw in read_config_file(args.config).items():
            if key not in _CONVERTERS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                values[key] = _CONVERTERS[key](raw)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
    flag_map = {
        "grid": args.grid,
        "tol": args.tol,
        "residual_tol": args.residual_tol,
        "variant": VARIANT_NAMES[args.variant] if args.variant else None,
        "k_list": getattr(args, "k_list", None),
        "w_grid": getattr(args, "w_list", None),
        "out": args.out,
        "seed": args.seed,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = _CONVERTERS[key](val) if isinstance(val, str) and key not in ("out", "variant") else val
    return RunConfig(**values)


# ----------------------------------------------------------------------------
# output helpers


def _json_safe(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict, config: RunConfig):
    body = dict(payload)
    body["version"] = __version__
    body["config_hash"] = config.digest()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(body), indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _out_dir(config: RunConfig) -> Path:
    return Path(config.out)


# ----------------------------------------------------------------------------
# commands


def _solve(w: complex, k: float, config: RunConfig):
    if not abs(w) < 1:
        raise UsageError(f"|w| must be < 1, got {abs(w)}")
    if not 0 <= k <= 0.97:
        raise UsageError(f"k must lie in [0, 0.97], got {k}")
    omega = BeltramiCoefficient.family(w, k)
    return solve_self_map(omega, config.grid_for(k, w), config.solver())


def cmd_solve(args, config: RunConfig) -> int:
    w, k = parse_complex(args.w), float(args.k)
    m = _solve(w, k, config)
    K0 = curvature_at_origin_family(FamilyParameter(w, k), m.f_z_at_0)
    try:
        coeffs = extract_coefficients(m)
        coeff_block = {"a0": coeffs.a0, "a1": coeffs.a1, "b1": coeffs.b1}
    except NoisyMapError as exc:
        coeff_block = {"error": str(exc)}
    report = {
        "w": w,
        "k": k,
        "grid": list(m.grid.key()),
        "f_z0": m.f_z_at_0,
        "K_at_0": K0,
        "residuals": {
            "beltrami_interior": m.residual_norm,
            "beltrami_all_nodes": m.boundary_residual,
            "rival_variant": m.rival_residual,
            "last_step": m.history[-1] if m.history else 0.0,
        },
        "iterations": m.iterations,
        "damping": m.damping,
        "variant": m.variant_flag,
        "coefficients": coeff_block,
        "boundary_modulus": [float(np.abs(m.f_values.values[-1]).min()), float(np.abs(m.f_values.values[-1]).max())],
    }
    write_json(_out_dir(config) / "solve.json", report, config)
    print(json.dumps({"f_z0": m.f_z_at_0, "K_at_0": K0, "residual": m.residual_norm}))
    return EXIT_OK


def cmd_sweep_k(args, config: RunConfig) -> int:
    w = parse_complex(args.w)
    if not abs(w) < 1:
        raise UsageError(f"|w| must be < 1, got {abs(w)}")
    ks = list(config.k_list if config.k_list is not None else default_k_list(w))
    if any(b <= a for a, b in zip(ks[:-1], ks[1:])):
        raise UsageError("k list must be increasing")
    pts = sweep_k(w, ks, lambda k: config.grid_for(k, w), config.solver())
    rows = [[p.k, p.f_z0, p.abs_K0, p.grid_error, p.residual, p.iterations] for p in pts]
    header = ["k", "f_z0", "abs_K0", "grid_error", "residual", "iterations"]
    write_csv(_out_dir(config) / "sweep_k.csv", header, rows)
    payload = {"w": w, "points": len(pts)}
    if len(pts) >= 3:
        try:
            rep = k_sweep_extrapolate(w, ks, points=pts)
            payload.update({"limit": rep.c0, "error_estimate": rep.error_estimate, "c1": rep.c1})
        except ExtrapolationError as exc:
            payload["extrapolation_error"] = str(exc)
    write_json(_out_dir(config) / "sweep_k.json", payload, config)
    return EXIT_OK


def cmd_sweep_w(args, config: RunConfig) -> int:
    res = sup_sweep(config.w_grid)
    rows = []
    for r in res.reports:
        x = abs(r.w) ** 2
        rows.append([r.w.real, r.w.imag, r.f_z0, r.c0, r.c1, float(combined_pointwise_bound(x))])
    write_csv(_out_dir(config) / "sweep_w.csv", ["w_re", "w_im", "f_z0", "c0", "c1", "pointwise_bound"], rows)
    write_json(
        _out_dir(config) / "sweep_w.json",
        {
            "heinz_estimate": res.heinz_estimate,
            "hopf_estimate": res.hopf_estimate,
            "skipped": [[w, msg] for w, msg in res.skipped],
        },
        config,
    )
    return EXIT_OK


def cmd_constants(args, config: RunConfig) -> int:
    payload = {"registry": REGISTRY.as_dict()}
    if config.w_grid:
        res = sup_sweep(config.w_grid)
        payload["heinz_estimate"] = res.heinz_estimate
        payload["hopf_estimate"] = res.hopf_estimate
        payload["per_w"] = [
            {"w": r.w, "f_z0": r.f_z0, "c0": r.c0, "c1": r.c1, "method": r.method} for r in res.reports
        ]
        payload["skipped"] = [[w, msg] for w, msg in res.skipped]
    write_json(_out_dir(config) / "constants.json", payload, config)
    return EXIT_OK


def bound_report() -> dict:
    inter = intersection_quartic()
    bound = closed_form_bound()
    x_grid, v_grid = dense_max_min()
    return {
        "x_star": inter.x_star,
        "y_star": inter.y_star,
        "y_star_closed_form": "(86 + 16*sqrt(31))/5",
        "bound": bound,
        "bound_closed_form": "2*pi^2*(2 + sqrt(31))/27",
        "rejected_root_y": inter.y_rejected,
        "residuals": {
            "quartic_at_x_star": float(abs(quartic(inter.x_star))),
            "quartic_extended": inter.quartic_residual,
            "reduced_equation": inter.reduced_residual,
            "dense_grid_max_rel": abs(v_grid - bound) / bound,
        },
        "dense_grid_argmax": x_grid,
    }


def cmd_theorem2(args, config: RunConfig) -> int:
    write_json(_out_dir(config) / "theorem2.json", bound_report(), config)
    return EXIT_OK


def write_obj(path: Path, surface) -> int:
    """Vertices: centre then ring by ring; triangles fan out from the centre."""
    grid = surface.grid
    nr, na = grid.shape
    pos = surface.positions
    nrm = surface.normals
    lines = ["# minimal graph mesh", f"# vertices {nr * na + 1}"]
    verts = [surface.center_position] + [tuple(p) for p in pos.reshape(-1, 3)]
    normals = [surface.center_normal] + [tuple(n) for n in nrm.reshape(-1, 3)]
    lines += ["v " + " ".join(_fmt(c) for c in v) for v in verts]
    lines += ["vn " + " ".join(_fmt(c) for c in n) for n in normals]

    def idx(i, j):
        return 2 + i * na + (j % na)

    faces = []
    for j in range(na):
        faces.append((1, idx(0, j), idx(0, j + 1)))
    for i in range(nr - 1):
        for j in range(na):
            a, b, c, d = idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)
            faces.append((a, d, c))
            faces.append((a, c, b))
    lines += ["f " + " ".join(f"{v}//{v}" for v in f) for f in faces]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return len(verts)


def cmd_export_surface(args, config: RunConfig) -> int:
    w, k = parse_complex(args.w), float(args.k)
    m = _solve(w, k, config)
    data = WeierstrassData.from_solved(m)
    surface = parameterize_surface(data)
    # graph check: a small patch at the centre must invert cleanly
    reconstruct_graph(surface, (0.0, 0.0), 1e-2, 2)
    path = Path(args.path) if args.path else _out_dir(config) / "surface.obj"
    n = write_obj(path, surface)
    K0 = curvature_at_origin_family(FamilyParameter(w, k), m.f_z_at_0)
    # spot check at seeded probes: graph curvature of the reconstructed patch vs Weierstrass
    probes = probe_points(5, config.seed)
    worst = 0.0
    for zp, fp in zip(probes, m.f(probes)):
        K_fd = graph_curvature(reconstruct_graph(surface, (fp.real, fp.imag), 1e-2, 2))
        K_w = float(curvature(np.array([zp]), data)[0])
        worst = max(worst, abs(K_fd - K_w) / max(abs(K_w), 1e-300))
    write_json(
        path.with_suffix(".json"),
        {"w": w, "k": k, "vertices": n, "K_at_0": K0, "f_z0": m.f_z_at_0, "probe_curvature_rel_error": worst},
        config,
    )
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", help="polar grid as NRxNA, e.g. 64x256")
    common.add_argument("--tol", type=float, help="fixed-point step tolerance")
    common.add_argument("--residual-tol", type=float, help="Beltrami residual tolerance")
    common.add_argument("--variant", choices=sorted(VARIANT_NAMES), help="fixed-point operator variant")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for probe placement")
    common.add_argument("--config", help="key = value config file")

    p = _Parser(prog="minigraph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="solve one member of the family")
    s.add_argument("--w", default="0", help="w as 're' or 're,im'")
    s.add_argument("--k", type=float, default=0.5)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep-k", parents=[common], help="sweep k at fixed w and extrapolate")
    s.add_argument("--w", default="0")
    s.add_argument("--k-list", help="comma-separated k values")
    s.set_defaults(func=cmd_sweep_k)

    s = sub.add_parser("sweep-w", parents=[common], help="extremal constants over a w grid")
    s.add_argument("--w-list", help="comma list of reals or ';'-separated 're,im' pairs")
    s.set_defaults(func=cmd_sweep_w)

    s = sub.add_parser("constants", parents=[common], help="registry plus Heinz/Hopf estimates")
    s.add_argument("--w-list", help="w grid (empty string: registry only)")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("theorem2", parents=[common], help="closed-form Hopf-type bound")
    s.set_defaults(func=cmd_theorem2)

    s = sub.add_parser("export-surface", parents=[common], help="write the surface as an OBJ mesh")
    s.add_argument("--w", default="0")
    s.add_argument("--k", type=float, default=0.5)
    s.add_argument("--path", help="OBJ file (default OUT/surface.obj)")
    s.set_defaults(func=cmd_export_surface)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, NoMatchError, FoldOverError, IntegrationInconsistencyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


def main_entry():  # console-script shim
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
