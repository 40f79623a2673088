"""Command-line driver.

Verbs: verify, hardy-scan, sigma-inf, evolve, refine.  Configuration is a
JSON document plus a handful of flag overrides; scans and runs are written
as CSV (atomically, with the full config recorded in a comment row).
Exit codes: 0 success, 1 check failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import calculus, hardy, parabolic
from .errors import CarnotError
from .groups import (
    CarnotGroup,
    GroupKind,
    group_from_json,
    group_to_json,
    make_heisenberg,
    multiply,
)
from .hardy import PotentialKind, PotentialSpec

__all__ = ["main", "run_verify"]


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    if args.p is not None:
        cfg["p"] = args.p
    if args.lam is not None:
        cfg.setdefault("potential", {})["lambda"] = args.lam
    if args.grid is not None:
        cfg.setdefault("grid", {})["n_xy"] = args.grid
        cfg.setdefault("grid", {})["n_ell"] = args.grid
    if args.out is not None:
        cfg["out"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return cfg


def _group(cfg: dict) -> CarnotGroup:
    return group_from_json(cfg["group"]) if "group" in cfg else make_heisenberg(1)


def _potential(cfg: dict, g: CarnotGroup, p: float) -> PotentialSpec | None:
    pot = cfg.get("potential")
    if pot is None:
        return None
    lam = pot.get("lambda", 1.0)
    if isinstance(lam, str) and lam.endswith("C"):
        # e.g. "2C" means 2 * hardy_constant
        lam = float(lam[:-1] or 1.0) * hardy.hardy_constant(g, p)
    kind = PotentialKind(pot.get("kind", "HardyPure"))
    return PotentialSpec(kind=kind, lam=float(lam),
                         beta=float(pot.get("beta", 0.0)),
                         alpha=float(pot.get("alpha", 0.0)))


def _write_csv(path: str, cfg: dict, header: list[str], rows: list[list]) -> None:
    lines = ["# config: " + json.dumps(cfg, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    body = "\n".join(lines) + "\n"
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

_COMMUTATOR_FIELDS = [
    ("ell", lambda q: q[:, 2], lambda q: np.ones(len(q))),
    ("x^2*y", lambda q: q[:, 0] ** 2 * q[:, 1], lambda q: np.zeros(len(q))),
    ("x*y*ell", lambda q: q[:, 0] * q[:, 1] * q[:, 2], lambda q: q[:, 0] * q[:, 1]),
    ("y*ell", lambda q: q[:, 1] * q[:, 2], lambda q: q[:, 1]),
    ("x+ell^2", lambda q: q[:, 0] + q[:, 2] ** 2, lambda q: 2.0 * q[:, 2]),
]


def run_verify(cfg: dict) -> tuple[list[str], bool]:
    """Run the invariant suite; returns (report lines, all passed)."""
    g = _group(cfg)
    rng = np.random.default_rng(cfg.get("seed", 0))
    lines: list[str] = []
    ok = True

    def check(name: str, residual: float, tol: float):
        nonlocal ok
        passed = residual <= tol
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: residual={residual:.3e} tol={tol:.1e}")

    # norm axioms under dilation and inversion
    pts = calculus.random_annulus_points(g, rng, 1000, 0.5, 2.0)
    lams = rng.uniform(0.1, 3.0, 1000)
    N = calculus.homogeneous_norm(g, pts)
    scale = lams[:, None] ** np.asarray(g.dilation_exponents, dtype=float)[None, :]
    res_dil = float(np.max(np.abs(calculus.homogeneous_norm(g, pts * scale) - lams * N) / (lams * N)))
    res_inv = float(np.max(np.abs(calculus.homogeneous_norm(g, -pts) - N) / N))
    check("norm-dilation-homogeneity", res_dil, 1e-12)
    check("norm-inversion-symmetry", res_inv, 1e-12)

    # associativity and first-layer additivity
    x, y, w = (calculus.random_annulus_points(g, rng, 200, 0.2, 1.5) for _ in range(3))
    lhs = multiply(g, multiply(g, x, y), w)
    rhs = multiply(g, x, multiply(g, y, w))
    check("group-associativity", float(np.max(np.abs(lhs - rhs))), 1e-12)
    m = g.horizontal_dim
    check("first-layer-additivity",
          float(np.max(np.abs(multiply(g, x, y)[:, :m] - x[:, :m] - y[:, :m]))), 1e-14)

    # commutator relations (Heisenberg chart only)
    if g.kind is GroupKind.HEISENBERG and g.heisenberg_n == 1:
        q = calculus.random_annulus_points(g, rng, 20, 0.5, 2.0)
        worst = 0.0
        s = calculus.FDScheme(h=1e-3)
        for _name, f, dfdl in _COMMUTATOR_FIELDS:
            fld = calculus.ScalarField(evaluate=f)
            got = calculus.commutator_apply(g, 1, 2, fld, q, s)
            worst = max(worst, float(np.max(np.abs(got + 4.0 * dfdl(q)))))
        check("commutator-[X,Y]=-4T", worst, 1e-6)

    # closed-form norm gradient vs finite differences
    pts = calculus.random_annulus_points(g, rng, 200, 0.5, 2.0)
    nf = calculus.ScalarField(evaluate=lambda q: calculus.homogeneous_norm(g, q))
    fd_grad = calculus.horizontal_gradient(g, nf, pts, calculus.FDScheme(h=1e-4))
    cf = np.sqrt(np.sum(np.asarray(calculus.norm_gradient(g, pts)) ** 2, axis=-1))
    check("norm-gradient-closed-form",
          float(np.max(np.abs(np.sqrt(np.sum(fd_grad ** 2, axis=-1)) - cf))), 1e-6)

    # polarizability: the norm solves the infinity-Laplace equation
    pts = calculus.random_annulus_points(g, rng, 1000, 0.5, 2.0)
    res = calculus.infinity_laplacian(g, calculus.norm_field(g), pts, calculus.FDScheme(h=1e-3))
    check("polarizability-residual", float(np.max(np.abs(res))), 1e-4)

    # fundamental solution residual, second-order in h
    Q = g.homogeneous_dim
    for p in (1.5, 2.0, 3.0):
        fld = calculus.fundamental_solution_field(g, p)
        pts = calculus.random_annulus_points(g, rng, 50, 0.5, 2.0)
        r1 = np.abs(calculus.sub_p_laplacian(g, p, fld, pts, calculus.FDScheme(h=2e-3)))
        r2 = np.abs(calculus.sub_p_laplacian(g, p, fld, pts, calculus.FDScheme(h=1e-3)))
        check(f"fundamental-residual-p={p}", float(np.max(r2)), 1e-2)
        check(f"fundamental-convergence-p={p}", float(np.median(r2) / max(np.median(r1), 1e-300)), 0.5)

    # Hardy weight identity (Heisenberg closed form)
    if g.kind is GroupKind.HEISENBERG:
        nh = g.heisenberg_n
        pts = calculus.random_annulus_points(g, rng, 1000, 0.3, 3.0)
        for p in (1.5, 2.0, 3.0):
            w1 = calculus.hardy_weight(g, p, pts)
            z = np.sqrt(np.sum(pts[:, :2 * nh] ** 2, axis=-1))
            w2 = z ** p / (np.sum(pts[:, :2 * nh] ** 2, axis=-1) ** 2 + pts[:, -1] ** 2) ** (p / 2)
            check(f"hardy-weight-identity-p={p}", float(np.max(np.abs(w1 - w2))), 1e-12)

    # sampled infima of the vector inequalities
    dim = 3
    worst_sub, worst_super = np.inf, np.inf
    for _ in range(2000):
        a = rng.normal(size=dim) * 10 ** rng.uniform(-2, 1)
        b = rng.normal(size=dim) * 10 ** rng.uniform(-2, 1)
        worst_sub = min(worst_sub, calculus.subquadratic_convexity_ratio(1.5, a, b))
        worst_super = min(worst_super, calculus.superquadratic_convexity_ratio(3.0, a, b))
    check("inequality-ratio-p<2-positive", -min(worst_sub, 0.0), 0.0)
    check("inequality-ratio-p>2-positive", -min(worst_super, 0.0), 0.0)

    # elementary scalar inequality
    worst = np.inf
    for _ in range(2000):
        p = rng.uniform(1.01, 4.0)
        w1, w2 = 10 ** rng.uniform(-2, 2, size=2)
        if w1 != w2:
            worst = min(worst, calculus.elementary_inequality_margin(p, w1, w2))
    check("elementary-inequality-positive", -min(worst, 0.0), 0.0)

    return lines, ok


# ----------------------------------------------------------------------
# experiment verbs
# ----------------------------------------------------------------------

def _cmd_verify(cfg: dict) -> int:
    lines, ok = run_verify(cfg)
    print("\n".join(lines))
    return 0 if ok else 1


def _cmd_hardy_scan(cfg: dict) -> int:
    g = _group(cfg)
    p = float(cfg.get("p", 2.0))
    eps = cfg.get("epsilons", [0.2, 0.1, 0.05])
    mesh_cfg = cfg.get("mesh", {})
    base = hardy.ExtremalFamilySpec(
        epsilon=eps[0],
        r_out=10.0 / eps[-1],
        mollify_width=float(cfg.get("mollify_width", 0.05)),
    )
    pot = cfg.get("potential", {})
    lam = pot.get("lambda")
    if isinstance(lam, str) and lam.endswith("C"):
        lam = float(lam[:-1] or 1.0) * hardy.hardy_constant(g, p)
    rows = hardy.sharpness_scan(
        g, p, eps, base, lam=lam,
        r_min=float(mesh_cfg.get("r_min", 0.02)),
        shells_per_decade=int(mesh_cfg.get("shells_per_decade", 10)),
        cells_per_dim=int(mesh_cfg.get("cells_per_dim", 14)),
    )
    _write_rows(cfg, rows)
    print(f"hardy-scan: {len(rows)} rows, final quotient {rows[-1]['quotient']:.6g}")
    return 0


def _cmd_sigma_inf(cfg: dict) -> int:
    g = _group(cfg)
    p = float(cfg.get("p", 1.7))
    V = _potential(cfg, g, p)
    if V is None:
        raise CarnotError("sigma-inf requires a potential (field 'potential')")
    fam_cfg = cfg.get("family", {})
    fam = hardy.ConcentratingFamilySpec.geometric(
        b=float(fam_cfg.get("b", 0.05)),
        first=float(fam_cfg.get("first", 0.01)),
        ratio=float(fam_cfg.get("ratio", 0.3)),
        n_max=int(fam_cfg.get("n_max", 12)),
        profile=fam_cfg.get("profile", "hardy_power"),
    )
    mesh_cfg = cfg.get("mesh", {})
    rows = hardy.sigma_inf_probe(
        g, p, V, fam, n_max=int(cfg.get("n_max", len(fam.inner_radii))),
        shells_per_decade=int(mesh_cfg.get("shells_per_decade", 10)),
        cells_per_dim=int(mesh_cfg.get("cells_per_dim", 12)),
    )
    _write_rows(cfg, rows)
    print(f"sigma-inf: {len(rows)} rows, final quotient {rows[-1]['quotient']:.6g}")
    return 0


def _write_rows(cfg: dict, rows: list[dict]) -> None:
    header = ["parameter", "numerator_energy", "potential_term", "denominator", "quotient"]
    _write_csv(cfg.get("out", "scan.csv"), cfg, header,
               [[row[h] for h in header] for row in rows])


def _grid_and_config(cfg: dict):
    g = make_heisenberg(1)
    p = float(cfg.get("p", 1.7))
    grid_cfg = cfg.get("grid", {})
    grid = parabolic.GridSpec(
        L_xy=float(grid_cfg.get("L_xy", 1.0)),
        L_ell=float(grid_cfg.get("L_ell", 1.0)),
        n_xy=int(grid_cfg.get("n_xy", 32)),
        n_ell=int(grid_cfg.get("n_ell", 32)),
    )
    evo = cfg.get("evolution", {})
    config = parabolic.EvolutionConfig(
        p=p,
        potential=_potential(cfg, g, p),
        eta=float(evo.get("eta", 1e-3)),
        D_max=evo.get("D_max"),
        c_cap=float(evo.get("c_cap", 2.0)),
        dt_safety=float(evo.get("dt_safety", 0.8)),
        t_final=float(evo.get("t_final", 0.01)),
        u0_amplitude=float(evo.get("u0_amplitude", 1.0)),
        u0_radius=float(evo.get("u0_radius", 0.25)),
        record_interval=evo.get("record_interval"),
    )
    return grid, config


def _cmd_evolve(cfg: dict) -> int:
    grid, config = _grid_and_config(cfg)
    diag = parabolic.evolve(grid, config)
    rows = list(zip(diag.times, diag.mass, diag.sup, diag.energy, diag.clipped_mass))
    _write_csv(cfg.get("out", "evolve.csv"), cfg,
               ["t", "mass", "sup", "energy", "clipped_mass"],
               [list(r) for r in rows])
    print(f"evolve: {len(rows)} checkpoints, final mass {diag.mass[-1]:.6g}, "
          f"diverged={diag.diverged}")
    return 0


def _cmd_refine(cfg: dict) -> int:
    grid, config = _grid_and_config(cfg)
    rows = parabolic.refinement_study(grid, config, levels=int(cfg.get("levels", 3)))
    _write_csv(cfg.get("out", "refine.csv"), cfg,
               ["h", "final_mass", "final_sup", "diverged"],
               [[r["h"], r["final_mass"], r["final_sup"], r["diverged"]] for r in rows])
    print(f"refine: {len(rows)} levels, final sup {rows[-1]['final_sup']:.6g}")
    return 0


_COMMANDS = {
    "verify": _cmd_verify,
    "hardy-scan": _cmd_hardy_scan,
    "sigma-inf": _cmd_sigma_inf,
    "evolve": _cmd_evolve,
    "refine": _cmd_refine,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="carnot", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="potential strength (HardyPure)")
    parser.add_argument("--grid", type=int, default=None, help="grid count override")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--seed", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit:
        return 2
    try:
        cfg = _load_config(args)
    except (OSError, json.JSONDecodeError) as err:
        print(f"error: cannot load config: {err}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except CarnotError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
