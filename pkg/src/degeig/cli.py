"""Command-line surface: solve, converge, check, oracle, catalogue.

Reports separate 'claims' (checked invariants with their bounds) from
'diagnostics' (solver internals); acceptance tooling reads the former.
Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O error.
"""

import argparse
import os
import sys

import numpy as np

from .assembly import (AssemblyError, assemble_grid3d, assemble_radial,
                       energy_inner, export_coo, hardy_inner)
from .config import ConfigError, PRESETS, load_config, load_preset
from .eigensolve import (SolverError, growth_diagnostics, solve_dense,
                         solve_successive)
from .inequalities import (CknParams, check_ckn_radial, check_hardy,
                           check_sobolev, critical_exponent,
                           dilation_quotient_spread, gaussian_profile,
                           hardy_constant, hardy_near_optimizer,
                           hardy_quotient_radial, poly_bump, smooth_bump)
from .oracle import OracleError, radial_weight_callable, shooting_eigenvalue
from .reports import run_meta, write_csv, write_json
from .weights import CATALOGUE, verify_weight_split

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

FMT = "%.17g"


def _assemble(problem):
    geom = problem.geometry
    mesh = geom.build(problem.N)
    if geom.mode == "radial":
        return assemble_radial(mesh, problem.N, problem.alpha, problem.weight)
    return assemble_grid3d(mesh, problem.alpha, problem.weight)


def _claim(value, bound, ok=None):
    ok = bool(value <= bound) if ok is None else bool(ok)
    return {"value": float(value), "bound": float(bound), "ok": ok}


def _solve_claims(seq, dense_seq, growth):
    lam = seq.lambdas
    claims = {}
    gaps = np.diff(lam) / lam[1:] if lam.size > 1 else np.array([1.0])
    claims["positive_strictly_increasing"] = {
        "value": float(min(lam.min(initial=np.inf), gaps.min(initial=np.inf))),
        "bound": 1e-9,
        "ok": bool(np.all(lam > 0.0) and np.all(gaps > 1e-9)),
    }
    claims["max_residual"] = _claim(seq.residuals.max(initial=0.0), 1e-8)
    lam_max = lam.max(initial=1.0)
    claims["max_cross_energy_rel"] = _claim(seq.max_cross_energy() / lam_max, 1e-8)
    eye_gap = np.max(np.abs(seq.cross_mass - np.eye(seq.count))) if seq.count else 0.0
    claims["mass_orthonormality_gap"] = _claim(eye_gap, 1e-8)
    energy_gap = (
        np.max(np.abs(np.diag(seq.cross_energy) - lam) / lam) if seq.count else 0.0
    )
    claims["energy_identity_rel_gap"] = _claim(energy_gap, 1e-8)
    claims["unit_energy_gap"] = _claim(
        np.max(np.abs(growth.unit_energy - 1.0)), 1e-10
    )
    claims["mass_identity_gap"] = _claim(np.max(growth.identity_gaps), 1e-10)
    claims["plus_bound_min_margin"] = {
        "value": float(np.min(growth.bound_margins)),
        "bound": -1e-12,
        "ok": bool(np.min(growth.bound_margins) >= -1e-12),
    }
    if dense_seq is not None and dense_seq.count and seq.count:
        m = min(dense_seq.count, seq.count)
        agree = np.max(
            np.abs(seq.lambdas[:m] - dense_seq.lambdas[:m]) / dense_seq.lambdas[:m]
        )
        claims["dense_agreement_rel"] = _claim(agree, 1e-6)
    return claims


def _golden_claim(path, seq, bound=1e-2):
    """Compare the computed sequence against a shooting-oracle golden file."""
    import json

    try:
        with open(path) as fh:
            golden = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"golden file {path}: {exc}") from exc
    refs = {int(e["n"]): float(e["lambda"]) for e in golden.get("entries", [])
            if e.get("certified", False)}
    worst = 0.0
    for n, lam_ref in refs.items():
        if n <= seq.count:
            worst = max(worst, abs(seq.lambdas[n - 1] - lam_ref) / lam_ref)
    return _claim(worst, bound)


def _write_vectors_csv(path, pair, seq):
    k = seq.count
    headers = ["e%d" % (i + 1) for i in range(k)]
    if pair.mode == "radial":
        nodes = pair.geometry.nodes
        rows = []
        for i, r in enumerate(nodes):
            vals = [seq.vectors[i, j] if i < pair.order else 0.0 for j in range(k)]
            rows.append([r] + vals)
        write_csv(path, ["r"] + headers, rows)
    else:
        pts = pair.dof_positions
        rows = [
            list(pts[i]) + [seq.vectors[i, j] for j in range(k)]
            for i in range(pair.order)
        ]
        write_csv(path, ["x", "y", "z"] + headers, rows)


def cmd_solve(run, out_dir):
    pair = _assemble(run.problem)
    settings = run.problem.solver
    settings.seed = run.seed
    seq = solve_successive(pair, settings=settings)
    if seq.count == 0:
        raise SolverError("no positive eigenvalues found in the discrete pencil")
    dense_seq = None
    if pair.order <= settings.dense_threshold:
        dense_seq = solve_dense(pair, settings.k, settings.dense_threshold)
    growth = growth_diagnostics(seq, pair)
    claims = _solve_claims(seq, dense_seq, growth)
    if run.golden_path:
        claims["golden_agreement_rel"] = _golden_claim(run.golden_path, seq)
    report = {
        "command": "solve",
        "problem": {
            "N": run.problem.N,
            "alpha": run.problem.alpha,
            "weight": run.problem.weight.name,
            "geometry": run.problem.geometry.mode,
            "order": pair.order,
        },
        "claims": claims,
        "eigen": seq.to_report(),
        "growth": growth.to_dict(),
        "diagnostics": {
            "dense": dense_seq.to_report() if dense_seq is not None else None,
            "seed": run.seed,
        },
        "meta": run_meta(),
    }
    write_json(os.path.join(out_dir, "eigen_report.json"), report)
    _write_vectors_csv(os.path.join(out_dir, "eigenvectors.csv"), pair, seq)
    if run.export_matrices:
        for name, mat in (("A", pair.A), ("B", pair.B), ("H", pair.H)):
            export_coo(mat, os.path.join(out_dir, f"{name}.txt"))
    for i, lam in enumerate(seq.lambdas):
        print(f"lambda_{i + 1} = {FMT % lam}   residual = {FMT % seq.residuals[i]}")
    for w in seq.warnings:
        print(f"warning: {w}")
    if not all(c["ok"] for c in claims.values()):
        bad = [k for k, c in claims.items() if not c["ok"]]
        print(f"invariant violation: {', '.join(bad)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _hardy_slack(pair, n_vectors, seed):
    """Largest Hardy-over-bound ratio across random boundary-vanishing vectors."""
    rng = np.random.default_rng([seed, pair.order])
    const = hardy_constant(pair.N, pair.alpha)
    worst = 0.0
    for _ in range(n_vectors):
        u = rng.standard_normal(pair.order)
        worst = max(worst, hardy_inner(pair, u) / (const * energy_inner(pair, u)))
    return worst


def cmd_converge(run, out_dir):
    if len(run.ladder) < 3:
        raise ConfigError("ladder: a convergence study needs at least 3 rungs")
    problem = run.problem
    if problem.geometry.mode != "radial":
        raise ConfigError("ladder: convergence studies run on radial geometry")
    k = problem.solver.k
    rows = []
    lambdas = []
    slacks = []
    for rung in run.ladder:
        geom_args = {"R": rung.get("R", problem.geometry.R), "M": int(rung["M"])}
        geom = type(problem.geometry)(
            R=geom_args["R"], M=geom_args["M"],
            q=rung.get("q"), span=rung.get("span", problem.geometry.span),
        )
        mesh = geom.build(problem.N)
        pair = assemble_radial(mesh, problem.N, problem.alpha, problem.weight)
        settings = problem.solver
        settings.seed = run.seed
        seq = solve_successive(pair, settings=settings)
        lam = seq.lambdas[:k]
        lambdas.append(lam)
        slack = max(0.0, _hardy_slack(pair, 50, run.seed) - 1.0)
        slacks.append(slack)
        rows.append([geom_args["M"], geom_args["R"]] + list(lam) + [slack])
    counts = min(l.size for l in lambdas)
    orders = {}
    diffs_decreasing = {}
    for n in range(counts):
        vals = np.array([l[n] for l in lambdas])
        diffs = np.abs(np.diff(vals))
        ms = np.array([r[0] for r in rows], dtype=float)
        with np.errstate(divide="ignore"):
            ords = np.log(diffs[:-1] / diffs[1:]) / np.log(ms[2:] / ms[1:-1])
        orders[f"lambda_{n + 1}"] = [float(o) for o in ords]
        diffs_decreasing[f"lambda_{n + 1}"] = bool(np.all(np.diff(diffs) < 0.0))
    header = ["M", "R"] + [f"lambda_{i + 1}" for i in range(counts)] + ["hardy_slack"]
    write_csv(os.path.join(out_dir, "converge.csv"), header, rows)
    report = {
        "command": "converge",
        "claims": {
            "differences_decreasing": diffs_decreasing,
            "orders": orders,
            "hardy_slack_trend": [float(s) for s in slacks],
        },
        "diagnostics": {"rungs": [[r[0], r[1]] for r in rows], "seed": run.seed},
        "meta": run_meta(),
    }
    write_json(os.path.join(out_dir, "converge_report.json"), report)
    for row in rows:
        print(" ".join(FMT % v if isinstance(v, float) else str(v) for v in row))
    return EXIT_OK


def _default_profiles(R):
    return [smooth_bump(R / 4.0), poly_bump(R / 3.0), gaussian_profile(R / 10.0, cutoff=4.0)]


def cmd_check(run, out_dir):
    problem = run.problem
    if problem.geometry.mode != "radial":
        raise ConfigError("check: inequality checks run on radial geometry")
    pair = _assemble(problem)
    N, alpha = problem.N, problem.alpha
    R = problem.geometry.R
    profiles = _default_profiles(R)
    radii = pair.dof_positions
    hardy_reports = []
    sobolev_reports = []
    for prof in profiles:
        u = prof.value(radii)
        hardy_reports.append(check_hardy(pair, u, label=prof.name).to_dict())
        sobolev_reports.append(check_sobolev(pair, u, label=prof.name).to_dict())
    spread = dilation_quotient_spread(pair, profiles[0])

    eps_ladder = [0.4, 0.2, 0.1, 0.05]
    near_quotients = [
        hardy_quotient_radial(hardy_near_optimizer(N, alpha, eps), N, alpha)
        for eps in eps_ladder
    ]
    const = hardy_constant(N, alpha)

    hardy_point = CknParams.from_ab(N, 2.0, -alpha / 2.0, (2.0 - alpha) / 2.0)
    sobolev_point = CknParams.from_ab(N, 2.0, -alpha / 2.0, 0.0)
    ckn_hardy = [check_ckn_radial(hardy_point, N, p).to_dict() for p in profiles]
    ckn_sobolev = [check_ckn_radial(sobolev_point, N, p).to_dict() for p in profiles]

    claims = {
        "hardy_all_pass": {"ok": all(r["passed"] for r in hardy_reports)},
        "near_optimizer_monotone_below_constant": {
            "ok": bool(
                np.all(np.diff(near_quotients) > 0.0)
                and np.all(np.array(near_quotients) <= const * (1.0 + 1e-6))
            ),
            "quotients": [float(qv) for qv in near_quotients],
            "constant": const,
        },
        "dilation_spread": _claim(spread["spread"], 2e-2),
        "ckn_hardy_reduction": {"ok": all(r["passed"] for r in ckn_hardy)},
        "ckn_sobolev_reduction": {"ok": all(r["passed"] for r in ckn_sobolev)},
        "critical_exponent": {"value": critical_exponent(N, alpha)},
        "hardy_constant": {"value": const},
    }
    report = {
        "command": "check",
        "claims": claims,
        "hardy": hardy_reports,
        "sobolev": sobolev_reports,
        "dilation": {
            "quotients": {str(t): float(q) for t, q in spread["quotients"].items()},
            "spread": spread["spread"],
        },
        "ckn_hardy_point": ckn_hardy,
        "ckn_sobolev_point": ckn_sobolev,
        "meta": run_meta(),
    }
    write_json(os.path.join(out_dir, "inequality_report.json"), report)
    ok = all(c.get("ok", True) for c in claims.values())
    print(f"hardy constant = {FMT % const}")
    print(f"critical exponent = {FMT % critical_exponent(N, alpha)}")
    print(f"dilation spread = {FMT % spread['spread']}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_oracle(run, out_dir):
    problem = run.problem
    if problem.geometry.mode != "radial":
        raise ConfigError("oracle: the shooting oracle is radial only")
    g = radial_weight_callable(problem.weight)
    R = problem.geometry.R
    entries = []
    for n in range(1, problem.solver.k + 1):
        res = shooting_eigenvalue(problem.N, problem.alpha, g, R, n,
                                  breakpoints=problem.weight.jumps)
        entries.append(
            {
                "N": problem.N,
                "alpha": problem.alpha,
                "weight": problem.weight.name,
                "R": R,
                "n": n,
                "lambda": res.lam,
                "certified": res.certified,
                "note": res.note,
            }
        )
        print(f"lambda_{n} = {FMT % res.lam}  certified = {res.certified}")
    golden = {"entries": entries, "meta": run_meta()}
    write_json(os.path.join(out_dir, "golden.json"), golden)
    if any(not e["certified"] for e in entries):
        print("warning: some eigenvalues are uncertified (partial list)")
    return EXIT_OK


def cmd_catalogue(N, alpha, out_dir=None):
    rows = []
    for name, builder in CATALOGUE.items():
        spec = builder(N, alpha)
        rep = verify_weight_split(spec, N, alpha)
        parts = []
        if rep.g1_norm_estimate > 0:
            parts.append("integrable")
        if rep.g2_norm_estimate > 0:
            parts.append("decaying")
        has_neg = spec.g_negative(np.geomspace(1e-3, 1e3, 200)).max() > 0
        if has_neg:
            parts.append("negative")
        decay = "pass" if rep.decay_pass else "fail"
        lq = "diverges" if rep.gplus_norm_verdict == "divergent" else rep.gplus_norm_verdict
        line = (
            f"{name}: split=({'+'.join(parts) or 'empty'})"
            f"  decay: {decay}, L^(N/(2-alpha)): {lq}  overall: {rep.overall}"
        )
        print(line)
        rows.append(rep.to_dict())
    if out_dir:
        write_json(os.path.join(out_dir, "catalogue.json"),
                   {"N": N, "alpha": alpha, "weights": rows, "meta": run_meta()})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="degeig",
        description="Eigenvalues of -div(|x|^a grad u) = lambda g u on truncated domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("solve", "compute the increasing positive eigenvalue sequence"),
        ("converge", "mesh-refinement study over a (M, R) ladder"),
        ("check", "verify the Hardy/Sobolev/interpolation inequalities"),
        ("oracle", "shooting-oracle golden eigenvalues (radial)"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--preset", help=f"builtin preset ({', '.join(sorted(PRESETS))})")
        p.add_argument("--out", default=None, help="output directory (default ./out)")
        p.add_argument("--seed", type=int, default=None, help="deterministic seed (default 42)")
        if name == "solve":
            p.add_argument("--export-matrices", action="store_true",
                           help="also write A, B, H as coordinate triples")
    p = sub.add_parser("catalogue", help="list builtin weights with admissibility verdicts")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out", default=None)
    return parser


def _load_run(args):
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        run = load_config(args.config)
    elif args.preset:
        run = load_preset(args.preset)
    else:
        raise ConfigError("a configuration is required (--config PATH or --preset NAME)")
    if args.seed is not None:
        run.seed = args.seed
    if args.out is not None:
        run.out_dir = args.out
    if getattr(args, "export_matrices", False):
        run.export_matrices = True
    return run


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalogue":
            if args.out:
                os.makedirs(args.out, exist_ok=True)
            return cmd_catalogue(args.N, args.alpha, args.out)
        run = _load_run(args)
        out_dir = run.out_dir
        os.makedirs(out_dir, exist_ok=True)
        if args.command == "solve":
            return cmd_solve(run, out_dir)
        if args.command == "converge":
            return cmd_converge(run, out_dir)
        if args.command == "check":
            return cmd_check(run, out_dir)
        if args.command == "oracle":
            return cmd_oracle(run, out_dir)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, AssemblyError, OracleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
