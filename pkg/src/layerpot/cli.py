"""Batch command line front end.

Every command reads JSON descriptors, writes a CSV table plus a JSON
sidecar (<out>.meta.json) with the resolved configuration and package
version, and is deterministic: identical configs give byte-identical
files regardless of --threads.  Exit codes: 0 success, 2 schema or
input errors (nothing written), 3 numerical convergence failure (the
CSV is still written, with its converged column marking failing rows).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .descriptors import (
    DescriptorError,
    density_from_descriptor,
    interface_from_descriptor,
    modulus_from_descriptor,
    problem_from_descriptor,
    quadrature_spec_from_descriptor,
)
from .campanato import iterate
from .experiments import blowup_density_scan, blowup_graph_scan, key_lemma_ratio
from .geometry import SphereInterface, make_density
from .greens import BallContext
from .modulus import classify_dini
from .potential import LayerProblem, evaluate_solution, radial_oracle, transmission_jump

__all__ = ["main"]

_RADIAL_ABSCISSAS = (0.1, 0.25, 0.6, 0.75, 0.9)


class CliError(Exception):
    """Input or schema problem mapped to exit status 2."""


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def _write_meta(out: str, command: str, config: dict, seed) -> None:
    meta = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
    }
    try:
        with open(out + ".meta.json", "w", newline="") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise CliError(f"cannot write {out}.meta.json: {exc}") from exc


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: {exc}") from exc


def _parse_inline_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON for {what}: {exc}") from exc


def _parse_coords(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")], dtype=float)
    except ValueError as exc:
        raise CliError(f"bad coordinate list '{text}': {exc}") from exc


# -- subcommand bodies --------------------------------------------------


def _cmd_modulus_classify(args) -> int:
    params = _parse_inline_json(args.params, "--params")
    modulus = modulus_from_descriptor({"family": args.family, "params": params})
    tol = args.tol if args.tol is not None else 1.0e-6
    cls = classify_dini(modulus, tol=tol)
    log_by_delta = dict(cls.log_partial_integrals)
    rows = [
        (delta, integral, log_by_delta.get(delta, math.nan), cls.verdict)
        for delta, integral in cls.partial_integrals
    ]
    _write_csv(args.out, ("delta", "partial_integral", "log_dini_partial", "verdict"), rows)
    _write_meta(
        args.out,
        "modulus classify",
        {"family": args.family, "params": params, "tol": tol, "verdict": cls.verdict},
        seed=None,
    )
    return 0


def _read_points(path: str, n: int) -> list[np.ndarray]:
    try:
        with open(path, newline="") as fh:
            raw = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    points = []
    for i, row in enumerate(raw):
        try:
            vec = np.array([float(c) for c in row], dtype=float)
        except ValueError:
            if i == 0:
                continue  # header row
            raise CliError(f"non-numeric point row {i + 1} in {path}")
        if vec.size != n:
            raise CliError(
                f"point row {i + 1} in {path} has {vec.size} coordinates, expected {n}"
            )
        points.append(vec)
    if not points:
        raise CliError(f"no points found in {path}")
    return points


def _cmd_solve_eval(args) -> int:
    config = _load_json(args.problem)
    problem = problem_from_descriptor(config, tol=args.tol)
    points = _read_points(args.points, problem.ctx.n)
    rows = []
    all_ok = True
    for x in points:
        res = evaluate_solution(problem, x)
        all_ok = all_ok and res.converged
        rows.append((*x, res.value, res.est_error, res.panels, res.converged))
    coord_names = tuple(f"x{i + 1}" for i in range(problem.ctx.n))
    _write_csv(
        args.out,
        (*coord_names, "value", "est_error", "panels", "converged"),
        rows,
    )
    _write_meta(args.out, "solve eval", {"problem": config, "tol": args.tol}, seed=None)
    return 0 if all_ok else 3


def _cmd_solve_jump(args) -> int:
    config = _load_json(args.problem)
    problem = problem_from_descriptor(config, tol=args.tol)
    x0 = _parse_coords(args.x0)
    if x0.size != problem.ctx.n:
        raise CliError(f"--x0 needs {problem.ctx.n} coordinates, got {x0.size}")
    try:
        res = transmission_jump(problem, x0)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    print(
        f"jump {_fmt(res.jump)} est_error {_fmt(res.est_error)} "
        f"converged {_fmt(res.converged)}"
    )
    if args.out:
        rows = [("step", h, jump, "", "") for h, jump in res.per_h]
        rows.append(("extrapolated", 0.0, res.jump, res.est_error, res.converged))
        _write_csv(args.out, ("kind", "h", "jump", "est_error", "converged"), rows)
        _write_meta(
            args.out,
            "solve jump",
            {"problem": config, "x0": [float(v) for v in x0], "tol": args.tol},
            seed=None,
        )
    return 0 if res.converged else 3


def _cmd_oracle_radial(args) -> int:
    ctx = BallContext(3, 1.0)
    problem = LayerProblem(
        ctx,
        SphereInterface(radius=0.5),
        make_density("constant", n=3, c=1.0),
        quadrature_spec_from_descriptor(None, tol=args.tol),
    )
    rows = []
    all_ok = True
    for t in _RADIAL_ABSCISSAS:
        res = evaluate_solution(problem, np.array([t, 0.0, 0.0]))
        exact = radial_oracle(t, 0.5, ctx)
        rel = abs(res.value - exact) / abs(exact)
        all_ok = all_ok and res.converged
        rows.append((t, res.value, exact, rel, res.est_error, res.panels, res.converged))
    _write_csv(
        args.out,
        ("x_abs", "value", "exact", "rel_error", "est_error", "panels", "converged"),
        rows,
    )
    _write_meta(
        args.out,
        "oracle radial",
        {"ball": {"n": 3, "radius": 1.0}, "sphere_radius": 0.5, "tol": args.tol},
        seed=None,
    )
    return 0 if all_ok else 3


def _scan_spec(config: dict, tol):
    if "quadrature" in config or tol is not None:
        return quadrature_spec_from_descriptor(config.get("quadrature"), tol=tol)
    return None


def _cmd_blowup(args, graph: bool) -> int:
    config = _load_json(args.config) if args.config else {}
    if not isinstance(config, dict):
        raise CliError("blowup config must be a JSON object")
    j_lo = int(config.get("j_lo", 4))
    j_hi = int(config.get("j_hi", 12))
    if j_hi < j_lo:
        raise CliError("need j_hi >= j_lo")
    control = bool(config.get("control", False))
    spec = _scan_spec(config, args.tol)
    scan_fn = blowup_graph_scan if graph else blowup_density_scan
    scan = scan_fn(range(j_lo, j_hi + 1), n=3, spec=spec, control=control)

    rows = []
    all_ok = True
    for i, eps in enumerate(scan.epsilons):
        j = j_lo + i
        deriv = scan.derivative_values[i]
        ok = scan.converged[i]
        all_ok = all_ok and ok
        if graph:
            r_eps = scan.r_epsilons[i]
            abscissa = math.log(abs(math.log(r_eps)))
            rows.append(
                (j, eps, r_eps, deriv, abscissa, scan.est_errors[i], ok)
            )
        else:
            abscissa = math.log(abs(math.log(eps)))
            rows.append((j, eps, deriv, abscissa, scan.est_errors[i], ok))
    header = (
        ("j", "epsilon", "r_epsilon", "derivative", "abscissa", "est_error", "converged")
        if graph
        else ("j", "epsilon", "derivative", "abscissa", "est_error", "converged")
    )
    _write_csv(args.out, header, rows)
    name = "experiment blowup-graph" if graph else "experiment blowup-density"
    _write_meta(
        args.out,
        name,
        {
            "j_lo": j_lo,
            "j_hi": j_hi,
            "control": control,
            "tol": args.tol,
            "fit": {"slope": scan.fit.slope, "intercept": scan.fit.intercept},
        },
        seed=None,
    )
    return 0 if all_ok else 3


def _cmd_key_lemma(args) -> int:
    config = _load_json(args.config)
    interface = interface_from_descriptor(
        config.get("interface") or _missing(config, "interface", "key-lemma config")
    )
    density = density_from_descriptor(
        config.get("density") or _missing(config, "density", "key-lemma config")
    )
    rho = float(config.get("rho", 0.5))
    radii = [float(r) for r in config.get("radii", [2.0**-j for j in range(1, 7)])]
    sample_count = int(config.get("sample_count", 2000))
    seed = args.seed if args.seed is not None else int(config.get("seed", 42))
    spec = _scan_spec(config, args.tol)
    try:
        scan = key_lemma_ratio(
            interface,
            density,
            rho=rho,
            radii=radii,
            sample_count=sample_count,
            seed=seed,
            spec=spec,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    rows = [
        (
            scan.radii[i],
            scan.sup_values[i],
            scan.omega_values[i],
            scan.ratios[i],
            scan.est_errors[i],
            scan.converged[i],
        )
        for i in range(len(scan.radii))
    ]
    _write_csv(
        args.out,
        ("r", "sup_w", "omega_r", "ratio", "est_error", "converged"),
        rows,
    )
    _write_meta(
        args.out,
        "experiment key-lemma",
        {
            "interface": config.get("interface"),
            "density": config.get("density"),
            "rho": rho,
            "radii": radii,
            "sample_count": sample_count,
            "tol": args.tol,
        },
        seed=seed,
    )
    return 0 if all(scan.converged) else 3


def _missing(config, key, context):
    raise CliError(f"{context} is missing required field '{key}'")


def _cmd_iterate(args) -> int:
    config = _load_json(args.problem)
    problem = problem_from_descriptor(config, tol=args.tol)
    seed = args.seed if args.seed is not None else 42
    try:
        states = iterate(problem, rho=args.rho, steps=args.steps, seed=seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    n = problem.ctx.n
    rows = []
    for st in states:
        rows.append(
            (
                st.k,
                *st.l_plus.a,
                *st.l_minus.a,
                st.l_plus.b,
                st.d_k,
                st.sup_error_plus,
                st.sup_error_minus,
                st.increment,
                st.est_error,
                st.converged,
            )
        )
    header = (
        "k",
        *(f"a_plus_{i + 1}" for i in range(n)),
        *(f"a_minus_{i + 1}" for i in range(n)),
        "b",
        "d_k",
        "sup_error_plus",
        "sup_error_minus",
        "increment",
        "est_error",
        "converged",
    )
    _write_csv(args.out, header, rows)
    _write_meta(
        args.out,
        "experiment iterate",
        {"problem": config, "rho": args.rho, "steps": args.steps, "tol": args.tol},
        seed=seed,
    )
    complete = len(states) == args.steps + 1 and all(st.converged for st in states)
    return 0 if complete else 3


# -- argument plumbing --------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _add_common(sub, out_required=True, seed=False):
    if out_required:
        sub.add_argument("--out", required=True, help="output CSV path")
    else:
        sub.add_argument("--out", help="optional output CSV path")
    sub.add_argument("--tol", type=float, help="quadrature tolerance override")
    sub.add_argument(
        "--threads",
        type=_positive_int,
        default=1,
        help="worker threads (accepted for interface parity; results are "
        "independent of it)",
    )
    if seed:
        sub.add_argument("--seed", type=int, help="sampling seed (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerpot",
        description="Potentials of measures on graph interfaces inside balls.",
    )
    top = parser.add_subparsers(dest="command", required=True)

    modulus = top.add_parser("modulus", help="modulus-of-continuity tools")
    msub = modulus.add_subparsers(dest="subcommand", required=True)
    mc = msub.add_parser("classify", help="integral test along a delta ladder")
    mc.add_argument("--family", required=True, help="modulus family name")
    mc.add_argument("--params", default="{}", help="family parameters as JSON")
    _add_common(mc)
    mc.set_defaults(func=_cmd_modulus_classify)

    solve = top.add_parser("solve", help="potential evaluation")
    ssub = solve.add_subparsers(dest="subcommand", required=True)
    se = ssub.add_parser("eval", help="evaluate the potential at points")
    se.add_argument("--problem", required=True, help="problem descriptor JSON file")
    se.add_argument("--points", required=True, help="CSV of evaluation points")
    _add_common(se)
    se.set_defaults(func=_cmd_solve_eval)
    sj = ssub.add_parser("jump", help="normal-derivative jump at a surface point")
    sj.add_argument("--problem", required=True, help="problem descriptor JSON file")
    sj.add_argument("--x0", required=True, help="comma-separated surface point")
    _add_common(sj, out_required=False)
    sj.set_defaults(func=_cmd_solve_jump)

    oracle = top.add_parser("oracle", help="closed-form comparison fixtures")
    osub = oracle.add_subparsers(dest="subcommand", required=True)
    orad = osub.add_parser("radial", help="concentric-sphere fixture vs closed form")
    _add_common(orad)
    orad.set_defaults(func=_cmd_oracle_radial)

    exp = top.add_parser("experiment", help="scans and the refinement loop")
    esub = exp.add_subparsers(dest="subcommand", required=True)
    bg = esub.add_parser("blowup-graph", help="derivative scan over the cusp tip")
    bg.add_argument("--config", help="scan config JSON file")
    _add_common(bg)
    bg.set_defaults(func=lambda a: _cmd_blowup(a, graph=True))
    bd = esub.add_parser("blowup-density", help="derivative scan for the log density")
    bd.add_argument("--config", help="scan config JSON file")
    _add_common(bd)
    bd.set_defaults(func=lambda a: _cmd_blowup(a, graph=False))
    kl = esub.add_parser("key-lemma", help="curved-vs-flat ratio ladder")
    kl.add_argument("--config", required=True, help="scan config JSON file")
    _add_common(kl, seed=True)
    kl.set_defaults(func=_cmd_key_lemma)
    it = esub.add_parser("iterate", help="piecewise-affine refinement loop")
    it.add_argument("--problem", required=True, help="problem descriptor JSON file")
    it.add_argument("--rho", type=float, default=0.5, help="scale ratio (default 0.5)")
    it.add_argument("--steps", type=_positive_int, default=6, help="refinement steps")
    _add_common(it, seed=True)
    it.set_defaults(func=_cmd_iterate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DescriptorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
