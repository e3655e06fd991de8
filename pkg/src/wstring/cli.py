"""``wstring <command> --config <path> [--out <dir>]``.

Exit codes: 0 success, 1 config parse, 2 admissibility, 3 radial,
4 verify, 5 solver.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, checks, solver
from .config import RunConfig, load_config
from .errors import AdmissibilityError, ConfigurationError, NumericalError, RangeError, WStringError
from .params import Params
from .profiles import liouville_residual, phi_kernel, rho1, rho2
from .radial import fit_decay, radial_grid, solve_w1_formula, solve_w2, write_decay_report

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_RADIAL, EXIT_VERIFY, EXIT_SOLVER = range(6)
SLOPE_TOL = 0.02
COMMANDS = ("constants", "profiles", "radial", "verify", "solve")


class CommandFailed(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _out_dir(cfg: RunConfig) -> Path:
    out = cfg.output or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def _target_error(slope: float, target: float) -> float:
    """Relative slope error; absolute when the target itself vanishes."""
    return abs(slope - target) / max(abs(target), 1e-3)


# --- commands ------------------------------------------------------------------------


def cmd_constants(cfg: RunConfig, out=None) -> int:
    """Print the published and ODE-consistent constants plus quadrature cross-checks."""
    out = out or sys.stdout
    p = cfg.params
    pub = analysis.const_C2(p)
    ode = analysis.ode_decay_constants(p)
    I_quad = analysis.integral_I(p)
    m2 = analysis.rho2_mass(p)
    m2_closed = analysis.rho2_mass_closed_form(p)
    m1 = analysis.rho1_mass(p)
    mu = 1.0 / (p.N + 1)
    b_gamma = analysis.beta_fn(mu, p.kappa - mu)
    b_int = analysis.beta_integral(mu, p.kappa - mu)
    w1 = solve_w1_formula(p, radial_grid(r_max=cfg.radial.r_max))
    Ipm_direct = analysis.pairing_direct(p, w1)
    Ipm_reduced = analysis.pairing_reduced(p)
    Ipm_closed = analysis.pairing_integral_closed_form(p)

    checks_ = {
        "I_quadrature_vs_closed_form": _rel(I_quad.value, analysis.integral_I_closed_form(p)) < 1e-8
        or abs(I_quad.value - analysis.integral_I_closed_form(p)) < 1e-12,
        "rho2_mass_vs_beta": _rel(m2.value, m2_closed) < 1e-8,
        "beta_gamma_vs_integral": _rel(b_int.value, b_gamma) < 1e-10,
        "rho1_mass_vs_8pi(N+1)": _rel(m1.value, 8 * math.pi * (p.N + 1)) < 1e-8,
        "Ipm_direct_vs_closed_form": abs(Ipm_direct.value - Ipm_closed) < 1e-6 * max(abs(Ipm_closed), 1e-2),
    }
    rows = [
        ("N", p.N),
        ("kappa", p.kappa),
        ("proportional", str(p.proportional).lower()),
        ("decay_condition", str(p.decay_condition).lower()),
        ("C1_published", pub.C1),
        ("C2_published", pub.C2),
        ("beta_term", pub.beta_term),
        ("C1", ode.C1),
        ("C2", ode.C2),
        ("C1_discrepancy", pub.C1 - ode.C1),
        ("C2_discrepancy", pub.C2 - ode.C2),
        ("I_quadrature", I_quad.value),
        ("I_closed_form", analysis.integral_I_closed_form(p)),
        ("rho2_mass_quadrature", m2.value),
        ("rho2_mass_closed_form", m2_closed),
        ("rho1_mass_quadrature", m1.value),
        ("beta_gamma", b_gamma),
        ("beta_integral", b_int.value),
        ("Ipm_direct", Ipm_direct.value),
        ("Ipm_reduced_published", Ipm_reduced.value),
        ("Ipm_closed_form", Ipm_closed),
    ]
    for k, v in rows:
        print(f"{k}: {v}", file=out)
    for k, ok in checks_.items():
        print(f"check {k}: {'pass' if ok else 'FAIL'}", file=out)
    if not all(checks_.values()):
        raise CommandFailed(EXIT_VERIFY, "constant cross-checks failed")
    return EXIT_OK


def cmd_profiles(cfg: RunConfig, out=None) -> int:
    """Write profiles.csv (r, rho1, rho2, phi_zero, phi_plus on theta=0) and report Liouville residuals."""
    out = out or sys.stdout
    p = cfg.params
    r = np.concatenate([[0.0], radial_grid(r_max=100.0, n_inner=500, n_outer=200)])
    cols = {
        "rho1": rho1(r, p),
        "rho2": rho2(r, p),
        "phi_zero": phi_kernel(r, 0.0, "zero", p.N),
        "phi_plus": phi_kernel(r, 0.0, "plus", p.N),
    }
    path = _out_dir(cfg) / "profiles.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", *cols])
        for i in range(r.size):
            w.writerow([repr(float(r[i]))] + [repr(float(c[i])) for c in cols.values()])
    worst = max(
        abs(liouville_residual(z, p, 1e-3, which)) for z in checks.probe_points(p) for which in ("I", "II")
    )
    print(f"wrote {path}", file=out)
    print(f"liouville_max_residual_h1e-3: {worst!r}", file=out)
    return EXIT_OK


def cmd_radial(cfg: RunConfig, out=None) -> int:
    """w1.csv, w2.csv and decay_fit.txt; slopes are judged against the ODE-consistent constants."""
    out = out or sys.stdout
    p = cfg.params
    try:
        nodes = radial_grid(r_max=cfg.radial.r_max)
        w1 = solve_w1_formula(p, nodes)
        w2 = solve_w2(p, w1)
        fits = [fit_decay(w1, cfg.radial.fit_window), fit_decay(w2, cfg.radial.fit_window)]
    except (NumericalError, RangeError) as exc:
        raise CommandFailed(EXIT_RADIAL, f"radial solve failed: {exc}") from exc
    pub = analysis.const_C2(p)
    ode = analysis.ode_decay_constants(p)
    d = _out_dir(cfg)
    w1.to_csv(d / "w1.csv")
    w2.to_csv(d / "w2.csv")
    rows, ok = [], True
    for name, fit, c_pub, c_ode in (("w1", fits[0], pub.C1, ode.C1), ("w2", fits[1], pub.C2, ode.C2)):
        err = _target_error(fit.slope, -c_ode)
        ok &= err < SLOPE_TOL
        rows.append({
            "function": name,
            "slope": repr(fit.slope),
            "target": repr(-c_ode),
            "rel_error": repr(err),
            "target_published": repr(-c_pub),
            "rel_error_published": repr(_target_error(fit.slope, -c_pub)),
            "window": f"{fit.window[0]:g}-{fit.window[1]:g}",
        })
    write_decay_report(d / "decay_fit.txt", rows)
    for row in rows:
        print(" ".join(f"{k}={v}" for k, v in row.items()), file=out)
    if not ok:
        raise CommandFailed(EXIT_RADIAL, "fitted slopes miss their targets by more than 2%")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    results = checks.run_suite(cfg.params)
    for r in results:
        print(r.line(), file=out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CommandFailed(EXIT_VERIFY, "failed checks: " + ", ".join(failed))
    return EXIT_OK


def _solve_one(cfg: RunConfig, p: Params, d: Path, out) -> solver.SolveResult:
    res = solver.solve(p, cfg.grid, cfg.newton)
    d.mkdir(parents=True, exist_ok=True)
    res.u.to_csv(d / "u.csv")
    res.eta.to_csv(d / "eta.csv")
    v1, v2 = res.vstar()
    v1.to_csv(d / "vstar1.csv")
    v2.to_csv(d / "vstar2.csv")
    res.report.write(d / "newton_report.txt")
    print(f"epsilon={p.epsilon!r} converged={str(res.report.converged).lower()} "
          f"iterations={res.report.n_iter} vstar_bound={res.report.vstar_bound[2]!r}", file=out)
    return res


def cmd_solve(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.grid is None:
        raise ConfigurationError("solve needs a 'grid' block")
    base = _out_dir(cfg)
    sweep = len(cfg.epsilons) > 1
    failures = []
    summary = []
    for eps in cfg.epsilons:
        p = cfg.at(eps)
        d = base / f"eps_{eps!r}" if sweep else base
        try:
            res = _solve_one(cfg, p, d, out)
        except NumericalError as exc:
            raise CommandFailed(EXIT_SOLVER, f"eps={eps}: {exc}") from exc
        if not res.report.converged:
            hist = ", ".join(f"{r:.3e}" for r in res.report.iterations)
            failures.append(f"eps={eps}: {res.report.message}; residuals {hist}")
            summary.append((eps, False, res.report.n_iter, math.nan))
            continue
        bc = solver.verify_boundary_condition(res.u, res.eta, p)
        print(f"  int e^u={bc.total_u!r} int e^eta={bc.total_eta!r} "
              f"tail exponents {bc.exponent_u:.3f}/{bc.exponent_eta:.3f}", file=out)
        if not bc.finite:
            failures.append(f"eps={eps}: tail exponents {bc.exponent_u:.3f}, {bc.exponent_eta:.3f} not below -2")
        if cfg.box_growth:
            _, _, rel = solver.box_stability(p, cfg.grid, cfg.newton)
            print(f"  box growth R -> 1.25R: relative change {rel[0]:.2e} / {rel[1]:.2e}", file=out)
            if max(rel) >= 0.01:
                failures.append(f"eps={eps}: integrals change by {max(rel):.2%} under box growth")
        summary.append((eps, True, res.report.n_iter, res.report.vstar_bound[2]))

    if sweep:
        with open(base / "sweep_summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "converged", "iterations", "vstar_bound"])
            for eps, conv, it, b in summary:
                w.writerow([repr(eps), str(conv).lower(), it, repr(b)])
        order = sorted(summary, key=lambda row: -row[0])
        bounds = [row[3] for row in order]
        decreasing = all(b1 > b2 for b1, b2 in zip(bounds, bounds[1:]))
        print(f"vstar_bound strictly decreasing with eps: {str(decreasing).lower()}", file=out)
        if not decreasing:
            failures.append("vstar_bound is not strictly decreasing along the sweep")
    if failures:
        raise CommandFailed(EXIT_SOLVER, "; ".join(failures))
    return EXIT_OK


HANDLERS = {
    "constants": cmd_constants,
    "profiles": cmd_profiles,
    "radial": cmd_radial,
    "verify": cmd_verify,
    "solve": cmd_solve,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wstring", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="output directory (default: config 'output' or cwd)")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors map onto the config-parse code
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.out)
        return HANDLERS[args.command](cfg)
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except AdmissibilityError as exc:
        print(f"inadmissible parameters: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WStringError as exc:
        # anything else numerical is attributed to the stage that raised it
        code = {"radial": EXIT_RADIAL, "verify": EXIT_VERIFY, "solve": EXIT_SOLVER}.get(args.command, EXIT_VERIFY)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
