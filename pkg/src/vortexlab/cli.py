"""Command line runner: vortexlab {mesh,renorm,solve,stress,stationary,sweep,validate} --config FILE."""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import config as configuration
from .errors import InvalidConfig, VortexLabError
from .geometry import write_mesh
from .stationary import Setup, continuation

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4
COMMANDS = ("mesh", "renorm", "solve", "stress", "stationary", "sweep", "validate")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


class Output:
    def __init__(self, directory, cfg):
        self.dir = directory
        os.makedirs(directory, exist_ok=True)
        with open(self.path("config.resolved"), "w") as f:
            f.write(cfg.dumps())
        self.summary = {}

    def path(self, name):
        return os.path.join(self.dir, name)

    def csv(self, name, header, rows):
        with open(self.path(name), "w") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(fmt(v) for v in row) + "\n")

    def text(self, name, lines):
        with open(self.path(name), "w") as f:
            f.write("\n".join(lines) + "\n")

    def close(self):
        self.text("summary.txt", [f"{k} = {fmt(v)}" for k, v in self.summary.items()])


def _problem(cfg):
    from .experiments import Problem

    domain, datum, vcfg = cfg.resolve()
    return Problem.build(domain, datum, vcfg, cfg.mesh)


def cmd_mesh(cfg, out):
    prob = _problem(cfg)
    m = prob.mesh
    write_mesh(out.path("mesh.txt"), m)
    out.summary.update(
        n_vertices=m.n_vertices,
        n_triangles=len(m.triangles),
        min_angle_deg=m.min_angle(),
        euler_characteristic=m.euler_characteristic(),
    )
    return EXIT_OK


def cmd_renorm(cfg, out):
    from .experiments import renorm_study

    prob = _problem(cfg)
    study = renorm_study(prob)
    out.text("energy_report.txt", study["green"].lines() + [""] + study["rho"].lines())
    rows = []
    for j in range(prob.config.n):
        gp, gg = study["grad_phase"].reshape(-1, 2)[j], study["grad_green"].reshape(-1, 2)[j]
        rows.append((j, gp[0], gp[1], gg[0], gg[1]))
    out.csv("gradients.csv", ["j", "phase_x", "phase_y", "green_x", "green_y"], rows)
    terms = study["green"].terms
    out.summary.update(W_green=study["green"].value, W_rho=study["rho"].value, relative_gap=study["gap"])
    out.summary["terms_sum_minus_W"] = sum(terms.values()) - study["green"].value
    return EXIT_OK


def cmd_solve(cfg, out):
    from .experiments import circulation_defects, solve_schedule

    prob = _problem(cfg)
    sols = solve_schedule(prob, cfg.p_schedule, cfg.solver)
    rows = []
    for sol in sols:
        sol.write_log(out.path(f"log_p{sol.p:g}.csv"))
        circ = circulation_defects(prob, sol.current()).max()
        rows.append((sol.p, sol.energy, sol.energy_at_zero, (2 - sol.p) * sol.energy, sol.correction_energy(), sol.residual, circ))
    out.csv("solve.csv", ["p", "energy", "energy_at_zero", "scaled_energy", "correction", "residual", "circulation_defect"], rows)
    ratios = [r[4] / (2 - r[0]) for r in rows]
    out.summary.update(correction_ratio_spread=max(ratios) / min(ratios) if min(ratios) > 0 else float("inf"))
    return EXIT_OK


def cmd_stress(cfg, out):
    from .experiments import solve_schedule
    from .stress import coefficients

    prob = _problem(cfg)
    rows = list(coefficients(2.0, prob.cmap, cfg.stress.delta).csv_rows())
    for sol in solve_schedule(prob, cfg.p_schedule, cfg.solver):
        rows += coefficients(sol.p, sol, cfg.stress.delta).csv_rows()
    out.csv("stress.csv", ["p", "j", "c1", "c2", "delta", "err"], rows)
    return EXIT_OK


def cmd_stationary(cfg, out):
    domain, datum, vcfg = cfg.resolve()
    setup = Setup(domain, datum, vcfg.degrees, vcfg.points, cfg.mesh, cfg.solver, cfg.stress.delta)
    sp = cfg.stationary
    res = continuation(setup, cfg.p_schedule, vcfg.points, sp.delta_trust, sp.samples_per_dim, sp.certify)
    header = ["p"] + [f"{a}{j}" for j in range(vcfg.n) for a in ("x", "y")] + ["cnorm", "evals"]
    out.csv("stationary.csv", header, res.rows())
    out.summary.update(res.summary())
    for k, msg in enumerate(res.messages):
        out.summary[f"message_{k}"] = msg
    if not res.status.startswith("converged"):
        print(f"stationary: {res.status}: " + "; ".join(res.messages), file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(cfg, out):
    from .experiments import sweep_maxima, sweep_study

    domain, datum, vcfg = cfg.resolve()
    sw = cfg.sweep
    rows = sweep_study(domain, datum, vcfg, cfg.p_schedule, cfg.mesh, sw.radius, sw.grid, sw.coarsen, cfg.solver)
    out.csv("sweep.csv", ["mesh", "p", "i", "j", "error"], rows)
    for (label, p), v in sweep_maxima(rows).items():
        out.summary[f"max_error_{label}_p{p:g}"] = v
    return EXIT_OK


def cmd_validate(cfg, out):
    from .experiments import validate

    prob = _problem(cfg)
    rows, extras = validate(prob, cfg.p_schedule, cfg.solver, cfg.stress.delta_list, cfg.seed)
    out.csv("validate.csv", ["check", "value", "threshold", "passed"], rows)
    failed = [r[0] for r in rows if not r[3]]
    width = max(len(r[0]) for r in rows)
    for name, value, threshold, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {value:.3e} < {threshold:.3e}")
    out.summary.update(extras)
    out.summary.update(checks=len(rows), failed=len(failed))
    return EXIT_VALIDATION if failed else EXIT_OK


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def parser():
    ap = argparse.ArgumentParser(prog="vortexlab", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON experiment configuration")
    ap.add_argument("--out", help="output directory (defaults to the config's output key)")
    ap.add_argument("--threads", type=int, default=1, help="cap on BLAS/OpenMP worker threads")
    ap.add_argument("--seed", type=int, help="seed for randomized checks and meshing (overrides the config)")
    return ap


def run(argv=None):
    args = parser().parse_args(argv)
    try:
        cfg = configuration.load(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed, mesh=replace(cfg.mesh, seed=args.seed))
        if args.threads < 1:
            raise InvalidConfig("--threads must be at least 1")
        cfg.resolve()
    except (InvalidConfig, VortexLabError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from threadpoolctl import threadpool_limits

    # the echoed config keeps its own output key, so runs into different directories stay comparable
    out = Output(args.out or cfg.output, cfg)
    try:
        with threadpool_limits(limits=args.threads):
            code = HANDLERS[args.command](cfg, out)
    except VortexLabError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        out.summary["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_SOLVER
    out.summary["exit_code"] = code
    out.close()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
