"""Command-line interface: ``lle-pinning <command> --config run.yaml --output out/``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .config import COMMANDS, ConfigError, RunConfig, echo, parse_config
from .continuation import Branch, continue_both_ways
from .evolution import BlowUpError, EvolutionConfig
from .io import (
    BRANCH_COLUMNS,
    SPECTRUM_COLUMNS,
    TRAJECTORY_COLUMNS,
    VEFF_COLUMNS,
    ZEROS_COLUMNS,
    OutputDir,
)
from .operators import assemble, full_spectrum
from .reductions import DualPumpParams, asymptotics_check, dual_pump_validate
from .stationary import SolveError, count_localized, l2_norm, residual
from .workflows import analyse, eps_branch, guess_kind, simulate, soliton, state_at_eps

log = logging.getLogger("lle_pinning")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVE = 3
EXIT_BLOWUP = 4


def _solve_zero_eps(cfg: RunConfig):
    p = cfg.model_params()
    s = cfg.stationary
    rep = soliton(p, cfg.grid(), s.guess, s.tol, s.maxiter)
    if not rep.converged:
        raise SolveError(f"Newton did not converge: |F| = {rep.residual_norm:.3e} "
                         f"after {rep.iterations} iterations")
    return p, rep


def _zero_label(z) -> str:
    return "negative" if z.sigma0 < 0 else "positive"


def _state(cfg: RunConfig):
    """Stationary state at the configured ``eps`` plus a small report."""
    p, rep = _solve_zero_eps(cfg)
    info = {"newton_iterations": rep.iterations, "newton_residual": rep.residual_norm}
    if p.eps == 0.0:
        return p, rep.solution, info
    an = analyse(rep.solution, p, cfg.pinning.samples)
    zeros = an.select(cfg.pinning.zero)
    if not zeros:
        raise SolveError("effective potential has no simple zero to continue from")
    pt = state_at_eps(an, zeros[0], p.eps)
    info["sigma0"] = zeros[0].sigma0
    return p, pt.state, info


def _extremum_kind(p) -> str:
    return "max" if p.d > 0 else "min"


def cmd_solve(cfg: RunConfig, out: OutputDir) -> dict:
    p, u, info = _state(cfg)
    out.state("state.json", u)
    x = u.grid.points
    out.csv("profile.csv", ("x", "re", "im", "intensity"),
            zip(x, u.values.real, u.values.imag, u.intensity))
    if cfg.output.plots:
        plotting.profile(out.path("profile.svg"), x, u.intensity, f"{guess_kind(p, cfg.stationary.guess)} state")
    kind = _extremum_kind(p)
    if count_localized(u, kind) == 0:
        log.warning("the solution is spatially constant (no localized structure)")
    return {**info, "residual_l2": l2_norm(residual(u, p)), "l2norm": l2_norm(u),
            "localized_extrema": count_localized(u, kind), "extremum_kind": kind}


def cmd_spectrum(cfg: RunConfig, out: OutputDir) -> dict:
    p, u, info = _state(cfg)
    sp = full_spectrum(assemble(u, p))
    ev = sp.eigenvalues
    out.csv("spectrum.csv", SPECTRUM_COLUMNS, zip(ev.real, ev.imag))
    if cfg.output.plots:
        plotting.spectrum(out.path("spectrum.svg"), ev, sp.critical, f"eps = {p.eps:g}")
    bulk = float(np.mean(np.abs(ev.real + p.mu) <= 0.05))
    return {**info, "critical": sp.critical, "gap": sp.gap, "classification": sp.classification,
            "bulk_fraction_near_minus_mu": bulk, "trace": float(np.sum(ev.real)),
            "count": int(len(ev))}


def cmd_veff(cfg: RunConfig, out: OutputDir) -> dict:
    p, rep = _solve_zero_eps(cfg)
    an = analyse(rep.solution, p, cfg.pinning.samples)
    ve = an.veff
    out.csv("veff.csv", VEFF_COLUMNS, zip(ve.sigma_grid, ve.values))
    out.csv("zeros.csv", ZEROS_COLUMNS, [(z.sigma0, z.slope, z.prediction) for z in ve.zeros])
    if cfg.output.plots:
        plotting.veff(out.path("veff.svg"), ve.sigma_grid, ve.values, ve.zeros, p.potential)
    return {"pairing": an.kernel.pairing, "zeros": [z.__dict__ for z in ve.zeros],
            "nonsimple": ve.nonsimple}


def _branch_rows(br: Branch):
    for pt in br.points:
        lam = pt.critical_eig
        yield (pt.param, pt.l2norm, lam.real, lam.imag, pt.stable, pt.sigma_est)


def cmd_continue(cfg: RunConfig, out: OutputDir) -> dict:
    c = cfg.continuation
    kw = dict(ds=c.ds, ds_min=c.ds_min, ds_max=c.ds_max, max_points=c.max_points)
    p, rep = _solve_zero_eps(cfg)
    curves, summary = {}, {"branches": {}}
    if c.parameter == "eps":
        an = analyse(rep.solution, p, cfg.pinning.samples)
        zeros = an.select(cfg.pinning.zero)
        if not zeros:
            raise SolveError("effective potential has no simple zero to continue from")
        items = [(_zero_label(z), z, eps_branch(an, z, c.half_width, **kw)) for z in zeros]
    else:
        p_, u, _ = _state(cfg)
        br = continue_both_ways(u, p_, "zeta", c.half_width, **kw)
        items = [("zeta", None, br)]
    for label, z, br in items:
        out.csv(f"branch_{label}.csv", BRANCH_COLUMNS, _branch_rows(br))
        curves[label] = (br.params, [pt.l2norm for pt in br.points], [pt.stable for pt in br.points])
        summary["branches"][label] = {
            "sigma0": None if z is None else z.sigma0,
            "points": len(br.points),
            "range": [float(br.params.min()), float(br.params.max())],
            "events": br.events,
        }
    if cfg.output.plots:
        plotting.branches(out.path("branches.svg"), curves, c.parameter)
    return summary


def cmd_simulate(cfg: RunConfig, out: OutputDir) -> dict:
    e = cfg.evolution
    p, rep = _solve_zero_eps(cfg)
    an = analyse(rep.solution, p, cfg.pinning.samples)
    zeros = an.select(cfg.pinning.zero)
    if not zeros:
        raise SolveError("effective potential has no simple zero to continue from")
    ecfg = EvolutionConfig(dt=e.dt, t_end=e.t_end, record_every=e.record_every,
                           perturbation=e.perturbation, perturbation_scale=e.scale, seed=cfg.seed)
    pt, fit = simulate(an, zeros[0], ecfg, e.eps)
    out.csv("trajectory.csv", TRAJECTORY_COLUMNS, zip(fit.times, fit.deviations, fit.deviations_l2))
    if cfg.output.plots:
        plotting.trajectory(out.path("trajectory.svg"), fit.times, fit.deviations, fit.rate)
    summary = {"eps": e.eps, "sigma0": zeros[0].sigma0, "re_lambda0": pt.critical_eig.real,
               "im_lambda0": pt.critical_eig.imag, "rate": fit.rate, "correlation": fit.correlation,
               "fit_window": list(fit.fit_window), "verdict": fit.verdict, "note": fit.note}
    if fit.blow_up_t is not None:
        exc = BlowUpError(fit.blow_up_t)
        exc.summary = summary
        raise exc
    return summary


def cmd_reduce(cfg: RunConfig, out: OutputDir) -> dict:
    d = cfg.reductions.dual_pump
    dp = DualPumpParams(d.d, d.zeta, d.mu, d.f0, d.f1, d.k1, d.nu1)
    rep = dual_pump_validate(dp, cfg.grid())
    summary = {"full": rep.to_dict()}
    out.state("reduced_state.json", rep.solution)
    out.state("mapped_state.json", rep.mapped)
    if cfg.reductions.halve_f1 and dp.f1 != 0:
        half = DualPumpParams(d.d, d.zeta, d.mu, d.f0, d.f1 / 2, d.k1, d.nu1)
        rh = dual_pump_validate(half, cfg.grid())
        summary["half"] = rh.to_dict()
        summary["residual_ratio"] = rep.mapped_residual / rh.mapped_residual
    if cfg.output.plots:
        u = rep.solution
        plotting.profile(out.path("reduced_profile.svg"), u.grid.points, u.intensity, "reduced state")
    return summary


def cmd_asymptotics(cfg: RunConfig, out: OutputDir) -> dict:
    a = cfg.reductions.asymptotics
    rep = asymptotics_check(a.zeta, a.d, a.f0, tuple(a.mus), samples=a.samples)
    cols = ["sigma", "leading"] + [f"full_mu_{m:g}" for m in rep.mus]
    rows = zip(rep.sigma, rep.leading, *[rep.full[m] for m in rep.mus])
    out.csv("asymptotics.csv", cols, rows)
    return rep.to_dict()


HANDLERS = {
    "solve": cmd_solve,
    "continue": cmd_continue,
    "spectrum": cmd_spectrum,
    "veff": cmd_veff,
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
    "asymptotics": cmd_asymptotics,
}


def run(cfg: RunConfig, output: Path | None = None) -> int:
    """Execute a validated configuration; returns the exit status."""
    out = OutputDir(Path(output or cfg.output.dir))
    out.text("config.yaml", echo(cfg))
    try:
        summary = HANDLERS[cfg.command](cfg, out)
    except BlowUpError as exc:
        log.error("blow-up: %s", exc)
        out.json("summary.json", {"command": cfg.command, "status": "blow_up", "error": str(exc),
                                  **getattr(exc, "summary", {})})
        out.manifest(False, "blow_up")
        return EXIT_BLOWUP
    except SolveError as exc:
        log.error("solve failure: %s", exc)
        out.json("summary.json", {"command": cfg.command, "status": "solve_failure", "error": str(exc)})
        out.manifest(False, "solve_failure")
        return EXIT_SOLVE
    out.json("summary.json", {"command": cfg.command, "status": "ok", **summary})
    out.manifest(True, "ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lle-pinning", description=__doc__)
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="overrides 'command' in the config")
    ap.add_argument("--config", type=Path, help="YAML run configuration")
    ap.add_argument("--output", type=Path, help="output directory (overrides output.dir)")
    ap.add_argument("--seed", type=int, help="seed for randomized perturbations")
    ap.add_argument("--quiet", action="store_true", help="only report warnings and errors")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {}
    if args.command:
        overrides["command"] = args.command
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output is not None:
        overrides["output.dir"] = str(args.output)
    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text, overrides)
    except (OSError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
