"""End-to-end pipelines shared by the command line and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .continuation import Branch, continue_branch, continue_both_ways
from .evolution import DecayFit, EvolutionConfig, evolve_and_fit
from .field import Field, TorusGrid, shift
from .operators import KernelPair, assemble, kernel_pair
from .pinning import EffectivePotential, ZeroRecord, find_zeros
from .stationary import (
    NEWTON_MAXITER,
    NEWTON_TOL,
    NewtonReport,
    Params,
    SolveError,
    initial_guess,
    l2_norm,
    newton_solve,
    residual,
)

SHIFT_TOL = 1e-10


def guess_kind(p: Params, guess: str = "auto") -> str:
    if guess == "auto":
        return "bright" if p.d > 0 else "dark"
    return guess


def soliton(p: Params, grid: Optional[TorusGrid] = None, guess: str = "auto",
            tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER) -> NewtonReport:
    """Even soliton of the translation-invariant problem (``eps`` is ignored)."""
    grid = grid or TorusGrid()
    p0 = p.with_(eps=0.0)
    u0 = initial_guess(guess_kind(p, guess), p0, grid)
    return newton_solve(u0, p0, phase_fix="even_subspace", tol=tol, maxiter=maxiter)


@dataclass
class PinningAnalysis:
    solution: Field
    params: Params  # eps = 0
    kernel: KernelPair
    veff: EffectivePotential

    def select(self, which: str) -> list:
        zs = self.veff.zeros
        if which == "all":
            return list(zs)
        pick = [z for z in zs if (z.sigma0 < 0) == (which == "negative")]
        return pick[:1] if which == "negative" else pick[-1:]

    def shifted(self, zero: ZeroRecord) -> Field:
        """Soliton centred at ``zero``; re-solved when the grid shift is not exact."""
        u = shift(self.solution, zero.sigma0)
        if l2_norm(residual(u, self.params)) <= SHIFT_TOL:
            return u
        # a coarse grid resolves the shifted profile differently; polish it in place
        rep = newton_solve(u, self.params, phase_fix="orthogonal_to_translation")
        if not rep.converged:
            raise SolveError(f"shifted soliton does not solve the problem (|F| = {rep.residual_norm:.2e})")
        return rep.solution


def analyse(u0: Field, p: Params, samples: int = 720) -> PinningAnalysis:
    p0 = p.with_(eps=0.0)
    kp = kernel_pair(assemble(u0, p0))
    return PinningAnalysis(u0, p0, kp, find_zeros(kp, p.potential, samples))


def eps_branch(analysis: PinningAnalysis, zero: ZeroRecord, half_width: float, **kw) -> Branch:
    return continue_both_ways(analysis.shifted(zero), analysis.params, "eps", half_width, **kw)


def state_at_eps(analysis: PinningAnalysis, zero: ZeroRecord, eps: float, **kw):
    """Continue from the pinned soliton to ``eps`` and return the final branch point."""
    if eps == 0.0:
        return continue_branch(analysis.shifted(zero), analysis.params, "eps", (0.0, 0.0),
                               max_points=1, **kw).points[0]
    rng = (min(0.0, eps), max(0.0, eps))
    br = continue_branch(analysis.shifted(zero), analysis.params, "eps", rng,
                         1.0 if eps > 0 else -1.0, **kw)
    last = br.points[-1]
    if abs(last.param - eps) > 1e-12:
        raise SolveError(f"eps-continuation stopped at {last.param:.6g} before reaching {eps}")
    return last


def simulate(analysis: PinningAnalysis, zero: ZeroRecord, cfg: EvolutionConfig, eps: float):
    pt = state_at_eps(analysis, zero, eps)
    p = analysis.params.with_(eps=eps)
    fit: DecayFit = evolve_and_fit(pt.state, p, cfg)
    return pt, fit
