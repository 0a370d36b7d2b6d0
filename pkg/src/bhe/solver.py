"""Damped Gauss-Newton on momentum profiles, plus 1D elliptic solves.

The unknowns are interior profile values with the two pole-smoothness
constraints eliminated per sphere factor; the class data (half-lengths,
hence areas, and the anti-self-dual coefficient) never move.  The residual
is the full tensor-grid field of the fourth-order scalar equation, so the
system is rectangular and least-squares is the natural formulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frame_geometry import ValidationError
from .toric import ProductSurface, SphereProfile, laplacian_1d, pde_residual


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    tolerance: float = 1e-8
    damping: float = 0.5
    min_step: float = 1e-6
    fd_step: float = 1e-6
    grid: int = 64

    def __post_init__(self):
        ok = (
            self.max_iterations > 0
            and 0 < self.tolerance < 1
            and 0 < self.damping < 1
            and self.min_step > 0
            and self.fd_step > 0
            and self.grid >= 16
        )
        if not ok:
            raise ValidationError("solver configuration out of range")


@dataclass
class SolveTrace:
    """Verbatim iteration history of a Gauss-Newton run."""

    flag: str
    surface: ProductSurface
    residual_sup: list[float] = field(default_factory=list)
    residual_l2: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def final_residual(self) -> float:
        return self.residual_sup[-1]

    def to_dict(self) -> dict:
        return {
            "flag": self.flag,
            "iterations": self.iterations,
            "final_residual_sup": self.final_residual,
            "residual_sup": list(self.residual_sup),
            "residual_l2": list(self.residual_l2),
            "steps": list(self.steps),
        }

    def history_rows(self) -> list[tuple[int, float, float]]:
        rows = [(0, self.residual_sup[0], 0.0)]
        for i, (r, s) in enumerate(zip(self.residual_sup[1:], self.steps), start=1):
            rows.append((i, r, s))
        return rows


# ---------------------------------------------------------------------------
# 1D elliptic solve
# ---------------------------------------------------------------------------


def poisson_1d(p: SphereProfile, rhs: np.ndarray, compat_tol: float = 1e-8) -> np.ndarray:
    """Solve (Theta u')' = rhs with zero-mean gauge and regular endpoints.

    The right-hand side must integrate to zero (solvability); the returned
    solution satisfies the discrete equation to 1e-10 relative whenever the
    discrete system is exactly compatible (odd data on symmetric profiles,
    and anything in the range of the operator).
    """
    rhs = np.asarray(rhs, dtype=float)
    w = p.weights()
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if abs(float(np.sum(rhs * w))) > compat_tol * scale:
        raise ValidationError("incompatible right-hand side: nonzero mean")
    npts = rhs.shape[0]
    L = np.empty((npts, npts))
    for k in range(npts):
        e = np.zeros(npts)
        e[k] = 1.0
        L[:, k] = laplacian_1d(p, e)
    u, *_ = np.linalg.lstsq(L, rhs, rcond=None)
    roundtrip = float(np.max(np.abs(L @ u - rhs)))
    if roundtrip > compat_tol * scale:
        raise ValidationError(
            f"incompatible right-hand side: residual {roundtrip:.3e} after projection"
        )
    u = u - float(np.sum(u * w)) / float(np.sum(w))
    return u


# ---------------------------------------------------------------------------
# profile parametrization with pole constraints eliminated
# ---------------------------------------------------------------------------


def _pack(s: ProductSurface) -> np.ndarray:
    parts = []
    for p in (s.factor1, s.factor2):
        if p.kind == "sphere":
            parts.append(p.theta[2:-2])
    return np.concatenate(parts) if parts else np.zeros(0)


def _unpack(s0: ProductSurface, x: np.ndarray) -> ProductSurface:
    factors = []
    pos = 0
    for p in (s0.factor1, s0.factor2):
        if p.kind == "sphere":
            m = p.n - 3
            inner = x[pos : pos + m]
            pos += m
            h = p.h
            theta = np.empty(p.n + 1)
            theta[0] = theta[-1] = 0.0
            theta[2:-2] = inner
            # pole smoothness: one-sided Theta'(-c) = 2, Theta'(c) = -2
            theta[1] = (4.0 * h + inner[0]) / 4.0
            theta[-2] = (4.0 * h + inner[-1]) / 4.0
            factors.append(SphereProfile(p.c, p.n, theta, "sphere"))
        else:
            factors.append(p)
    return ProductSurface(factors[0], factors[1], s0.a)


def _residual(s0: ProductSurface, x: np.ndarray) -> np.ndarray:
    return pde_residual(_unpack(s0, x)).E.ravel()


def _jacobian(s0: ProductSurface, x: np.ndarray, r0: np.ndarray, fd_step: float) -> np.ndarray:
    J = np.empty((r0.size, x.size))
    for k in range(x.size):
        delta = fd_step * max(1.0, abs(x[k]))
        xk = x.copy()
        xk[k] += delta
        J[:, k] = (_residual(s0, xk) - r0) / delta
    return J


def newton_solve(s0: ProductSurface, cfg: SolverConfig | None = None) -> SolveTrace:
    """Damped Gauss-Newton on the profile unknowns.

    Accepted steps strictly decrease the l2 residual; rank-deficient normal
    directions are truncated at 1e-10 of the leading singular value; steps
    that make a profile nonpositive are rejected and damped like any other
    failed step.
    """
    cfg = cfg or SolverConfig()
    x = _pack(s0)
    r = _residual(s0, x)
    trace = SolveTrace(flag="", surface=_unpack(s0, x))
    trace.residual_sup.append(float(np.max(np.abs(r))))
    trace.residual_l2.append(float(np.linalg.norm(r)))
    if trace.residual_sup[0] <= cfg.tolerance:
        trace.flag = "at-floor"
        return trace
    if x.size == 0:
        trace.flag = "stalled"
        return trace

    for _ in range(cfg.max_iterations):
        J = _jacobian(s0, x, r, cfg.fd_step)
        p, *_ = np.linalg.lstsq(J, -r, rcond=1e-10)
        lam = 1.0
        norm0 = np.linalg.norm(r)
        accepted = False
        while lam >= cfg.min_step:
            x_try = x + lam * p
            try:
                r_try = _residual(s0, x_try)
            except ValidationError:
                lam *= cfg.damping  # positivity or smoothness violated
                continue
            if np.linalg.norm(r_try) < norm0:
                accepted = True
                break
            lam *= cfg.damping
        if not accepted:
            trace.flag = "stalled"
            trace.surface = _unpack(s0, x)
            return trace
        x, r = x_try, r_try
        trace.residual_sup.append(float(np.max(np.abs(r))))
        trace.residual_l2.append(float(np.linalg.norm(r)))
        trace.steps.append(lam)
        if trace.residual_sup[-1] <= cfg.tolerance:
            trace.flag = "converged"
            trace.surface = _unpack(s0, x)
            return trace

    trace.flag = "max-iterations"
    trace.surface = _unpack(s0, x)
    return trace
