"""Scalar multiplier solving and the closed-form per-gain optimizers.

Every multiplier in the capacity expressions is pinned down by one monotone
scalar constraint equation (budget met with equality), so bracketed
bisection after geometric bracket expansion is sufficient and unconditionally
robust.  The optimizer formulas below use the convention that multipliers
are stationarity constants of the objective measured in nats; this is the
normalization under which the jammer profile is the positive root of

    g^2 P / ((psi + sigma^2)(psi + sigma^2 + g^2 P)) = 2 lambda,

and it is validated in the tests through the KKT equalization identities,
which do not depend on the normalization choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

__all__ = [
    "MultiplierSolution",
    "TargetUnattainable",
    "solve_monotone",
    "phi_star_tx",
    "psi_star_jam",
    "phi_psi_star_joint",
]

_MAX_EXPANSIONS = 120
_MAX_BISECTIONS = 200


class TargetUnattainable(RuntimeError):
    """The constraint target is outside the range of the monotone function."""


@dataclass
class MultiplierSolution:
    lam: float
    residual: float
    iterations: int


def solve_monotone(
    f: Callable[[float], float],
    target: float,
    bracket_hint: Tuple[float, float] = (1e-6, 1.0),
    tol: float = 1e-10,
) -> MultiplierSolution:
    """Solve f(lam) = target for a function monotone on (0, inf).

    The initial bracket is expanded geometrically (halving the lower end,
    doubling the upper) until the target is straddled, then bisected until
    |f(lam) - target| <= tol.  Raises TargetUnattainable if no bracket is
    found after 120 doublings, which upstream code uses to detect e.g.
    symmetrizable regimes where a budget cannot be met.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = bracket_hint
    if not (0 < lo < hi):
        raise ValueError("bracket_hint must satisfy 0 < lo < hi")
    flo, fhi = f(lo), f(hi)
    increasing = fhi >= flo
    evals = 2

    def below(val: float) -> bool:
        # true if val is on the "lo side" of the target
        return val < target if increasing else val > target

    k = 0
    while below(fhi) and k < _MAX_EXPANSIONS:
        hi *= 2.0
        fhi = f(hi)
        evals += 1
        k += 1
    if below(fhi):
        raise TargetUnattainable("target unattainable")
    k = 0
    while not below(flo) and k < _MAX_EXPANSIONS:
        if abs(flo - target) <= tol:  # already at the target on the low end
            return MultiplierSolution(lo, flo - target, evals)
        lo *= 0.5
        flo = f(lo)
        evals += 1
        k += 1
    if not below(flo):
        raise TargetUnattainable("target unattainable")

    mid, fmid = lo, flo
    for it in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid - target) <= tol:
            return MultiplierSolution(mid, fmid - target, it + 1)
        if below(fmid):
            lo = mid
        else:
            hi = mid
    return MultiplierSolution(mid, fmid - target, _MAX_BISECTIONS)


def phi_star_tx(g, lam: float, params) -> np.ndarray:
    """Water-filling transmit profile |lam - (Lambda + sigma^2)/g^2|+ .

    Zero-gain entries get zero power (the formula's g -> 0 limit).
    """
    g = np.asarray(g, dtype=float)
    noise = params.Lambda + params.sigma2
    with np.errstate(divide="ignore"):
        out = np.where(g > 0, np.maximum(lam - noise / np.where(g > 0, g, 1.0) ** 2, 0.0), 0.0)
    return out if out.ndim else float(out)


def psi_star_jam(g, lam: float, params) -> np.ndarray:
    """Jammer noise profile against a constant-power transmitter.

    Evaluates |(-2 sigma^2 - g^2 P + sqrt(g^4 P^2 + 2 g^2 P / lam)) / 2|+
    in the cancellation-free form (g^2 P / lam) / (D + g^2 P) - sigma^2,
    D = sqrt(g^4 P^2 + 2 g^2 P / lam).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    g = np.asarray(g, dtype=float)
    a = g * g * params.P
    disc = np.sqrt(a * a + 2.0 * a / lam)
    with np.errstate(invalid="ignore", divide="ignore"):
        interior = np.where(a > 0, (a / lam) / np.where(a > 0, disc + a, 1.0), 0.0)
    out = np.maximum(interior - params.sigma2, 0.0)
    return out if out.ndim else float(out)


def phi_psi_star_joint(g, l1: float, l2: float, l3: float, params):
    """Joint saddle profiles for the gain-aware max-min capacities.

    With multipliers (l1, l2, l3) for the transmit budget, the jam budget,
    and the anti-symmetrization constraint E[G^2 phi] >= Lambda:

        phi(g) = | 1 / (2 a (1 + a / b)) |+ ,  a = l1 - g^2 l3,  b = g^2 l2,
        psi(g) = | g^2 / (2 (a + b)) - sigma^2 |+ .

    Setting l3 = 0 gives the unconstrained (always-positive) variant.
    Zero-gain entries map to (0, 0).  At isolated poles (a = 0 or
    a + b = 0) the one-sided limit from above is returned, i.e. +inf.
    """
    g = np.asarray(g, dtype=float)
    g2 = g * g
    a = l1 - g2 * l3
    b = g2 * l2
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(g2 > 0, np.maximum(b / (2.0 * a * (a + b)), 0.0), 0.0)
        psi = np.where(g2 > 0, np.maximum(g2 / (2.0 * (a + b)) - params.sigma2, 0.0), 0.0)
        phi = np.where((g2 > 0) & (a == 0), np.inf, phi)
        psi = np.where((g2 > 0) & (a + b == 0), np.inf, psi)
    if phi.ndim:
        return phi, psi
    return float(phi), float(psi)
