"""Fading-gain distributions: expectations, quantization, and sampling.

Three gain models are supported: Rayleigh with a scale parameter, a finite
set of discrete atoms (useful because point masses and two-atom models have
closed-form optima), and a generic density truncated to a finite interval.

Expectations over continuous models are computed with composite
Gauss-Legendre quadrature on a truncated support.  Continuous supports are
cut at the 1 - 1e-12 quantile; the neglected tail contributes less than
1e-10 to every moment used here, which keeps the default 1e-9 expectation
tolerance honest.  Callers that integrate functions with known kinks (for
example water-filling profiles, which are only piecewise smooth) can pass
the kink locations so panel edges are aligned with them; otherwise the
quadrature falls back to panel doubling until the estimate stabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "Rayleigh",
    "Discrete",
    "TruncatedDensity",
    "FadingModel",
    "QuantizedGains",
    "ExpectationDiverged",
    "expect",
    "quantize",
    "sample_gains",
]

TAIL_MASS = 1e-12  # truncation: keep all but this much probability
_PROB_TOL = 1e-12
_MAX_PANELS = 8192
_GL_ORDER = 24


class ExpectationDiverged(ArithmeticError):
    """Raised when quadrature fails to stabilize (non-integrable integrand)."""


@dataclass(frozen=True)
class Rayleigh:
    """Rayleigh fading with pdf (g/scale^2) exp(-g^2 / (2 scale^2)), g >= 0."""

    scale: float

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"Rayleigh scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class Discrete:
    """Finite gain distribution given as ((gain, prob), ...)."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(g), float(p)) for g, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("Discrete model needs at least one atom")
        gains = np.array([g for g, _ in atoms])
        probs = np.array([p for _, p in atoms])
        if np.any(gains < 0) or not np.all(np.isfinite(gains)):
            raise ValueError("gains must be finite and nonnegative")
        if np.any(probs <= 0):
            raise ValueError("atom probabilities must be positive")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise ValueError(f"atom probabilities sum to {probs.sum()!r}, not 1")

    @property
    def gains(self) -> np.ndarray:
        return np.array([g for g, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])


@dataclass(frozen=True)
class TruncatedDensity:
    """Generic density on a finite support [lo, hi].

    The pdf need not be normalized; the total mass on the support is
    computed once and divided out.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    support: tuple

    def __post_init__(self):
        lo, hi = self.support
        if not (np.isfinite(lo) and np.isfinite(hi) and 0 <= lo < hi):
            raise ValueError(f"support must satisfy 0 <= lo < hi, got {self.support}")
        object.__setattr__(self, "support", (float(lo), float(hi)))


FadingModel = Union[Rayleigh, Discrete, TruncatedDensity]


@dataclass(frozen=True)
class QuantizedGains:
    """Finite representation of a gain distribution.

    Each atom is the conditional mean of the gain over its quantization
    cell; ``nu`` is the largest conditional variance over the cells.
    ``edges`` are the cell boundaries, used to map raw gains to atoms.
    """

    gains: np.ndarray
    probs: np.ndarray
    nu: float
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=float))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        if abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("quantized probabilities must sum to 1")
        if np.any(self.gains < 0) or np.any(self.probs <= 0):
            raise ValueError("quantized atoms must have nonnegative gain, positive prob")

    def __len__(self) -> int:
        return len(self.gains)

    def cell_index(self, g) -> np.ndarray:
        """Index of the cell containing each raw gain (clipped to end cells)."""
        idx = np.searchsorted(self.edges[1:-1], np.asarray(g, dtype=float), side="right")
        return np.clip(idx, 0, len(self.gains) - 1)

    def atom_of(self, g) -> np.ndarray:
        """Quantized gain for each raw gain."""
        return self.gains[self.cell_index(g)]

    def expect_values(self, values) -> float:
        """Expectation of a per-atom value vector."""
        return float(self.probs @ np.asarray(values, dtype=float))


# ---------------------------------------------------------------------------
# quadrature machinery


@lru_cache(maxsize=None)
def _gl_rule(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_nodes(edges: np.ndarray, order: int = _GL_ORDER):
    """Gauss-Legendre nodes/weights for panels delimited by ``edges``."""
    x, w = _gl_rule(order)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _support(model) -> tuple:
    if isinstance(model, Rayleigh):
        hi = model.scale * np.sqrt(-2.0 * np.log(TAIL_MASS))
        return 0.0, float(hi)
    if isinstance(model, TruncatedDensity):
        return model.support
    raise TypeError(f"not a continuous fading model: {model!r}")


def _pdf(model) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(model, Rayleigh):
        s2 = model.scale**2
        return lambda g: (g / s2) * np.exp(-(g * g) / (2.0 * s2))
    if isinstance(model, TruncatedDensity):
        return model.pdf
    raise TypeError(f"not a continuous fading model: {model!r}")


def _edges_with_breaks(lo: float, hi: float, panels: int, breakpoints) -> np.ndarray:
    edges = np.linspace(lo, hi, panels + 1)
    if breakpoints:
        pts = [b for b in breakpoints if lo < b < hi]
        if pts:
            edges = np.unique(np.concatenate([edges, np.asarray(pts, dtype=float)]))
    return edges


@lru_cache(maxsize=512)
def _cached_grid(model, panels: int, breakpoints: tuple):
    lo, hi = _support(model)
    edges = _edges_with_breaks(lo, hi, panels, breakpoints)
    nodes, weights = _panel_nodes(edges)
    dens = _pdf(model)(nodes)
    mass = float(weights @ dens)
    return nodes, weights * dens / mass


def expect(f, model, tol: float = 1e-9, breakpoints: Sequence[float] = ()) -> float:
    """Expectation E[f(G)] with absolute error below ``tol``.

    ``f`` must accept numpy arrays.  Discrete models are summed exactly.
    For continuous models the panel count doubles until two successive
    composite Gauss-Legendre estimates agree to ``tol``; known kink
    locations of ``f`` may be passed via ``breakpoints``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(model, Discrete):
        return float(model.probs @ np.asarray(f(model.gains), dtype=float))

    bp = tuple(sorted(float(b) for b in breakpoints))
    panels = 64
    nodes, wts = _cached_grid(model, panels, bp)
    est = float(wts @ np.asarray(f(nodes), dtype=float))
    if not np.isfinite(est):
        raise ExpectationDiverged("expectation diverged")
    while panels < _MAX_PANELS:
        panels *= 2
        nodes, wts = _cached_grid(model, panels, bp)
        new = float(wts @ np.asarray(f(nodes), dtype=float))
        if not np.isfinite(new):
            raise ExpectationDiverged("expectation diverged")
        if abs(new - est) <= 0.5 * tol:
            return new
        est = new
    raise ExpectationDiverged("expectation diverged")


# ---------------------------------------------------------------------------
# quantization


def _cell_moments(model, edges: np.ndarray):
    """Per-cell (mass, mean, variance) by high-order quadrature."""
    dens = _pdf(model)
    x, w = _gl_rule(60)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo) + half * x[None, :]
    wts = half * w[None, :] * dens(nodes)
    mass = wts.sum(axis=1)
    if np.any(mass <= 0):
        raise ValueError("quantization cell with zero probability mass")
    mean = (wts * nodes).sum(axis=1) / mass
    second = (wts * nodes * nodes).sum(axis=1) / mass
    var = np.maximum(second - mean * mean, 0.0)
    return mass, mean, var


def _quantile_edges(model, cells: int) -> np.ndarray:
    lo, hi = _support(model)
    if isinstance(model, Rayleigh):
        total = 1.0 - TAIL_MASS
        u = total * np.arange(1, cells) / cells
        inner = model.scale * np.sqrt(-2.0 * np.log1p(-u))
        return np.concatenate([[lo], inner, [hi]])
    # generic density: invert the numeric CDF by bisection per edge
    dens = _pdf(model)
    grid = np.linspace(lo, hi, 16385)
    vals = dens(grid)
    cdf = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) * 0.5 * np.diff(grid))])
    cdf /= cdf[-1]
    targets = np.arange(1, cells) / cells
    inner = np.interp(targets, cdf, grid)
    return np.concatenate([[lo], inner, [hi]])


def quantize(model, cells: int) -> QuantizedGains:
    """Quantize a gain model to ``cells`` atoms of (near) equal probability.

    Atoms are conditional means of the gain within each cell, so the
    quantized distribution preserves E[G] cell-by-cell; the reported ``nu``
    bounds the conditional variance in every cell and shrinks as ``cells``
    grows.
    """
    if cells < 1:
        raise ValueError("cells must be >= 1")
    if isinstance(model, Discrete):
        gains = model.gains
        probs = model.probs
        order = np.argsort(gains, kind="stable")
        gains, probs = gains[order], probs[order]
        if cells >= len(gains):
            edges = np.concatenate(
                [[gains[0]], 0.5 * (gains[1:] + gains[:-1]), [gains[-1]]]
            )
            return QuantizedGains(gains, probs, 0.0, edges)
        # greedy grouping into `cells` contiguous bins of near-equal mass,
        # always leaving enough atoms for the bins still to be filled
        bins: list[list[int]] = []
        start = 0
        remaining = 1.0
        for c in range(cells):
            target = remaining / (cells - c)
            mass = probs[start]
            end = start + 1
            while mass < target and len(gains) - end > cells - c - 1:
                mass += probs[end]
                end += 1
            if c == cells - 1:
                end = len(gains)
                mass = probs[start:end].sum()
            bins.append(list(range(start, end)))
            remaining -= mass
            start = end
        q_gains, q_probs, q_var = [], [], []
        for idx in bins:
            p = probs[idx].sum()
            m = float(probs[idx] @ gains[idx] / p)
            v = float(probs[idx] @ (gains[idx] - m) ** 2 / p)
            q_gains.append(m)
            q_probs.append(p)
            q_var.append(v)
        bounds = [gains[b[-1]] for b in bins[:-1]]
        nxt = [gains[b[0]] for b in bins[1:]]
        inner = [0.5 * (a + b) for a, b in zip(bounds, nxt)]
        edges = np.concatenate([[gains[0]], inner, [gains[-1]]])
        return QuantizedGains(np.array(q_gains), np.array(q_probs), max(q_var), edges)

    edges = _quantile_edges(model, cells)
    mass, mean, var = _cell_moments(model, edges)
    probs = mass / mass.sum()
    return QuantizedGains(mean, probs, float(var.max()), edges)


# ---------------------------------------------------------------------------
# sampling


def _sample_with_rng(model, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(model, Rayleigh):
        return rng.rayleigh(scale=model.scale, size=n)
    if isinstance(model, Discrete):
        return rng.choice(model.gains, size=n, p=model.probs)
    if isinstance(model, TruncatedDensity):
        lo, hi = model.support
        grid = np.linspace(lo, hi, 65537)
        vals = model.pdf(grid)
        cdf = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) * 0.5 * np.diff(grid))])
        cdf /= cdf[-1]
        return np.interp(rng.random(n), cdf, grid)
    raise TypeError(f"invalid fading model: {model!r}")


def sample_gains(model, n: int, seed: int) -> np.ndarray:
    """n i.i.d. gains; identical output for identical (model, n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed & (2**64 - 1)))
    return _sample_with_rng(model, n, rng)
