"""Adaptive semi-infinite quadrature for resonance-peaked thermal integrands.

The integrands handled here live on u in [0, inf) and combine a Lorentzian
resonance at u = 1 of width ~1/Q, a thermal factor that may decay
exponentially, and a slowly decaying cutoff tail beyond u_C.  The primary
rule is adaptive Gauss-Legendre with a nested (order n vs 2n) error estimate
and an initial panel layout at {0, 1-w, 1+w, c*u_C} with w = max(5/Q, 1e-3);
the tail beyond c*u_C is mapped to a finite interval by u -> 1/v.

:func:`cross_check` evaluates the same integral with a structurally different
rule (QUADPACK via scipy) and fails hard on disagreement; golden reference
values in the test suite were minted with it.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

REL_TOL_MIN = 1e-12
REL_TOL_MAX = 1e-4
_MAX_PANELS = 4000
_TAIL_FACTOR = 10.0  # c in the {0, 1-w, 1+w, c*u_C} panel layout

_NODES_LO, _WEIGHTS_LO = leggauss(12)
_NODES_HI, _WEIGHTS_HI = leggauss(24)


class QuadratureError(RuntimeError):
    """Non-convergence or cross-rule disagreement; never silently truncated."""


@dataclass(frozen=True)
class IntegrandSpec:
    """A real integrand on [0, inf) with structure hints.

    fn must accept an ndarray of u values (all > 0) and return an ndarray.
    ``peak_width`` is the resonance half-width hint (w above), ``cutoff`` the
    u_C beyond which the integrand enters its power-law tail, and
    ``tail_power`` the asymptotic decay exponent p in |f| ~ u^-p (p > 1).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    peak_width: float = 1e-3
    cutoff: float = 1.0
    tail_power: float = 3.0


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error: float
    rel_error: float
    panels: int
    converged: bool


def _panel_estimate(fn, a: float, b: float) -> tuple[float, float]:
    """Return (integral, error estimate) on [a, b] from nested GL rules."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    lo = half * np.dot(_WEIGHTS_LO, fn(mid + half * _NODES_LO))
    hi = half * np.dot(_WEIGHTS_HI, fn(mid + half * _NODES_HI))
    return hi, abs(hi - lo)


def _adaptive(fn, breakpoints, rel_tol: float, panel_budget: int) -> tuple[float, float, int]:
    heap: list[tuple[float, float, float, float, float]] = []
    total = 0.0
    total_err = 0.0
    n_panels = 0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        if b <= a:
            continue
        val, err = _panel_estimate(fn, a, b)
        total += val
        total_err += err
        n_panels += 1
        heapq.heappush(heap, (-err, a, b, val, err))

    scale = max(abs(total), 1e-300)
    while total_err > rel_tol * scale and heap:
        if n_panels >= panel_budget:
            raise QuadratureError(
                f"quadrature did not converge within {panel_budget} panels "
                f"(abs err {total_err:.3e}, value {total:.6e})"
            )
        _, a, b, val, err = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        v1, e1 = _panel_estimate(fn, a, mid)
        v2, e2 = _panel_estimate(fn, mid, b)
        total += (v1 + v2) - val
        total_err += (e1 + e2) - err
        n_panels += 1
        heapq.heappush(heap, (-e1, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, b, v2, e2))
        scale = max(abs(total), 1e-300)
    return total, total_err, n_panels


def _breakpoints(spec: IntegrandSpec) -> list[float]:
    w = max(spec.peak_width, 1e-3)
    tail_start = _TAIL_FACTOR * max(spec.cutoff, 1.0)
    pts = [0.0, max(1.0 - w, 0.0), 1.0 + w]
    # geometric ladder between the resonance and the tail edge keeps panels
    # commensurate with the locally relevant scale
    x = 2.0
    while x < tail_start:
        pts.append(x)
        x *= 4.0
    pts.append(tail_start)
    return sorted(set(p for p in pts if 0.0 <= p <= tail_start))


def integrate_semi_infinite(spec: IntegrandSpec, rel_tol: float = 1e-10) -> QuadResult:
    """Integrate spec.fn over [0, inf) to the requested relative tolerance."""
    if not REL_TOL_MIN <= rel_tol <= REL_TOL_MAX:
        raise ValueError(f"rel_tol must lie in [{REL_TOL_MIN}, {REL_TOL_MAX}]")
    if spec.tail_power <= 1.0:
        raise ValueError("tail_power must exceed 1 for a convergent integral")

    pts = _breakpoints(spec)
    tail_start = pts[-1]
    value, err, n_panels = _adaptive(spec.fn, pts, 0.5 * rel_tol, _MAX_PANELS)

    # tail via u -> 1/v: integral over (0, 1/tail_start] of fn(1/v)/v^2
    def tail_fn(v: np.ndarray) -> np.ndarray:
        return spec.fn(1.0 / v) / (v * v)

    tval, terr, tn = _adaptive(tail_fn, [0.0, 1.0 / tail_start], 0.5 * rel_tol, _MAX_PANELS)
    value += tval
    err += terr
    n_panels += tn

    scale = max(abs(value), 1e-300)
    converged = err <= rel_tol * scale
    if not converged:
        raise QuadratureError(
            f"semi-infinite quadrature failed to reach rel_tol={rel_tol:g} "
            f"(achieved {err / scale:.3e})"
        )
    return QuadResult(value=value, abs_error=err, rel_error=err / scale,
                      panels=n_panels, converged=True)


def cross_check(spec: IntegrandSpec, rel_tol: float = 1e-10) -> QuadResult:
    """Evaluate with QUADPACK (different panel family and order) and compare.

    Used to mint independent reference values; disagreement with the primary
    rule beyond the combined tolerance is a hard failure.
    """
    primary = integrate_semi_infinite(spec, rel_tol)

    fn = lambda u: float(spec.fn(np.atleast_1d(u))[0])
    w = max(spec.peak_width, 1e-3)
    tail_start = _TAIL_FACTOR * max(spec.cutoff, 1.0)
    total = 0.0
    total_err = 0.0
    edges = sorted({0.0, max(1.0 - w, 0.0), min(1.0 + w, tail_start), 2.0, tail_start})
    edges = [e for e in edges if e <= tail_start]
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        val, err = quad(fn, a, b, epsabs=0.0, epsrel=rel_tol * 0.1, limit=400)
        total += val
        total_err += err
    tval, terr = quad(lambda v: fn(1.0 / v) / (v * v), 0.0, 1.0 / tail_start,
                      epsabs=abs(total) * rel_tol * 0.1 + 1e-300,
                      epsrel=rel_tol * 0.1, limit=400)
    total += tval
    total_err += terr

    scale = max(abs(total), abs(primary.value), 1e-300)
    combined = (primary.abs_error + total_err) / scale + 2.0 * rel_tol
    if abs(total - primary.value) > combined * scale:
        raise QuadratureError(
            f"cross-check disagreement: primary {primary.value!r} vs "
            f"QUADPACK {total!r} exceeds combined tolerance {combined:.3e}"
        )
    return QuadResult(value=total, abs_error=total_err,
                      rel_error=total_err / scale, panels=0, converged=True)
