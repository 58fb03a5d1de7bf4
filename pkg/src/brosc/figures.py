"""Grid evaluations behind the figure-data CLI subcommands.

Each function returns a (header, columns) pair ready for CSV emission:
``header`` is a list of column names, ``columns`` a dict mapping each name to
a 1-D ndarray.  Unstable grid points are marked (stable = 0, value = nan),
never computed.
"""

from __future__ import annotations

import numpy as np

from .config import BathStatistics, ReducedParams
from .steady import bath_integrals, heisenberg_bound, virial_factor

_Q = BathStatistics.QUANTUM
_CL = BathStatistics.CLASSICAL_HIGH_T


def _kv(q: float, u_c: float, t_tilde: float, stat: BathStatistics,
        rel_tol: float = 1e-9) -> tuple[float, float]:
    b = bath_integrals(q, u_c, t_tilde, stat, rel_tol)
    return b.i_k / (2.0 * q), b.i_v / (2.0 * q)


def temperature_grid(lo: float = 0.05, hi: float = 100.0, n: int = 40) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def fig2_table(q_values=(10.0, 20.0, 40.0), t_grid=None, u_c: float = 1e3,
               rel_tol: float = 1e-9):
    """Virial ratio vs reduced temperature: quantum ratio, Heisenberg bound,
    and the classical-bath ratio, for each quality factor."""
    if t_grid is None:
        t_grid = temperature_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    header = ["t_tilde"]
    cols = {"t_tilde": t_grid}
    for q in q_values:
        r = np.empty_like(t_grid)
        rh = np.empty_like(t_grid)
        rcl = np.empty_like(t_grid)
        for i, tt in enumerate(t_grid):
            k, v = _kv(q, u_c, tt, _Q, rel_tol)
            r[i] = k / v
            rh[i] = heisenberg_bound(v)
            kc, vc = _kv(q, u_c, tt, _CL, rel_tol)
            rcl[i] = kc / vc
        tag = f"q{q:g}"
        for name, arr in ((f"r_{tag}", r), (f"rh_{tag}", rh), (f"rcl_{tag}", rcl)):
            header.append(name)
            cols[name] = arr
    return header, cols


def fig3a_table(q_grid=None, d_omega_grid=None, t_tilde: float = 0.25,
                u_c: float = 1e3, rel_tol: float = 1e-9):
    """Net energy deviation Delta = W (1 - F) over the (D Omega, Q) plane."""
    if q_grid is None:
        q_grid = np.linspace(1.0, 10.0, 50)
    if d_omega_grid is None:
        d_omega_grid = np.linspace(1e-3, 0.12, 50)
    q_grid = np.asarray(q_grid, dtype=float)
    d_omega_grid = np.asarray(d_omega_grid, dtype=float)

    factor_f = np.empty_like(q_grid)
    for i, q in enumerate(q_grid):
        k, v = _kv(q, u_c, t_tilde, _Q, rel_tol)
        factor_f[i] = virial_factor(k / v)

    qq, dd = np.meshgrid(q_grid, d_omega_grid, indexing="ij")
    qdw = qq * dd
    stable = qdw < 1.0
    delta = np.full(qdw.shape, np.nan)
    mag = np.where(stable, qdw / np.where(stable, 1.0 - qdw, 1.0), np.nan)
    delta[stable] = (mag * (1.0 - factor_f[:, None]))[stable]

    header = ["q", "d_omega", "sqrt_2d_omega", "qdw", "stable", "delta"]
    cols = {
        "q": qq.ravel(),
        "d_omega": dd.ravel(),
        "sqrt_2d_omega": np.sqrt(2.0 * dd).ravel(),
        "qdw": qdw.ravel(),
        "stable": stable.astype(int).ravel(),
        "delta": delta.ravel(),
    }
    return header, cols


def fig3b_table(t_grid=None, q: float = 10.0, u_c: float = 1e3,
                rel_tol: float = 1e-9):
    """Virial-factor difference |F_quantum - F_classical| vs temperature."""
    if t_grid is None:
        t_grid = temperature_grid(0.02, 100.0, 60)
    t_grid = np.asarray(t_grid, dtype=float)
    fq = np.empty_like(t_grid)
    fcl = np.empty_like(t_grid)
    for i, tt in enumerate(t_grid):
        k, v = _kv(q, u_c, tt, _Q, rel_tol)
        fq[i] = virial_factor(k / v)
        kc, vc = _kv(q, u_c, tt, _CL, rel_tol)
        fcl[i] = virial_factor(kc / vc)
    header = ["t_tilde", "f_quantum", "f_classical", "delta_f1"]
    cols = {"t_tilde": t_grid, "f_quantum": fq, "f_classical": fcl,
            "delta_f1": np.abs(fq - fcl)}
    return header, cols


def fig3c_table(gamma_grid=None, ratio_grid=None, t_tilde_1: float = 0.25,
                q: float = 10.0, u_c: float = 1e3, rel_tol: float = 1e-9):
    """Two-bath virial-factor variation with a quantum ancilla.

    Delta F2 = |F(target quantum) - F(target classical)| on the
    (gamma, T2/T1) plane; gamma is the ancilla damping fraction.  The
    T2 = T1 column is flagged as the thermal-equilibrium line.
    """
    if gamma_grid is None:
        gamma_grid = np.linspace(0.01, 0.99, 50)
    if ratio_grid is None:
        ratio_grid = np.geomspace(0.1, 10.0, 49)
        ratio_grid[np.argmin(np.abs(ratio_grid - 1.0))] = 1.0
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    ratio_grid = np.asarray(ratio_grid, dtype=float)

    anc = bath_integrals(q, u_c, t_tilde_1, _Q, rel_tol)
    tgt_q = [bath_integrals(q, u_c, r * t_tilde_1, _Q, rel_tol) for r in ratio_grid]
    tgt_c = [bath_integrals(q, u_c, r * t_tilde_1, _CL, rel_tol) for r in ratio_grid]

    gg, rr = np.meshgrid(gamma_grid, ratio_grid, indexing="ij")
    dfq = np.empty_like(gg)
    for j, (bq, bc) in enumerate(zip(tgt_q, tgt_c)):
        # K, V are gamma-linear mixtures of per-bath integrals
        kq = gamma_grid * anc.i_k + (1.0 - gamma_grid) * bq.i_k
        vq = gamma_grid * anc.i_v + (1.0 - gamma_grid) * bq.i_v
        kc = gamma_grid * anc.i_k + (1.0 - gamma_grid) * bc.i_k
        vc = gamma_grid * anc.i_v + (1.0 - gamma_grid) * bc.i_v
        dfq[:, j] = np.abs(virial_factor(kq / vq) - virial_factor(kc / vc))

    header = ["gamma", "t2_over_t1", "is_equilibrium", "delta_f2"]
    cols = {
        "gamma": gg.ravel(),
        "t2_over_t1": rr.ravel(),
        "is_equilibrium": (rr == 1.0).astype(int).ravel(),
        "delta_f2": dfq.ravel(),
    }
    return header, cols


def figure_table(name: str, **kwargs):
    """Dispatch by figure name: fig2 | fig3a | fig3b | fig3c."""
    dispatch = {"fig2": fig2_table, "fig3a": fig3a_table,
                "fig3b": fig3b_table, "fig3c": fig3c_table}
    if name not in dispatch:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(dispatch)}")
    return dispatch[name](**kwargs)


def reduced_params_for(q: float, u_c: float, t_tilde: float,
                       stat: BathStatistics = _Q, qdw: float = 0.0) -> ReducedParams:
    """Single-bath ReducedParams shortcut used by grids and tests."""
    return ReducedParams(q=q, u_c=u_c, t_tilde=(t_tilde,), gamma=(1.0,),
                         statistics=(stat,), qdw=qdw)
