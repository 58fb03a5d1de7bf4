"""Mint high-precision reference values for the test suite.

Uses mpmath (30 digits) with an integration scheme independent of the
package's quadrature engine: explicit segment lists around the resonance and
cutoff, Gauss-Legendre at mpmath's adaptive depth.  Run manually; the printed
values are frozen into tests/ as literals.
"""

import mpmath as mp

mp.mp.dps = 30


def segments(uc):
    return [0, mp.mpf("0.5"), mp.mpf("0.9"), 1, mp.mpf("1.1"), 2, 10, 100,
            uc, 10 * uc, 100 * uc, mp.inf]


def iv_ik(q, tt, uc, quantum=True):
    L = lambda u: (1 - u * u) ** 2 + (u / q) ** 2
    f = lambda u: 1 / (1 + (u / uc) ** 2)
    if quantum:
        th = lambda u: mp.coth(u / tt) if tt > 0 else mp.mpf(1)
    else:
        th = lambda u: tt / u
    iv = mp.quad(lambda u: u * th(u) / L(u), segments(uc)) / mp.pi
    ik = mp.quad(lambda u: u ** 3 * f(u) * th(u) / L(u), segments(uc)) / mp.pi
    return iv, ik


def report(label, q, tt, uc, quantum=True):
    iv, ik = iv_ik(mp.mpf(q), mp.mpf(tt), mp.mpf(uc), quantum)
    v = iv / (2 * mp.mpf(q))
    k = ik / (2 * mp.mpf(q))
    print(f"# {label}: q={q} tt={tt} uc={uc} quantum={quantum}")
    print(f"MEAN_V = {mp.nstr(v, 17)}")
    print(f"MEAN_K = {mp.nstr(k, 17)}")
    print(f"RATIO_R = {mp.nstr(k / v, 17)}")
    print()
    return v, k


if __name__ == "__main__":
    report("criterion-1 anchor", 10, "0.1", 1000)
    report("driven-moment anchor", 10, "0.25", 1000)
    report("two-method anchor", 10, "0.25", 50)
    report("classical check", 10, "2", 1000, quantum=False)
    v, k = report("mc config A", 0.8, "0.6", 50)
    v, k = report("mc config F bath1", 0.6, "0.5", 50)
