"""Shared fixtures: Monte Carlo run cache and acceptance report collection."""

import time

import pytest

from brosc.config import BathStatistics, ReducedParams
from brosc.simulate import IntegratorConfig, run_ensemble


@pytest.fixture(scope="session")
def mc_cache():
    """Lazily computed, session-shared ensemble runs keyed by config name."""
    cache: dict = {}

    def get(name: str, rp: ReducedParams, cfg: IntegratorConfig):
        if name not in cache:
            t0 = time.perf_counter()
            moments = run_ensemble(rp, cfg)
            cache[name] = (moments, time.perf_counter() - t0)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def kernel_warmup():
    """Compile the numba kernels outside any timed acceptance section."""
    rp = ReducedParams(q=1.0, u_c=20.0, t_tilde=(1.0,), gamma=(1.0,),
                       statistics=(BathStatistics.QUANTUM,), qdw=0.1)
    run_ensemble(rp, IntegratorConfig(dt=5e-3, t_end=205.0, burn_in=41.0,
                                      ensemble_size=100, base_seed=1))
    from brosc.simulate import detect_instability
    detect_instability(rp, horizon=30.0, ensemble_size=128, dt=5e-3)
    return True


class AcceptanceReport:
    def __init__(self):
        self.lines = []

    def record(self, criterion: int, passed: bool, detail: str):
        line = f"ACCEPTANCE {criterion:2d}: {'PASS' if passed else 'FAIL'} - {detail}"
        self.lines.append(line)
        print("\n" + line)


@pytest.fixture(scope="session")
def acceptance(request):
    report = AcceptanceReport()
    yield report
    if report.lines:
        text = "\n".join(report.lines) + "\n"
        path = request.config.rootpath / "acceptance_report.txt"
        path.write_text(text)
        print("\n" + "=" * 72)
        print(text, end="")
        print("=" * 72)
