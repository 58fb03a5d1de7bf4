"""Command-line front end.

Subcommands: analytic, simulate, figure, protocol, thermometry, device,
noise-dump.  Machine-readable output (CSV/JSON) goes to --out or stdout;
progress goes to stderr.  Exit codes: 0 ok, 2 invalid configuration,
3 unstable configuration, 4 numerical failure.

Configuration files use flat key = value lines with [sections] (configparser
syntax); every CLI flag overrides its config key.  Emitted CSV carries
'#'-prefixed metadata lines (tool version, canonical argument record, config
hash, seed) from which :func:`rerun_from_csv` reproduces the run bit for bit.
The environment variable BROSC_THREADS caps the worker thread count.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import sys

from . import __version__
from .config import BathStatistics, ConfigError, ReducedParams
from .devices import cavity_wall_bound, paul_trap_d, tweezers_d
from .figures import figure_table
from .noise import (BathNoiseSpec, SampledProcess, synthesize_bath_noise,
                    write_process)
from .protocols import (AnalyticMeasurements, FitError, SimulatedMeasurements,
                        calibrate_single_bath, thermometry, two_bath_protocol)
from .quadrature import QuadratureError
from .simulate import (IntegratorConfig, estimate_heat_currents, run_ensemble,
                       simulate_trajectory)
from .steady import UnstableError, driven_moments, heat_currents, mean_kinetic_potential

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_NUMERICAL = 4

_STATS = {"quantum": BathStatistics.QUANTUM, "classical": BathStatistics.CLASSICAL_HIGH_T}


# ---------------------------------------------------------------------------
# CSV emission and re-ingestion

def format_float(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(header, cols, args_record: dict, seed: int | None = None) -> str:
    """CSV with metadata comments, header row, and 17-significant-digit floats."""
    record = json.dumps(args_record, sort_keys=True)
    cfg_hash = hashlib.sha256(record.encode()).hexdigest()
    buf = io.StringIO()
    buf.write(f"# brosc {__version__}\n")
    buf.write(f"# config-hash: {cfg_hash}\n")
    if seed is not None:
        buf.write(f"# seed: {seed}\n")
    buf.write(f"# args: {record}\n")
    buf.write(",".join(header) + "\n")
    n = len(cols[header[0]])
    for i in range(n):
        buf.write(",".join(format_float(float(cols[name][i])) for name in header) + "\n")
    return buf.getvalue()


def rerun_from_csv(path) -> str:
    """Re-execute the run recorded in a CSV's metadata; returns the new text.

    The output is bit-identical to the original file for deterministic runs.
    """
    record = None
    seed = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("# args: "):
                record = json.loads(line[len("# args: "):])
            elif line.startswith("# seed: "):
                seed = int(line[len("# seed: "):])
            elif not line.startswith("#"):
                break
    if record is None:
        raise ValueError("CSV carries no '# args:' metadata record")
    name = record.pop("figure")
    header, cols = figure_table(name, **record)
    out_record = dict(record)
    out_record["figure"] = name
    return emit_csv(header, cols, out_record, seed=seed)


# ---------------------------------------------------------------------------
# argument plumbing

def _add_system_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI-style config file; flags override keys")
    p.add_argument("--q", type=float, help="quality factor Omega/(4 Gamma)")
    p.add_argument("--u-c", type=float, dest="u_c", help="cutoff ratio Omega_C/Omega")
    p.add_argument("--t1", type=float, help="reduced temperature 2kT1/Omega of bath 1")
    p.add_argument("--t2", type=float, help="reduced temperature of bath 2 (enables two baths)")
    p.add_argument("--stat1", choices=sorted(_STATS), help="bath-1 statistics")
    p.add_argument("--stat2", choices=sorted(_STATS), help="bath-2 statistics")
    p.add_argument("--gamma", type=float, help="ancilla damping fraction Gamma1/Gamma")
    p.add_argument("--qdo", type=float, help="stability parameter Q*D*Omega")


_SYSTEM_DEFAULTS = {"q": 10.0, "u_c": 1e3, "t1": 0.25, "t2": None,
                    "stat1": "quantum", "stat2": "quantum", "gamma": 0.5, "qdo": 0.0}


def _load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values: dict = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            values[key.replace("-", "_")] = raw
    return values


def reduced_params_from_args(args) -> ReducedParams:
    values = dict(_SYSTEM_DEFAULTS)
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config)
        for key, raw in file_values.items():
            if key not in values:
                raise ConfigError(f"unknown config key {key!r}")
            if key in ("stat1", "stat2"):
                values[key] = raw
            else:
                values[key] = float(raw)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key in ("stat1", "stat2"):
        if values[key] not in _STATS:
            raise ConfigError(f"{key} must be one of {sorted(_STATS)}")
    if values["t2"] is None:
        t_tilde = (values["t1"],)
        gam = (1.0,)
        stats = (_STATS[values["stat1"]],)
    else:
        g = values["gamma"]
        if not 0.0 < g < 1.0:
            raise ConfigError("gamma must lie in (0, 1) for two baths")
        t_tilde = (values["t1"], values["t2"])
        gam = (g, 1.0 - g)
        stats = (_STATS[values["stat1"]], _STATS[values["stat2"]])
    if values["q"] <= 0.0:
        raise ConfigError("q must be positive")
    if values["u_c"] <= 10.0:
        raise ConfigError("u_c must exceed 10 (large-cutoff regime)")
    if values["qdo"] < 0.0:
        raise ConfigError("qdo must be >= 0")
    return ReducedParams(q=values["q"], u_c=values["u_c"], t_tilde=t_tilde,
                         gamma=gam, statistics=stats, qdw=values["qdo"])


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_analytic(args) -> int:
    rp = reduced_params_from_args(args)
    eb = mean_kinetic_potential(rp)
    report = {
        "mean_k": eb.mean_k, "mean_v": eb.mean_v, "e0": eb.e0,
        "ratio_r": eb.ratio_r, "factor_f": eb.factor_f,
        "heisenberg_rh": eb.heisenberg_rh, "qdw": rp.qdw,
    }
    dss = driven_moments(rp)       # raises UnstableError for qdw >= 1
    report.update({"magnification": dss.magnification, "energy": dss.energy,
                   "x2": dss.x2, "p2": dss.p2})
    hc = heat_currents(rp)
    report.update({f"j{k + 1}": hc.j[k] for k in range(rp.n_baths)})
    report.update({f"j{k + 1}_0": hc.j0[k] for k in range(rp.n_baths)})
    report["work_power"] = hc.work_power
    _write_output(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    rp = reduced_params_from_args(args)
    cfg = IntegratorConfig(dt=args.dt, ensemble_size=args.ensemble,
                           base_seed=args.seed, scheme=args.scheme)
    if rp.qdw >= 1.0:
        sys.stderr.write(f"Q D Omega = {rp.qdw} >= 1: unstable configuration\n")
        return EXIT_UNSTABLE
    if args.dump_trajectory:
        gamma_total = 1.0 / (4.0 * rp.q)
        n = int(round(50.0 / gamma_total / cfg.dt))
        t, xs, _ = simulate_trajectory(rp, cfg.dt, n, seed=cfg.base_seed)
        proc = SampledProcess(dt=cfg.dt, samples=xs, generator_id="trajectory",
                              seed=cfg.base_seed)
        write_process(args.dump_trajectory, proc)
        sys.stderr.write(f"trajectory written to {args.dump_trajectory}\n")
    sys.stderr.write(f"integrating {cfg.ensemble_size} trajectories...\n")
    moments = run_ensemble(rp, cfg)
    hc = estimate_heat_currents(rp, cfg, moments)
    report = {
        "x2": {"value": moments.x2.value, "stderr": moments.x2.stderr},
        "p2": {"value": moments.p2.value, "stderr": moments.p2.stderr},
        "xp": {"value": moments.xp.value, "stderr": moments.xp.stderr},
        "phi_xp": {"value": moments.phi_xp.value, "stderr": moments.phi_xp.stderr},
        "j": [{"value": e.value, "stderr": e.stderr} for e in hc.j],
        "balance_residual": {"value": hc.balance_residual.value,
                             "stderr": hc.balance_residual.stderr},
        "balance_residual_alt": {"value": hc.balance_residual_alt.value,
                                 "stderr": hc.balance_residual_alt.stderr},
        "n_tripped": moments.n_tripped,
        "seed": cfg.base_seed,
    }
    status = EXIT_OK
    if args.check_analytic:
        pred = driven_moments(rp)
        z_x2 = abs(moments.x2.z(pred.x2))
        z_p2 = abs(moments.p2.z(pred.p2))
        report["check_analytic"] = {"x2_pred": pred.x2, "p2_pred": pred.p2,
                                    "z_x2": z_x2, "z_p2": z_p2}
        if max(z_x2, z_p2) > 3.0:
            sys.stderr.write(f"analytic check failed: z_x2={z_x2:.2f} z_p2={z_p2:.2f}\n")
            status = EXIT_NUMERICAL
    _write_output(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return status


def cmd_figure(args) -> int:
    kwargs = {}
    if args.u_c is not None:
        kwargs["u_c"] = args.u_c
    header, cols = figure_table(args.name, **kwargs)
    record = dict(kwargs)
    record["figure"] = args.name
    _write_output(emit_csv(header, cols, record), args.out)
    return EXIT_OK


def cmd_protocol(args) -> int:
    rp = reduced_params_from_args(args)
    if rp.n_baths != 2:
        raise ConfigError("protocol requires two baths (--t2)")
    if args.provider == "analytic":
        provider = AnalyticMeasurements(rp, noise_rel=args.noise_rel, seed=args.seed)
    else:
        provider = SimulatedMeasurements(
            rp, IntegratorConfig(dt=args.dt, ensemble_size=args.ensemble,
                                 base_seed=args.seed))
    report = two_bath_protocol(rp, provider)
    sys.stderr.write(report.summary() + "\n")
    payload = {
        "omega": report.omega_hat, "gamma1": report.gamma1_hat,
        "gamma2": report.gamma2_hat, "e0": report.e0_hat,
        "factor_f": report.slope.factor_f, "factor_f_err": report.slope.stderr,
        "f_quantum": report.f_quantum, "f_classical": report.f_classical,
        "z_quantum": report.z_quantum, "z_classical": report.z_classical,
        "classification": report.classification, "margin": report.margin,
    }
    _write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_thermometry(args) -> int:
    rp = reduced_params_from_args(args)
    if rp.n_baths != 2:
        raise ConfigError("thermometry requires two baths (--t2)")
    if rp.qdw <= 0.0:
        raise ConfigError("thermometry requires an applied frequency noise (--qdo > 0)")
    calib = calibrate_single_bath(rp.q, rp.u_c, rp.t_tilde[0])
    dss = driven_moments(rp)
    hc = heat_currents(rp)
    e0_meas = driven_moments(rp.with_qdw(0.0)).energy
    j0_meas = heat_currents(rp.with_qdw(0.0)).j[0]
    result = thermometry(calib, gamma=rp.gamma[0], magnification_w=dss.magnification,
                         e0_measured=e0_meas, energy=(dss.energy, 0.0),
                         current=(hc.j[0], 0.0), j0_measured=j0_meas)
    payload = {
        "delta_t_true": rp.t_tilde[1] - rp.t_tilde[0],
        "delta_t_energy": result.delta_t_energy,
        "delta_t_current": result.delta_t_current,
        "valid": result.valid,
        "calibration": {"e0_1": calib.e0, "factor_f_1": calib.factor_f,
                        "dr_dt": calib.dr_dt},
    }
    _write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_device(args) -> int:
    if args.platform == "tweezers":
        budget = tweezers_d(args.power, args.wavelength, args.level)
        rows = [("S_min [s]", budget.s_min), ("L [dB]", budget.level_db),
                ("Phi [dB]", budget.enhancement_db),
                ("D_min [s]", budget.d_min), ("D [s]", budget.d)]
    elif args.platform == "paultrap":
        budget = paul_trap_d(args.capacitance, args.v_dc, args.a, args.mathieu_q,
                             component=args.component, level_db=args.level)
        rows = [("S_min [s]", budget.s_min), ("L [dB]", budget.level_db),
                ("Phi [dB]", budget.enhancement_db),
                ("D_min [s]", budget.d_min), ("D [s]", budget.d)]
    else:
        bound = cavity_wall_bound(args.damping, args.omega0, args.omega,
                                  args.temperature, args.mass)
        rows = [("D*Omega bound", bound.d_omega_bound),
                ("suitable", float(bound.suitable))]
        sys.stderr.write(bound.note + "\n")
    lines = [f"{label:>14s}  {format_float(value)}" for label, value in rows]
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_noise_dump(args) -> int:
    rp = reduced_params_from_args(args)
    gamma_total = 1.0 / (4.0 * rp.q)
    spec = BathNoiseSpec(damping=rp.gamma[0] * gamma_total, t_tilde=rp.t_tilde[0],
                         u_c=rp.u_c, statistics=rp.statistics[0],
                         dt=args.dt, n_samples=args.n, seed=args.seed)
    proc = synthesize_bath_noise(spec)
    write_process(args.out_file, proc, spec.content_hash())
    sys.stderr.write(f"wrote {args.n} samples to {args.out_file}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="brosc",
                                 description="frequency-noise-driven Brownian "
                                             "oscillator toolkit")
    ap.add_argument("--version", action="version", version=f"brosc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form steady-state report")
    _add_system_args(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_analytic)

    p = sub.add_parser("simulate", help="Langevin ensemble run")
    _add_system_args(p)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--ensemble", type=int, default=400)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--scheme", choices=["heun", "euler"], default="heun")
    p.add_argument("--check-analytic", action="store_true")
    p.add_argument("--dump-trajectory", metavar="PATH",
                   help="write one trajectory's x(t) in the binary dump format")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("figure", help="emit figure data as CSV")
    p.add_argument("name", choices=["fig2", "fig3a", "fig3b", "fig3c"])
    p.add_argument("--u-c", type=float, dest="u_c")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("protocol", help="two-bath classification protocol")
    _add_system_args(p)
    p.add_argument("--provider", choices=["analytic", "simulated"], default="analytic")
    p.add_argument("--noise-rel", type=float, default=1e-3)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--ensemble", type=int, default=400)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_protocol)

    p = sub.add_parser("thermometry", help="target-bath temperature inversion")
    _add_system_args(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_thermometry)

    p = sub.add_parser("device", help="platform noise budgets")
    dsub = p.add_subparsers(dest="platform", required=True)
    pt = dsub.add_parser("tweezers")
    pt.add_argument("-P", "--power", type=float, required=True)
    pt.add_argument("-l", "--wavelength", type=float, required=True)
    pt.add_argument("--level", type=float, default=0.0)
    pt.add_argument("--out")
    pt.set_defaults(fn=cmd_device)
    pp = dsub.add_parser("paultrap")
    pp.add_argument("-C", "--capacitance", type=float, required=True)
    pp.add_argument("-V", "--v-dc", type=float, dest="v_dc", required=True)
    pp.add_argument("-a", type=float, required=True)
    pp.add_argument("-q", "--mathieu-q", type=float, dest="mathieu_q", required=True)
    pp.add_argument("--component", choices=["dc", "ac"], default="dc")
    pp.add_argument("--level", type=float, default=0.0)
    pp.add_argument("--out")
    pp.set_defaults(fn=cmd_device)
    pc = dsub.add_parser("cavity")
    pc.add_argument("--damping", type=float, required=True)
    pc.add_argument("--omega0", type=float, required=True)
    pc.add_argument("--omega", type=float, required=True)
    pc.add_argument("--temperature", type=float, required=True)
    pc.add_argument("--mass", type=float, required=True)
    pc.add_argument("--out")
    pc.set_defaults(fn=cmd_device)

    p = sub.add_parser("noise-dump", help="synthesize a bath force and dump it")
    _add_system_args(p)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--n", type=int, default=1 << 19)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("out_file")
    p.set_defaults(fn=cmd_noise_dump)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        sys.stderr.write(f"invalid configuration: {exc}\n")
        return EXIT_CONFIG
    except UnstableError as exc:
        sys.stderr.write(f"unstable: {exc}\n")
        return EXIT_UNSTABLE
    except (QuadratureError, FitError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
