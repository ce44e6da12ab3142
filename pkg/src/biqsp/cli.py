"""Command-line entry point.

Five subcommands wire configuration files (flat JSON maps, overridable by
flags) to the library modules and write report artifacts:

    target-build   regularized product target + exact grid + deficit report
    angles         complement -> peel -> optional multistart refinement
    simulate       dense-matrix method runs with measured-vs-bound reports
    estimate       query/degree/postselection benchmark table
    verify         full acceptance suite with per-criterion JSON report

Exit codes: 0 ok, 1 acceptance failure, 2 configuration error,
3 consistency-ratio violation during peeling, 4 numerical instability.
Outputs are deterministic for a fixed config + seed; CSV floats are
written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from biqsp import bilaurent as bl
from biqsp import matops
from biqsp.errors import (CRCViolationError, NumericalInstabilityError,
                          ValidationError)

EXIT_OK = 0
EXIT_ACCEPTANCE = 1
EXIT_CONFIG = 2
EXIT_CRC = 3
EXIT_INSTABILITY = 4


@dataclass
class RunConfig:
    command: str
    outdir: Path
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def get(self, key, default=None):
        return self.params.get(key, default)

    def require(self, key):
        if key not in self.params:
            raise ValidationError(f"missing required parameter '{key}'")
        return self.params[key]


def _fmt(x) -> str:
    """17-significant-digit float formatting for CSV cells."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(args) -> RunConfig:
    params = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValidationError("config must be a JSON object")
        params.update(loaded)
    for key, value in vars(args).items():
        if key in ("config", "outdir", "seed", "func", "command"):
            continue
        if value is not None:
            params[key] = value
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output directory not writable: {exc}")
    return RunConfig(command=args.command, outdir=outdir, params=params,
                     seed=args.seed)


# -- target-build -----------------------------------------------------

def cmd_target_build(cfg: RunConfig) -> int:
    from biqsp import dyson_target
    delta = float(cfg.get("delta", 1e-3))
    if delta <= 0.0:
        print("warning: delta <= 0 risks violating the strict sub-unitarity "
              "margin; clamping to 1e-12", file=sys.stderr)
        delta = 1e-12
    params = dyson_target.DysonParams(
        alphaRT=float(cfg.require("alphaRT")),
        betaIT=float(cfg.require("betaIT")),
        r=int(cfg.get("r", 2)),
        M=int(cfg.get("M", 2)),
        dR_seg=int(cfg.get("dR_seg", 2)),
        delta=delta,
        N1=int(cfg.get("N1", 64)),
        N2=int(cfg.get("N2", 64)))
    target = dyson_target.build_dyson_target(params)
    bl.save_json(target.P_delta, cfg.outdir / "target.json")
    grid = dyson_target.target_grid_exact(params.alphaRT, params.betaIT,
                                          params.N1, params.N2)
    rows = [(i, j, grid.values[i, j].real, grid.values[i, j].imag)
            for i in range(params.N1) for j in range(params.N2)]
    _write_csv(cfg.outdir / "target_grid.csv",
               ["i", "j", "re", "im"], rows)
    _write_json(cfg.outdir / "target_report.json", {
        "schedule": target.schedule.as_string(),
        "lcu_normalization": target.lam,
        "zero_locus_deficit": target.zero_locus_deficit,
        "bidegree": list(target.bidegree),
        "stated_budget": list(target.stated_budget),
        "budget_mismatch": target.budget_mismatch,
    })
    print(f"target written to {cfg.outdir} (bidegree {target.bidegree}, "
          f"deficit {target.zero_locus_deficit:.3e})")
    return EXIT_OK


# -- angles -----------------------------------------------------------

def cmd_angles(cfg: RunConfig) -> int:
    from biqsp import anglefind, qsp_optimize, sos_factor
    from biqsp.mqsp_circuit import Schedule, save_spec
    target_path = cfg.require("target")
    P = bl.load_json(target_path)
    # symmetric Laurent targets are monomial-shifted into the analytic
    # window the circuit can reach
    shift1, shift2 = -min(P.window1[0], 0), -min(P.window2[0], 0)
    if shift1 or shift2:
        P = bl.monomial_shift(P, shift1, shift2)
    if "schedule" in cfg.params:
        schedule = Schedule.from_string(cfg.params["schedule"])
    else:
        schedule = Schedule(("R",) * P.window1[1] + ("I",) * P.window2[1])
    method = cfg.get("complement", "separable")
    if method == "separable":
        complements = anglefind.separable_complement(P)
    elif method == "gram":
        one_minus = bl.BiLaurent.constant(1.0) - bl.abs_squared(P)
        complements = sos_factor.sos_from_moment(one_minus).terms
    elif method == "circuit":
        Q = bl.load_json(cfg.require("q_file"))
        complements = sos_factor.rank2_complement(
            P, Q, float(cfg.get("delta", 0.0))).terms
    else:
        raise ValidationError(
            f"unknown complement method '{method}' "
            f"(expected 'separable', 'gram' or 'circuit')")
    peel = anglefind.block_peel if cfg.get("peel", "block") == "block" \
        else anglefind.recursive_angle_find
    spec, info = peel(P, complements, schedule,
                      strict=bool(cfg.get("strict", True)))
    roundtrip = anglefind.roundtrip_verify(P, spec)
    save_spec(spec, cfg.outdir / "circuit.json")
    _write_csv(cfg.outdir / "peel_trace.csv",
               ["step", "var", "theta", "phi", "rho_dev", "kappa"],
               [(t["step"], t["var"], t["theta"], t["phi"],
                 t["rho_dev"], t["kappa"]) for t in info["trace"]])
    report = {
        "roundtrip_error": roundtrip,
        "kappa_total": info["kappa_total"],
        "coefficient_drift": info["drift"],
        "ratio_ops": info["ratio_ops"],
        "block_mode": info["block_mode"],
        "fallback": info["fallback"],
    }
    k = int(cfg.get("multistart", 0))
    if k > 0:
        if cfg.seed is None:
            raise ValidationError("--seed is required with --multistart")
        N1, N2 = max(4 * (schedule.dR + 1), 24), \
            max(4 * (schedule.dI + 1), 24)
        target_grid = qsp_optimize.prepare_target_grid(P, N1, N2)
        ms = qsp_optimize.multistart(
            schedule, target_grid, spec.angles, k,
            np.random.default_rng(cfg.seed),
            sigma=float(cfg.get("sigma", np.pi / 4)))
        save_spec(ms.best.spec, cfg.outdir / "circuit_refined.json")
        # c_inf: worst-case pointwise deviation of the refined P block
        from biqsp.mqsp_circuit import evaluate_circuit_grid
        Pg, _ = evaluate_circuit_grid(ms.best.spec, N1, N2)
        c_inf = float(np.max(np.abs(Pg.values - target_grid)))
        report["multistart"] = {
            "restarts": [{"cost": r.cost, "residual": r.residual,
                          "iterations": r.iterations,
                          "converged": r.converged}
                         for r in ms.results],
            "basins": [{"cost": c, "count": n} for c, n in ms.basins],
            "best_residual": ms.best.residual,
            "c_inf": c_inf,
        }
    _write_json(cfg.outdir / "angles_report.json", report)
    print(f"roundtrip error {roundtrip:.3e}; artifacts in {cfg.outdir}")
    return EXIT_OK


# -- simulate ---------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> int:
    from biqsp import method_sim
    source = cfg.get("pair", "lindblad")
    if source == "lindblad":
        pair = matops.lindblad_benchmark_pair()
    else:
        pair = matops.load_pair(source)
    if pair.dim > 64:
        raise ValidationError(
            f"dimension {pair.dim} > 64: dense simulation refused "
            f"(this tool is for small validation instances)")
    T = float(cfg.get("T", 1.0))
    method = cfg.get("method", "dyson-lcu")
    r = int(cfg.get("r", 8))
    report: dict = {"method": method, "T": T,
                    "alpha_R": pair.alpha_R, "beta_I": pair.beta_I}
    if method == "exact":
        U = matops.exact_propagator(pair, T)
        report["propagator_norm"] = float(np.linalg.norm(U, 2))
    elif method == "midpoint":
        V = method_sim.midpoint_propagator(pair, T, r)
        exact = matops.interaction_propagator(pair, T)
        report["r"] = r
        report["error_norm"] = float(np.linalg.norm(V - exact, 2))
    elif method == "dyson-lcu":
        res = method_sim.dyson_lcu_propagator(pair, T, r,
                                              int(cfg.get("M", 6)))
        report.update(error_norm=res.error_norm,
                      bound_predicted=res.bound_predicted,
                      params=res.params_used,
                      within_budget=res.error_norm <= res.bound_predicted)
    elif method == "lorentzian":
        disc = (float(cfg.get("s_max", 200.0)),
                int(cfg.get("Mpts", 20000)))
        res = method_sim.lorentzian_method(pair, T, r, disc)
        report.update(error_norm=res.error_norm,
                      bound_predicted=res.bound_predicted,
                      params=res.params_used,
                      within_budget=res.error_norm <= res.bound_predicted)
    else:
        raise ValidationError(
            f"unknown method '{method}' (expected exact, midpoint, "
            f"dyson-lcu or lorentzian)")
    r_sweep = cfg.get("r_sweep")
    if r_sweep:
        rs = [int(v) for v in r_sweep]
        errs = []
        exact = matops.interaction_propagator(pair, T)
        for rv in rs:
            V = method_sim.midpoint_propagator(pair, T, rv)
            errs.append(float(np.linalg.norm(V - exact, 2)))
        _write_csv(cfg.outdir / "convergence.csv", ["r", "error"],
                   list(zip(rs, errs)))
        slope = float(np.polyfit(np.log(rs), np.log(errs), 1)[0])
        report["r_sweep_slope"] = slope
    _write_json(cfg.outdir / "simulate_report.json", report)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    return EXIT_OK


# -- estimate ---------------------------------------------------------

_PRESETS = {
    "weak": (338.0, 15.6, 1e-3),
    "strong": (338.0, 338.0, 1e-3),
}


def cmd_estimate(cfg: RunConfig) -> int:
    from biqsp import resource_estimator
    preset = cfg.get("preset")
    if preset is not None:
        if preset not in _PRESETS:
            raise ValidationError(
                f"unknown preset '{preset}' (expected one of "
                f"{sorted(_PRESETS)})")
        alphaT, betaT, eps = _PRESETS[preset]
    else:
        alphaT = float(cfg.require("alphaT"))
        betaT = float(cfg.require("betaT"))
        eps = float(cfg.require("eps"))
    rows = resource_estimator.benchmark_table(
        alphaT, betaT, eps, float(cfg.get("survival_sq", 1.0)))
    header = ["method", "dR", "dI", "Q_total", "reference_dR",
              "reference_dI", "reference_Q", "lower_bound",
              "postselection_P", "log10_repetitions"]
    _write_csv(cfg.outdir / "benchmark.csv", header,
               [[row[h] for h in header] for row in rows])
    for row in rows:
        print(f"{row['method']:>12}: Q_total={row['Q_total']} "
              f"(reference {row['reference_Q'] or '-'}), "
              f"lower bound {row['lower_bound']:.1f}")
    return EXIT_OK


# -- verify -----------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    from biqsp import acceptance
    subset = cfg.get("subset")
    results = acceptance.run_all(subset=subset)
    for res in results:
        status = "PASS" if res["passed"] else "FAIL"
        print(f"criterion {res['id']:2d} [{status}] {res['name']}")
    _write_json(cfg.outdir / "verify_report.json", {
        "results": results,
        "subset": subset,
        "all_passed": all(r["passed"] for r in results),
    })
    failing = [r["id"] for r in results if not r["passed"]]
    if failing:
        print(f"failing criteria: {failing}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


# -- parser -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="biqsp", description="bivariate-QSP simulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file (flat map)")
        sp.add_argument("--outdir", default=".", help="output directory")
        sp.add_argument("--seed", type=int,
                        help="RNG seed (required for stochastic commands)")

    sp = sub.add_parser("target-build",
                        help="build the regularized product target")
    common(sp)
    sp.add_argument("--alphaRT", type=float)
    sp.add_argument("--betaIT", type=float)
    sp.add_argument("--r", type=int)
    sp.add_argument("--M", type=int)
    sp.add_argument("--dR-seg", dest="dR_seg", type=int)
    sp.add_argument("--delta", type=float)
    sp.set_defaults(func=cmd_target_build)

    sp = sub.add_parser("angles",
                        help="complement + peel + optional refinement")
    common(sp)
    sp.add_argument("--target", help="target BiLaurent JSON file")
    sp.add_argument("--schedule", help="schedule string, e.g. RIRI")
    sp.add_argument("--complement",
                    choices=["separable", "gram", "circuit"])
    sp.add_argument("--q-file", dest="q_file",
                    help="circuit Q-polynomial JSON (complement=circuit)")
    sp.add_argument("--delta", type=float,
                    help="regularization used to build the target")
    sp.add_argument("--peel", choices=["block", "recursive"])
    sp.add_argument("--multistart", type=int)
    sp.add_argument("--sigma", type=float)
    sp.set_defaults(func=cmd_angles)

    sp = sub.add_parser("simulate", help="dense-matrix method simulation")
    common(sp)
    sp.add_argument("--pair",
                    help="Hamiltonian pair JSON, or 'lindblad' preset")
    sp.add_argument("--method",
                    choices=["exact", "midpoint", "dyson-lcu",
                             "lorentzian"])
    sp.add_argument("--T", type=float)
    sp.add_argument("--r", type=int)
    sp.add_argument("--M", type=int)
    sp.add_argument("--r-sweep", dest="r_sweep", type=int, nargs="+")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="resource benchmark table")
    common(sp)
    sp.add_argument("--preset", choices=sorted(_PRESETS))
    sp.add_argument("--alphaT", type=float)
    sp.add_argument("--betaT", type=float)
    sp.add_argument("--eps", type=float)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    common(sp)
    sp.add_argument("--subset", help="only criteria tagged with this label")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(cfg)
    except CRCViolationError as exc:
        print(f"consistency-ratio violation: {exc}", file=sys.stderr)
        return EXIT_CRC
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
