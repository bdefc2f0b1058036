"""Experiment orchestration: config ingestion, runs, ladders, verification.

Subcommands:
    conewave run --config cfg.toml [--out DIR]
    conewave ladder --config cfg.toml --levels 3 [--out DIR]
    conewave verify report.json
    conewave list-data-families

Exit codes: 0 all checks pass, 1 check failure, 2 config error, 3 runtime abort.

A run writes into its output directory:
    energy.csv   t, E, E_minus, E_plus, E_minus_inner_c
    mu.csv       t, P_origin, P_cylinder
    norms.csv    t, Lp1_norm, st_norm_increment
    ledgers.json / ledgers.csv   per-segment flux balances
    report.json  bound checks, decay fit, trends, drift
    manifest.json  config echo, config hash, tool version

Reruns with an identical config are bit-identical: reductions happen in fixed
order and floats are serialized with repr round-tripping.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__, analysis, diagnostics, flux
from .core import ConfigError, ProblemSpec, RegionSpec, cone_region, slab_region, validate_region
from .core import annulus_slab_region, cone_shell_region, truncated_cone_region
from .initial_data import DATA_FAMILIES, cutoff_data, make_data, weighted_energies
from .solver import SolverConfig, causal_grid, evolve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ABORT = 3


@dataclasses.dataclass
class RunConfig:
    """Validated run configuration (the in-memory form of the TOML file)."""

    problem: ProblemSpec
    data_family: str
    data_params: dict
    cutoff_radius: float
    backend: str
    n_r: int
    n_rho: int
    n_z: int
    margin: float
    solver: SolverConfig
    kappa: float
    inner_cone_c: float
    q_exponent: float
    morawetz_radii: list[float]
    regions: list[dict]
    toggles: dict
    out_dir: str
    seed: int
    raw: dict

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, default=str).encode()
        ).hexdigest()[:16]


def load_config(path: str | Path) -> RunConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    try:
        prob_sec = raw.get("problem", {})
        if float(prob_sec.get("p", 3.0)) < 0:
            raise ConfigError("focusing sign is not supported")
        problem = ProblemSpec(p=float(prob_sec.get("p", 3.0)))

        d = raw.get("data", {})
        family = d.get("family", "gaussian-monopole")
        if family not in DATA_FAMILIES:
            raise ConfigError(f"unknown data family {family!r}")
        data_params = {
            k: float(v) for k, v in d.items() if k in ("amplitude", "width", "offset")
        }
        cutoff_radius = float(d.get("cutoff_radius", 0.0))

        g = raw.get("grid", {})
        backend = g.get("backend", "radial1d")
        if backend not in ("radial1d", "axisym2d"):
            raise ConfigError(f"unknown backend {backend!r}")

        s = raw.get("solver", {})
        solver = SolverConfig(
            t_end=float(s.get("t_end", 10.0)),
            cfl=float(s.get("cfl", 0.5)),
            store_stride=int(s["store_stride"]) if "store_stride" in s else None,
            nonlinear=bool(s.get("nonlinear", True)),
            energy_stride=int(s.get("energy_stride", 1)),
            store_trace=bool(s.get("store_trace", True)),
        )

        diag = raw.get("diagnostics", {})
        kappa = float(diag.get("kappa", 0.75))
        if not (0.0 < kappa < 1.0):
            raise ConfigError("diagnostics.kappa must lie in (0, 1)")
        cfg = RunConfig(
            problem=problem,
            data_family=family,
            data_params=data_params,
            cutoff_radius=cutoff_radius,
            backend=backend,
            n_r=int(g.get("n_r", 4096)),
            n_rho=int(g.get("n_rho", 512)),
            n_z=int(g.get("n_z", 2 * int(g.get("n_rho", 512)))),
            margin=float(g.get("margin", 0.5)),
            solver=solver,
            kappa=kappa,
            inner_cone_c=float(diag.get("inner_cone_c", 0.5)),
            q_exponent=float(diag.get("q_exponent", 6.0)),
            morawetz_radii=[float(x) for x in diag.get("morawetz_radii", [0.5, 1.0, 2.0])],
            regions=list(diag.get("regions", [])),
            toggles={
                "ledgers": bool(diag.get("ledgers", True)),
                "mu": bool(diag.get("mu", True)),
                "bounds": bool(diag.get("bounds", True)),
                "norms": bool(diag.get("norms", True)),
                "decay": bool(diag.get("decay", True)),
            },
            out_dir=str(raw.get("output", {}).get("directory", "out")),
            seed=int(raw.get("output", {}).get("seed", 0)),
            raw=raw,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_region(spec: dict, t_end: float, horizon: float) -> RegionSpec:
    kind = spec.get("kind", "cone")
    if kind == "cone":
        return cone_region(float(spec.get("t0", 0.0)), float(spec.get("r0", 2.0)))
    if kind == "slab":
        return slab_region(
            float(spec.get("t1", 0.0)),
            float(spec.get("t2", t_end)),
            radius=float(spec.get("radius", horizon)),
        )
    if kind == "truncated_cone":
        return truncated_cone_region(float(spec["t1"]), float(spec["t2"]), float(spec["s"]))
    if kind == "cone_shell":
        return cone_shell_region(float(spec["t0"]), float(spec["r1"]), float(spec["r2"]))
    if kind == "rectangle":
        return annulus_slab_region(
            float(spec["t1"]), float(spec["t2"]), float(spec["r1"]), float(spec["r2"])
        )
    if kind == "polygon":
        return validate_region(RegionSpec([tuple(v) for v in spec["vertices"]]))
    raise ConfigError(f"unknown region kind {kind!r}")


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (int, float, np.floating)) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config: RunConfig, out_dir: str | Path | None = None) -> dict:
    """Execute a configured run; returns the report dict (also written to disk)."""
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    data = make_data(config.data_family, **config.data_params)
    if config.cutoff_radius > 0:
        data = cutoff_data(data, config.cutoff_radius)
    problem = config.problem
    grid = causal_grid(
        data,
        config.solver.t_end,
        config.backend,
        n_r=config.n_r,
        n_rho=config.n_rho,
        n_z=config.n_z,
        margin=config.margin,
    )
    logger.info("run: %s on %s, t_end=%g", data.name, grid.backend, config.solver.t_end)
    trace, drift = evolve(data, problem, config.solver, grid)
    t_end = trace.t_last
    horizon = (grid.r_max if config.backend == "radial1d" else min(grid.p_max, grid.z_max))
    safe_radius = horizon - 3.0 * grid.min_spacing

    checks: list[analysis.BoundCheck] = []
    report: dict = {
        "version": __version__,
        "config_hash": config.config_hash(),
        "backend": grid.backend,
        "p": problem.p,
        "kappa": config.kappa,
        "data": {"family": data.name, **config.data_params},
        "drift": {"max_rel_drift": drift.max_rel_drift, "dt": drift.dt,
                  "resolution": drift.resolution},
    }

    series = diagnostics.energy_series(trace)
    E0 = float(series.E[0])
    inner = analysis.inner_cone_energy(trace, config.inner_cone_c)
    inner_map = dict(zip(inner.times.tolist(), inner.e_minus_inner.tolist()))
    _write_csv(
        out / "energy.csv",
        ["t", "E", "E_minus", "E_plus", "E_minus_inner_c"],
        [
            (t, series.E[j], series.E_minus[j], series.E_plus[j], inner_map.get(float(t), 0.0))
            for j, t in enumerate(series.times.tolist())
        ],
    )
    report["inner_cone"] = inner.to_dict()
    report["energy"] = {"E0": E0, "E_minus_first": float(series.E_minus[0]),
                        "E_minus_last": float(series.E_minus[-1])}

    if config.toggles["mu"] and trace.n_frames > 2:
        est = flux.estimate_mu(trace, trace.t_first, t_end)
        _write_csv(
            out / "mu.csv",
            ["t", "P_origin", "P_cylinder"],
            zip(est.times.tolist(), est.P_origin.tolist(), est.P_cylinder.tolist()),
        )
        report["mu"] = {
            "discrepancy": est.discrepancy,
            "pi_mu_total": math.pi * float(est.P_origin[-1] - est.P_origin[0]),
            "radii": list(est.radii),
        }

    ledgers = []
    if config.toggles["ledgers"] and trace.n_frames > 2:
        region_specs = config.regions or [
            {"kind": "cone", "t0": 0.0, "r0": min(2.0, 0.9 * t_end)},
            {"kind": "slab", "t1": 0.25 * t_end, "t2": 0.75 * t_end, "radius": safe_radius},
        ]
        for spec in region_specs:
            region = build_region(spec, t_end, safe_radius)
            for which in ("inward", "outward"):
                led = flux.flux_balance(trace, region, which)
                ledgers.append(led)
                checks.append(
                    analysis.make_check(
                        f"ledger_residual_{region.region_id}_{which}",
                        abs(led.residual),
                        0.01 * E0,
                        "flux balance residual within 1% of the energy",
                        tol=0.0,
                    )
                )
        _write_json(out / "ledgers.json", {"ledgers": [l.to_dict() for l in ledgers]})
        _write_csv(
            out / "ledgers.csv",
            ["region_id", "segment_id", "type", "value", "mu_term", "morawetz_term", "residual"],
            [
                (
                    f"{row['region_id']}:{led.which}",
                    row["segment_id"],
                    row["type"],
                    row["value"],
                    row["mu_term"],
                    row["morawetz_term"],
                    row["residual"],
                )
                for led in ledgers
                for row in led.csv_rows()
            ],
        )

    if config.toggles["norms"] and trace.n_frames > 2:
        norms = analysis.scattering_norms(trace, config.q_exponent, kappa=config.kappa)
        _write_csv(
            out / "norms.csv",
            ["t", "Lp1_norm", "st_norm_increment"],
            zip(norms.times.tolist(), norms.lp1_series.tolist(), norms.st_increments().tolist()),
        )
        report["norms"] = {
            "q": config.q_exponent,
            "q_flagged": norms.q_flagged,
            "lq_lp1": norms.norm_lq_lp1((trace.t_first, t_end)),
            "st_norm": norms.st_norm((trace.t_first, t_end)),
        }

    if config.toggles["bounds"] and trace.n_frames > 2:
        for R in config.morawetz_radii:
            if grid.contains_radius(R):
                checks.append(analysis.morawetz_bound_check(trace, R))
        checks.append(analysis.weighted_morawetz_check(trace, data, config.kappa))
        if problem.p == 3.0:
            checks.append(analysis.weighted_morawetz_p3(trace, data))
        checks.extend(analysis.measure_and_flux_bounds(trace, series=series))

    if config.toggles["decay"] and trace.n_frames > 2 and t_end > 4.0:
        try:
            fit = analysis.decay_fit(series.times, series.E_minus, (1.0, t_end))
            report["decay_fit"] = fit.to_dict()
            K = weighted_energies(data, problem.p, config.kappa).K
            checks.append(
                analysis.decay_bound_check(
                    series.times, series.E_minus, config.kappa, K,
                    windows=None if t_end >= 10 else [(1.0, 0.7 * t_end), (1.0, t_end)],
                )
            )
        except ConfigError as exc:
            logger.warning("decay fit skipped: %s", exc)

    report["checks"] = [c.to_dict() for c in checks]
    report["all_passed"] = bool(all(c.passed for c in checks))
    _write_json(out / "report.json", report)

    manifest = {
        "tool": "conewave",
        "version": __version__,
        "config_hash": config.config_hash(),
        "config": config.raw,
        "seed": config.seed,
        "artifacts": sorted(
            p.name for p in out.iterdir() if p.suffix in (".csv", ".json")
        ),
    }
    _write_json(out / "manifest.json", manifest)
    return report


# ---------------------------------------------------------------------------
# Refinement ladders
# ---------------------------------------------------------------------------


def _scaled_config(config: RunConfig, factor: int) -> RunConfig:
    cfg = dataclasses.replace(
        config,
        n_r=config.n_r * factor,
        n_rho=config.n_rho * factor,
        n_z=config.n_z * factor,
    )
    return cfg


def _observed_order(hs, errs) -> float:
    hs = np.asarray(hs, float)
    errs = np.maximum(np.asarray(errs, float), 1e-300)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return float(slope)


def ladder(config: RunConfig, levels: int, out_dir: str | Path | None = None) -> dict:
    """Rerun at h, h/2, h/4, ... and report observed convergence orders."""
    if levels < 2:
        raise ConfigError("a refinement ladder needs at least 2 levels")
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    max_workers = int(os.environ.get("CONEWAVE_THREADS", "1") or "1")

    def one_level(i: int) -> dict:
        cfg = _scaled_config(config, 2**i)
        rep = run(cfg, out / f"level_{i}")
        entry = {
            "level": i,
            "resolution": rep["drift"]["resolution"],
            "drift": rep["drift"]["max_rel_drift"],
            "mu_discrepancy": rep.get("mu", {}).get("discrepancy"),
        }
        residuals = [
            c["lhs"] for c in rep["checks"] if c["name"].startswith("ledger_residual")
        ]
        entry["worst_ledger_residual"] = max(residuals) if residuals else None
        return entry

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            entries = list(pool.map(one_level, range(levels)))
    else:
        entries = [one_level(i) for i in range(levels)]

    hs = [e["resolution"] for e in entries]
    orders = {"drift": _observed_order(hs, [e["drift"] for e in entries])}
    if all(e["worst_ledger_residual"] is not None for e in entries):
        orders["ledger_residual"] = _observed_order(
            hs, [e["worst_ledger_residual"] for e in entries]
        )
    if all(e["mu_discrepancy"] is not None for e in entries):
        orders["mu_discrepancy"] = _observed_order(hs, [e["mu_discrepancy"] for e in entries])

    conv = {"levels": entries, "orders": orders}
    _write_json(out / "convergence.json", conv)
    _write_csv(
        out / "convergence.csv",
        ["level", "resolution", "drift", "worst_ledger_residual", "mu_discrepancy"],
        [
            (
                e["level"],
                e["resolution"],
                e["drift"],
                e["worst_ledger_residual"] if e["worst_ledger_residual"] is not None else "",
                e["mu_discrepancy"] if e["mu_discrepancy"] is not None else "",
            )
            for e in entries
        ],
    )
    return conv


def verify(report_path: str | Path) -> int:
    with open(report_path) as fh:
        report = json.load(fh)
    checks = report.get("checks", [])
    failed = [c for c in checks if not c.get("passed", False)]
    for c in checks:
        status = "PASS" if c.get("passed") else "FAIL"
        print(f"{status}  {c['name']}: lhs={c['lhs']:.6g} rhs={c['rhs']:.6g}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK_FAILURE


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="conewave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured simulation")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)

    p_lad = sub.add_parser("ladder", help="run a refinement ladder")
    p_lad.add_argument("--config", required=True)
    p_lad.add_argument("--levels", type=int, default=3)
    p_lad.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="exit 0 iff all report checks pass")
    p_ver.add_argument("report")

    sub.add_parser("list-data-families", help="print available initial-data families")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-data-families":
        for name, hint in sorted(DATA_FAMILIES.items()):
            print(f"{name:24s} {hint}")
        return EXIT_OK

    if args.command == "verify":
        return verify(args.report)

    try:
        config = load_config(args.config)
    except (ConfigError, FileNotFoundError, tomllib.TOMLDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        if args.command == "run":
            report = run(config, args.out)
            return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILURE
        conv = ladder(config, args.levels, args.out)
        print("observed orders:", json.dumps(conv["orders"], sort_keys=True))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (FloatingPointError, MemoryError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ABORT


if __name__ == "__main__":
    sys.exit(main())
