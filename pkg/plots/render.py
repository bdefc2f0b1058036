#!/usr/bin/env python3
"""Publication-style figures from frozen conewave run artifacts.

Usage:
    python plots/render.py --spec figure.toml

The spec file names a figure kind, its input artifacts and the output path:

    [figure]
    kind = "decay"            # decay | ledger | mu | inner_cone | convergence
    output = "decay.png"
    logx = true               # optional axis flags (defaults per kind)
    logy = true

    [inputs]
    energy = "out/energy.csv"
    report = "out/report.json"

Inputs are consumed exactly as the run wrote them (frozen CSV columns and
report/ledger JSON schemas); nothing is recomputed.  The decay figure overlays
the C t^-alpha guide line taken verbatim from report.json's fit.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("decay", "ledger", "mu", "inner_cone", "convergence")

REQUIRED_COLUMNS = {
    "energy": ["t", "E", "E_minus", "E_plus", "E_minus_inner_c"],
    "mu": ["t", "P_origin", "P_cylinder"],
    "convergence": ["level", "resolution", "drift"],
}


class SchemaError(ValueError):
    """Input artifact does not match the frozen schema."""


def read_csv_columns(path: str | Path, table: str) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty CSV")
        missing = [c for c in REQUIRED_COLUMNS[table] for _ in [0] if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for col in reader.fieldnames:
        try:
            out[col] = np.asarray([float(r[col]) if r[col] != "" else np.nan for r in rows])
        except ValueError:
            out[col] = np.asarray([r[col] for r in rows])
    return out


def load_spec(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    fig = raw.get("figure", {})
    kind = fig.get("kind")
    if kind not in FIGURE_KINDS:
        raise SchemaError(f"figure.kind must be one of {FIGURE_KINDS}, got {kind!r}")
    if "output" not in fig:
        raise SchemaError("figure.output is required")
    return {"figure": fig, "inputs": raw.get("inputs", {})}


def _axes(fig_cfg: dict, default_logx: bool, default_logy: bool):
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=150)
    if fig_cfg.get("logx", default_logx):
        ax.set_xscale("log")
    if fig_cfg.get("logy", default_logy):
        ax.set_yscale("log")
    return fig, ax


def render_decay(spec: dict) -> dict:
    cols = read_csv_columns(spec["inputs"]["energy"], "energy")
    with open(spec["inputs"]["report"]) as fh:
        report = json.load(fh)
    fit = report.get("decay_fit")
    if fit is None:
        raise SchemaError("report.json carries no decay_fit; run with decay diagnostics on")
    alpha, amp = float(fit["alpha"]), float(fit["amplitude"])
    kappa = float(report.get("kappa", 0.75))

    fig, ax = _axes(spec["figure"], True, True)
    sel = (cols["t"] > 0) & (cols["E_minus"] > 0)
    ax.plot(cols["t"][sel], cols["E_minus"][sel], lw=1.2, label=r"$E_-(t)$")
    t_guide = np.geomspace(max(fit["window"][0], 1e-3), cols["t"][sel].max(), 64)
    ax.plot(t_guide, amp * t_guide ** (-alpha), "k--", lw=1.0,
            label=rf"fit $C\,t^{{-{alpha:.3g}}}$")
    ref = cols["E_minus"][sel][np.searchsorted(cols["t"][sel], t_guide[0])]
    ax.plot(t_guide, ref * (t_guide / t_guide[0]) ** (-kappa), "r:", lw=1.0,
            label=rf"$t^{{-{kappa:g}}}$ envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("inward energy")
    ax.legend(frameon=False, fontsize=8)
    return {"guide_exponent": alpha, "guide_amplitude": amp}


def render_ledger(spec: dict) -> dict:
    with open(spec["inputs"]["ledgers"]) as fh:
        payload = json.load(fh)
    ledgers = payload.get("ledgers")
    if not ledgers:
        raise SchemaError("ledgers.json holds no ledgers")
    led = ledgers[0]
    sel = spec["figure"].get("region")
    if sel:
        matches = [l for l in ledgers if l["region_id"] == sel]
        if not matches:
            raise SchemaError(f"region {sel!r} not present in ledgers.json")
        led = matches[0]

    labels = [e["segment_id"] for e in led["segments"]]
    values = [e["value"] for e in led["segments"]]
    labels += ["pi*mu", "Morawetz", "residual"]
    values += [led["mu_term"], led["morawetz_term"], led["residual"]]

    fig, ax = _axes(spec["figure"], False, False)
    colors = ["tab:blue" if v >= 0 else "tab:red" for v in values]
    colors[-1] = "tab:gray"
    ax.bar(range(len(values)), values, color=colors)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=40, ha="right", fontsize=7)
    ax.set_ylabel("signed contribution")
    ax.set_title(f"{led['region_id']} ({led['which']} energy)", fontsize=9)
    fig.tight_layout()
    return {"region_id": led["region_id"], "n_segments": len(led["segments"])}


def render_mu(spec: dict) -> dict:
    cols = read_csv_columns(spec["inputs"]["mu"], "mu")
    fig, ax = _axes(spec["figure"], False, False)
    ax.plot(cols["t"], cols["P_origin"], lw=1.2, label="origin oracle")
    ax.plot(cols["t"], cols["P_cylinder"], lw=1.0, ls="--", label="cylinder extrapolation")
    ax.set_xlabel("t")
    ax.set_ylabel(r"cumulative $\mu([t_0,t])$")
    ax.legend(frameon=False, fontsize=8)
    return {"final_gap": float(abs(cols["P_origin"][-1] - cols["P_cylinder"][-1]))}


def render_inner_cone(spec: dict) -> dict:
    cols = read_csv_columns(spec["inputs"]["energy"], "energy")
    fig, ax = _axes(spec["figure"], False, True)
    sel = cols["E_minus_inner_c"] > 0
    if not sel.any():
        sel = slice(None)
        ax.set_yscale("linear")
    ax.plot(cols["t"][sel], cols["E_minus_inner_c"][sel], lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$E_-(t;\,0,\,c\,t)$")
    return {}


def render_convergence(spec: dict) -> dict:
    path = spec["inputs"]["convergence"]
    if str(path).endswith(".json"):
        with open(path) as fh:
            conv = json.load(fh)
        levels = conv["levels"]
        hs = np.asarray([l["resolution"] for l in levels], float)
        drift = np.asarray([l["drift"] for l in levels], float)
        orders = conv.get("orders", {})
    else:
        cols = read_csv_columns(path, "convergence")
        hs = cols["resolution"]
        drift = cols["drift"]
        orders = {}
    fig, ax = _axes(spec["figure"], True, True)
    ax.plot(hs, drift, "o-", label="energy drift")
    guide = drift[0] * (hs / hs[0]) ** 2
    ax.plot(hs, guide, "k--", lw=0.8, label=r"$h^2$")
    ax.set_xlabel("grid spacing h")
    ax.set_ylabel("error")
    title = ", ".join(f"{k}: {v:.2f}" for k, v in orders.items())
    if title:
        ax.set_title(f"observed orders  {title}", fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    return {"orders": orders}


RENDERERS = {
    "decay": render_decay,
    "ledger": render_ledger,
    "mu": render_mu,
    "inner_cone": render_inner_cone,
    "convergence": render_convergence,
}


def render(spec: dict) -> dict:
    """Render one figure spec; returns metadata (incl. the decay guide exponent)."""
    kind = spec["figure"]["kind"]
    meta = RENDERERS[kind](spec)
    out = Path(spec["figure"]["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    plt.savefig(out)
    plt.close("all")
    meta["output"] = str(out)
    meta["kind"] = kind
    return meta


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spec", required=True, help="figure spec TOML")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        meta = render(spec)
    except (SchemaError, FileNotFoundError, KeyError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(meta, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
