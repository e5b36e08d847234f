"""CSV emission: time series, steady-state profiles, run summary.

All files are UTF-8 comma-separated with one header row carrying units.
Floats are rendered with repr-stable formatting so identical runs produce
bit-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import CalcinerModel
from .solver import Trajectory
from .species import ALL_SPECIES, GASES, N_SOLIDS, SPECIES_INDEX

_DIFF_NAMES = [f"C_{s}_mol_m3" for s in ALL_SPECIES] + [
    "U_c_J_m3", "U_r_J_m3", "U_w_J_m3"]
_ALG_NAMES = ["T_c_K", "T_r_K", "T_w_K", "P_Pa"]


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def write_timeseries(path: Path, traj: Trajectory, model: CalcinerModel):
    """One row per snapshot: t, then all states per segment (segment-major)."""
    header = ["t_s"]
    for k in range(model.n_v):
        header += [f"{name}_seg{k + 1}" for name in _DIFF_NAMES + _ALG_NAMES]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, (x, y) in zip(traj.times, traj.states):
            row = [_fmt(t)]
            for k in range(model.n_v):
                row += [_fmt(v) for v in x[k]]
                row += [_fmt(v) for v in y[k]]
            w.writerow(row)


def write_profiles(path: Path, model: CalcinerModel, x, y):
    """Per-segment profile of the given state: temperatures, pressure,
    top-face velocity and per-species mass flow through the top face."""
    fields = model.evaluate(x, y)
    geom = model.geom
    M = model.table.molar_mass
    header = (["segment", "y_mid_m", "y_top_m", "T_c_K", "T_r_K", "T_w_K",
               "P_Pa", "v_top_m_s"]
              + [f"mdot_{s}_kg_s" for s in ALL_SPECIES])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(model.n_v):
            mdot = fields.species_flows[k + 1] * M
            row = ([str(k + 1),
                    _fmt(0.5 * (geom.y_faces[k] + geom.y_faces[k + 1])),
                    _fmt(geom.y_faces[k + 1])]
                   + [_fmt(v) for v in y[k]]
                   + [_fmt(fields.v_faces[k + 1])]
                   + [_fmt(v) for v in mdot])
            w.writerow(row)


def compute_summary(model: CalcinerModel, traj: Trajectory) -> dict:
    """Derived steady/final quantities: conversion, outlet T, composition.

    Outlet mole fractions are over the gas species only (normalized to 1);
    suspended carbon is reported separately as a fraction of the outlet gas
    molar flow.
    """
    _, x, y = traj.final
    fields = model.evaluate(x, y)
    out_flows = fields.species_flows[-1]
    gas_out = out_flows[N_SOLIDS:]
    total_gas = float(np.sum(gas_out))
    idx_caco3 = SPECIES_INDEX["CaCO3"]
    inlet_caco3 = float(model.inlet_molar[idx_caco3])
    if inlet_caco3 > 0.0:
        conversion = 100.0 * (1.0 - out_flows[idx_caco3] / inlet_caco3)
    else:
        conversion = 0.0
    summary = {
        "t_final_s": (traj.times[-1], "s"),
        "steady": (1.0 if traj.steady else 0.0, "flag"),
        "t_settle_s": (traj.t_settle if traj.t_settle is not None else -1.0,
                       "s"),
        "conversion_CaCO3_pct": (conversion, "%"),
        "T_out_K": (float(y[-1, 0]), "K"),
        "T_out_C": (float(y[-1, 0]) - 273.15, "degC"),
        "outlet_gas_molar_flow_mol_s": (total_gas, "mol/s"),
    }
    safe_total = total_gas if total_gas > 0.0 else 1.0
    for i, name in enumerate(GASES):
        summary[f"x_out_{name}_pct"] = (100.0 * gas_out[i] / safe_total, "%")
    summary["carbon_slip_pct"] = (
        100.0 * out_flows[SPECIES_INDEX["C"]] / safe_total, "%")
    summary["wall_loss_MW"] = (
        float(np.sum(fields.Q_we_cv + fields.Q_we_rad)) / 1e6, "MW")
    return summary


def write_summary(path: Path, summary: dict):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "value", "unit"])
        for key, (value, unit) in summary.items():
            w.writerow([key, _fmt(value), unit])


def write_diagnostics(path: Path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line.rstrip("\n") + "\n")


@dataclass
class ReportBundle:
    """Paths of everything one run emitted, plus its summary."""

    out_dir: Path
    timeseries: Path
    profiles: Path
    summary_file: Path
    diagnostics: Path
    summary: dict


def emit_reports(out_dir: Path, model: CalcinerModel, traj: Trajectory,
                 extra_diagnostics=()) -> ReportBundle:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ts = out_dir / "timeseries.csv"
    pf = out_dir / "profiles.csv"
    sm = out_dir / "summary.csv"
    dg = out_dir / "diagnostics.log"
    write_timeseries(ts, traj, model)
    _, x, y = traj.final
    write_profiles(pf, model, x, y)
    summary = compute_summary(model, traj)
    write_summary(sm, summary)
    stats = traj.stats
    lines = [
        f"steps_accepted={stats.get('steps', 0)}",
        f"steps_rejected={stats.get('rejected', 0)}",
        f"newton_iterations={stats.get('newton_iterations', 0)}",
        f"jacobians={stats.get('jacobians', 0)}",
        f"max_algebraic_residual={stats.get('max_g_norm', 0.0):.3e}",
        f"final_dt_s={stats.get('dt_final', 0.0):.6g}",
        f"steady={traj.steady}",
        f"t_settle_s={traj.t_settle}",
    ]
    lines.extend(extra_diagnostics)
    write_diagnostics(dg, lines)
    return ReportBundle(out_dir=out_dir, timeseries=ts, profiles=pf,
                        summary_file=sm, diagnostics=dg, summary=summary)
