"""Scenario configuration: parsing, validation, overrides, model assembly."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .geometry import GeometrySpec, segment_partition
from .model import BoundarySpec, CalcinerModel, Stream
from .solver import DaeIntegrator, SolverConfig
from .species import table_from_document, load_species_document
from .transport import WSGGModel


class ScenarioError(ValueError):
    """Configuration file cannot be parsed or validated."""


STREAM_NAMES = ("raw_meal", "fuel", "kiln_gas", "tertiary_air")


@dataclass
class ScenarioSpec:
    """Fully validated scenario: geometry, boundary data, solver settings."""

    name: str
    geometry: GeometrySpec
    streams: dict                  # name -> (temperature K, {species: kg/s})
    ambient_temperature: float     # K
    outlet_pressure: float         # Pa
    eps_env: float
    exterior_htc: float            # W/(m^2 K)
    calibration: dict              # reaction index -> factor
    initial_temperature: float     # K
    initial_gas: dict              # mole fractions
    solver: SolverConfig
    t_end: float                   # s, dynamic-mode horizon
    output_cadence: float          # s between recorded snapshots
    wsgg: WSGGModel
    species_db: str | None = None
    material_overrides: dict = field(default_factory=dict)
    diffusion: float = 0.0
    closed_top: bool = False


def _temperature(block: dict, where: str) -> float:
    if "temperature_K" in block:
        return float(block["temperature_K"])
    if "temperature_C" in block:
        return float(block["temperature_C"]) + 273.15
    raise ScenarioError(f"{where}: missing temperature_C/temperature_K")


def _get(block: dict, key: str, where: str):
    if key not in block:
        raise ScenarioError(f"{where}: missing key {key!r}")
    return block[key]


def bundled_scenario_path(name: str) -> Path:
    return Path(resources.files("calcinersim").joinpath(f"data/{name}.yaml"))


def load_scenario(path: str | Path, overrides=None) -> ScenarioSpec:
    """Load a scenario file; ``base_case`` resolves to the bundled preset.

    ``overrides`` is a list of dotted "key.path=value" strings applied to
    the raw document before validation (values parsed as YAML).
    """
    p = Path(path)
    if not p.exists():
        bundled = bundled_scenario_path(str(path))
        if bundled.exists():
            p = bundled
        else:
            raise ScenarioError(f"scenario file not found: {path}")
    with open(p, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ScenarioError(f"{p}: not a scenario document")
    raw.setdefault("name", p.stem)
    for item in overrides or []:
        _apply_override(raw, item)
    try:
        return scenario_from_dict(raw)
    except ScenarioError as exc:
        raise ScenarioError(f"{p}: {exc}") from None


def _apply_override(raw: dict, item: str):
    if "=" not in item:
        raise ScenarioError(f"override {item!r} is not key.path=value")
    key, value = item.split("=", 1)
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ScenarioError(f"override {item!r}: {part} is not a mapping")
    node[parts[-1]] = yaml.safe_load(value)


def scenario_from_dict(raw: dict) -> ScenarioSpec:
    geom_block = _get(raw, "geometry", "scenario")
    try:
        geometry = GeometrySpec(
            h_tot=float(_get(geom_block, "h_tot", "geometry")),
            h_cl=float(_get(geom_block, "h_cl", "geometry")),
            h_cu=float(_get(geom_block, "h_cu", "geometry")),
            r_c=float(_get(geom_block, "r_c", "geometry")),
            r_l=float(_get(geom_block, "r_l", "geometry")),
            r_u=float(_get(geom_block, "r_u", "geometry")),
            r_r=float(_get(geom_block, "r_r", "geometry")),
            r_w=float(_get(geom_block, "r_w", "geometry")),
            n_v=int(_get(geom_block, "n_v", "geometry")),
        ).validate()
    except ValueError as exc:
        raise ScenarioError(f"geometry: {exc}") from None

    streams = {}
    for name, block in (raw.get("streams") or {}).items():
        where = f"streams.{name}"
        rates = {str(k): float(v) for k, v in
                 _get(block, "mass_rates_kg_s", where).items()}
        if any(v < 0.0 for v in rates.values()):
            raise ScenarioError(f"{where}: negative mass rate")
        streams[name] = (_temperature(block, where), rates)

    ambient = raw.get("ambient") or {}
    t_env = _temperature(ambient, "ambient") if ambient else 298.15

    calibration = {}
    for key, value in (raw.get("calibration_factors") or {}).items():
        idx = int(str(key).lstrip("r"))
        if not 1 <= idx <= 11:
            raise ScenarioError(f"calibration_factors: bad reaction {key}")
        calibration[idx] = float(value)

    initial = raw.get("initial") or {}
    init_T = _temperature(initial, "initial") if initial else 673.15
    init_gas = {str(k): float(v) for k, v in
                (initial.get("gas_mole_fractions")
                 or {"N2": 0.79, "O2": 0.21}).items()}

    solver_block = raw.get("solver") or {}
    known = set(SolverConfig.__dataclass_fields__)
    bad = set(solver_block) - known
    if bad:
        raise ScenarioError(f"solver: unknown keys {sorted(bad)}")
    try:
        solver = SolverConfig(**{k: type(getattr(SolverConfig(), k))(v)
                                 for k, v in solver_block.items()}).validate()
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"solver: {exc}") from None

    wsgg_block = raw.get("wsgg") or {}
    wsgg = WSGGModel(
        kappa=tuple(float(v) for v in wsgg_block.get(
            "kappa_per_bar_m", WSGGModel.kappa)),
        weight_c0=tuple(float(v) for v in wsgg_block.get(
            "weight_c0", WSGGModel.weight_c0)),
        weight_c1=tuple(float(v) for v in wsgg_block.get(
            "weight_c1", WSGGModel.weight_c1)),
        beam_length_factor=float(wsgg_block.get(
            "beam_length_factor", WSGGModel.beam_length_factor)),
    )

    output = raw.get("output") or {}
    return ScenarioSpec(
        name=str(raw.get("name", "scenario")),
        geometry=geometry,
        streams=streams,
        ambient_temperature=t_env,
        outlet_pressure=float(ambient.get("pressure_Pa", 101325.0)),
        eps_env=float(ambient.get("emissivity", 1.0)),
        exterior_htc=float(ambient.get("exterior_htc_W_m2K", 5.0)),
        calibration=calibration,
        initial_temperature=init_T,
        initial_gas=init_gas,
        solver=solver,
        t_end=float(raw.get("t_end_s", 3600.0)),
        output_cadence=float(output.get("cadence_s", 10.0)),
        wsgg=wsgg,
        species_db=raw.get("species_db"),
        material_overrides=copy.deepcopy(raw.get("materials") or {}),
        diffusion=float(raw.get("diffusion_m2_s", 0.0)),
        closed_top=bool(raw.get("closed_top", False)),
    )


@dataclass
class Simulation:
    """Assembled scenario, ready to integrate."""

    spec: ScenarioSpec
    model: CalcinerModel
    integrator: DaeIntegrator
    x0: np.ndarray
    y0: np.ndarray


def build_simulation(spec: ScenarioSpec) -> Simulation:
    doc = load_species_document(spec.species_db)
    for mat, fields_ in spec.material_overrides.items():
        if mat not in doc.get("materials", {}):
            raise ScenarioError(f"materials: unknown material {mat!r}")
        doc["materials"][mat].update(fields_)
    table = table_from_document(doc)

    streams = tuple(
        Stream.from_mass_rates(name, T, rates, table)
        for name, (T, rates) in spec.streams.items())
    bc = BoundarySpec(
        streams=streams,
        outlet_pressure=spec.outlet_pressure,
        T_env=spec.ambient_temperature,
        closed_top=spec.closed_top,
    )
    geom = segment_partition(spec.geometry)
    model = CalcinerModel(
        geom, table, bc,
        calibration=spec.calibration,
        wsgg=spec.wsgg,
        exterior_htc=spec.exterior_htc,
        eps_env=spec.eps_env,
        diffusion=spec.diffusion,
    )
    x0, y0 = model.gas_fill_state(spec.initial_temperature, spec.initial_gas)
    integrator = DaeIntegrator(model, spec.solver)
    return Simulation(spec=spec, model=model, integrator=integrator,
                      x0=x0, y0=y0)
