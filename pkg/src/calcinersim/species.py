"""Species registry, property data, and the reaction network.

The inventory is fixed: 10 solids and 7 gases, in the order below. All
property data comes from a YAML document (a default is bundled); the loader
normalizes the tabulated units to SI and validates the registry invariants
(positive masses/densities, positive heat capacities over the declared
ranges, per-reaction element and mass balance).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .constants import T_STANDARD

SOLIDS = ("CaCO3", "CaO", "SiO2", "Al2O3", "Fe2O3",
          "C2S", "C3S", "C3A", "C4AF", "C")
GASES = ("CO2", "N2", "O2", "Ar", "CO", "H2", "H2O")
ALL_SPECIES = SOLIDS + GASES

N_SOLIDS = len(SOLIDS)
N_GASES = len(GASES)
N_SPECIES = len(ALL_SPECIES)
N_REACTIONS = 11

SPECIES_INDEX = {name: i for i, name in enumerate(ALL_SPECIES)}

ELEMENTS = ("Ca", "Si", "Al", "Fe", "C", "O", "H", "N", "Ar")

# Atom counts per species (cement-chemist compounds expanded to oxides).
_COMPOSITION = {
    "CaCO3": {"Ca": 1, "C": 1, "O": 3},
    "CaO":   {"Ca": 1, "O": 1},
    "SiO2":  {"Si": 1, "O": 2},
    "Al2O3": {"Al": 2, "O": 3},
    "Fe2O3": {"Fe": 2, "O": 3},
    "C2S":   {"Ca": 2, "Si": 1, "O": 4},
    "C3S":   {"Ca": 3, "Si": 1, "O": 5},
    "C3A":   {"Ca": 3, "Al": 2, "O": 6},
    "C4AF":  {"Ca": 4, "Al": 2, "Fe": 2, "O": 10},
    "C":     {"C": 1},
    "CO2":   {"C": 1, "O": 2},
    "N2":    {"N": 2},
    "O2":    {"O": 2},
    "Ar":    {"Ar": 1},
    "CO":    {"C": 1, "O": 1},
    "H2":    {"H": 2},
    "H2O":   {"H": 2, "O": 1},
}

#: integer matrix (N_SPECIES x len(ELEMENTS)) of atoms per molecule
ELEMENT_MATRIX = np.array(
    [[_COMPOSITION[s].get(e, 0) for e in ELEMENTS] for s in ALL_SPECIES],
    dtype=int,
)

# Compound species whose molar mass must equal the sum of their parts
# (the source table marks C2S/C4AF "computed from the above results").
_COMPOUND_SUMS = {
    "C2S": {"CaO": 2, "SiO2": 1},
    "C3S": {"CaO": 3, "SiO2": 1},
    "C3A": {"CaO": 3, "Al2O3": 1},
    "C4AF": {"CaO": 4, "Al2O3": 1, "Fe2O3": 1},
}


class PropertyDataError(ValueError):
    """Raised when the property document is missing data or inconsistent."""


@dataclass(frozen=True)
class Species:
    """One species record, SI units throughout."""

    name: str
    phase: str                       # "solid" | "gas"
    molar_mass: float                # kg/mol
    formation_enthalpy: float        # J/mol at (T0, P0)
    cp_model: str                    # "quadratic" | "jacobs5"
    cp_coeffs: tuple                 # SI coefficients of the cp model
    cp_range: tuple                  # (T_lo, T_hi) K of declared validity
    solid_density: float = 0.0       # kg/m^3 (solids)
    thermal_conductivity: float = 0.0     # W/(m K) (solids, constant)
    conductivity_refs: tuple = ()    # ((T1,k1),(T2,k2)) W/(m K) (gases)
    viscosity_refs: tuple = ()       # ((T1,mu1),(T2,mu2)) Pa s (gases)
    diffusion_volume: float = 0.0    # cm^3 (gases; also suspended carbon)
    emissivity: float = 0.0          # solids only

    def cp_molar(self, T: float) -> float:
        """Molar heat capacity at T [J/(mol K)], no range checking."""
        c = self.cp_coeffs
        if self.cp_model == "jacobs5":
            a, b, cc, d, e = c
            return a + b * T + cc * T * T + d / (T * T) + e / math.sqrt(T)
        c0, c1, c2 = c
        return c0 + c1 * T + c2 * T * T


@dataclass(frozen=True)
class WallMaterial:
    """Pseudo-species for the refractory or shell wall."""

    name: str
    density: float            # kg/m^3
    molar_mass: float         # kg/mol
    cp_coeffs: tuple          # quadratic, SI
    thermal_conductivity: float   # W/(m K)
    emissivity: float

    @property
    def molar_concentration(self) -> float:
        """mol per m^3 of wall material."""
        return self.density / self.molar_mass


@dataclass(frozen=True)
class ReactionSpec:
    """One reaction of the 11-reaction network.

    ``stoich`` is the signed coefficient row over ALL_SPECIES. ``alpha``
    holds concentration exponents (concentrations in mol/L), ``beta``
    partial-pressure exponents (pressures in Pa). ``rate_unit`` tags the
    tabulated pre-exponential: "kg_m3_s", "mol_m3_s" or "per_s";
    ``reference_species`` is the table's first reactant, used for the
    conversion to molar reaction extent.
    """

    index: int
    equation: str
    stoich: np.ndarray
    rate_unit: str
    reference_species: str
    k0: float
    n: float
    activation_energy: float     # J/mol
    alpha: np.ndarray
    beta: np.ndarray
    calibration_factor: float = 1.0


@dataclass
class SpeciesTable:
    """Immutable registry of all species, wall materials and reactions.

    Ordered arrays (index = SPECIES_INDEX) are precomputed for vectorized
    evaluation. Safe for concurrent reads.
    """

    species: dict
    reactions: list
    refractory: WallMaterial
    shell: WallMaterial
    T0: float = T_STANDARD

    # derived arrays, filled in __post_init__
    molar_mass: np.ndarray = field(init=False)
    formation_enthalpy: np.ndarray = field(init=False)
    solid_density: np.ndarray = field(init=False)
    solid_conductivity: np.ndarray = field(init=False)
    solid_emissivity: float = field(init=False)
    nu: np.ndarray = field(init=False)

    def __post_init__(self):
        self.molar_mass = np.array(
            [self.species[s].molar_mass for s in ALL_SPECIES])
        self.formation_enthalpy = np.array(
            [self.species[s].formation_enthalpy for s in ALL_SPECIES])
        self.solid_density = np.array(
            [self.species[s].solid_density for s in SOLIDS])
        self.solid_conductivity = np.array(
            [self.species[s].thermal_conductivity for s in SOLIDS])
        self.solid_emissivity = self.species[SOLIDS[0]].emissivity
        self.nu = np.array([r.stoich for r in self.reactions], dtype=float)
        # quadratic coefficients for every species; the Jacobs row is
        # handled separately wherever cp is evaluated
        self._cp_quad = np.zeros((N_SPECIES, 3))
        self._jacobs = None
        self._jacobs_idx = None
        for i, name in enumerate(ALL_SPECIES):
            sp = self.species[name]
            if sp.cp_model == "jacobs5":
                self._jacobs = np.asarray(sp.cp_coeffs)
                self._jacobs_idx = i
            else:
                self._cp_quad[i] = sp.cp_coeffs
        self._cp_range = np.array(
            [self.species[s].cp_range for s in ALL_SPECIES])
        self._warned_extrapolation = set()
        for arr in (self.molar_mass, self.formation_enthalpy,
                    self.solid_density, self.solid_conductivity,
                    self.nu, self._cp_quad, self._cp_range):
            arr.setflags(write=False)

    # -- heat capacity -----------------------------------------------------

    def cp(self, T):
        """Molar cp for every species, shape (..., N_SPECIES) [J/(mol K)].

        Vectorized; performs no range checking (see :meth:`cp_molar`).
        """
        T = np.asarray(T, dtype=float)[..., None]
        c = self._cp_quad
        out = c[:, 0] + c[:, 1] * T + c[:, 2] * T * T
        if self._jacobs is not None:
            a, b, cc, d, e = self._jacobs
            Tj = T[..., 0]
            out[..., self._jacobs_idx] = (
                a + b * Tj + cc * Tj * Tj + d / (Tj * Tj) + e / np.sqrt(Tj))
        return out

    def cp_integral(self, T):
        """Closed-form int_{T0}^{T} cp dtau per species [J/mol]."""
        T = np.asarray(T, dtype=float)[..., None]
        T0 = self.T0
        c = self._cp_quad
        out = (c[:, 0] * (T - T0)
               + c[:, 1] / 2.0 * (T * T - T0 * T0)
               + c[:, 2] / 3.0 * (T ** 3 - T0 ** 3))
        if self._jacobs is not None:
            a, b, cc, d, e = self._jacobs
            Tj = T[..., 0]
            out[..., self._jacobs_idx] = (
                a * (Tj - T0)
                + b / 2.0 * (Tj * Tj - T0 * T0)
                + cc / 3.0 * (Tj ** 3 - T0 ** 3)
                - d * (1.0 / Tj - 1.0 / T0)
                + 2.0 * e * (np.sqrt(Tj) - math.sqrt(T0)))
        return out

    def cp_molar(self, name: str, T: float) -> float:
        """Molar heat capacity of one species [J/(mol K)].

        Outside the declared temperature range the same expression is
        extrapolated and a RuntimeWarning is emitted once per species per
        table instance.
        """
        if name not in self.species:
            raise KeyError(f"unknown species id {name!r}")
        if T <= 0.0:
            raise ValueError(f"temperature must be positive, got {T}")
        sp = self.species[name]
        lo, hi = sp.cp_range
        if (T < lo or T > hi) and name not in self._warned_extrapolation:
            self._warned_extrapolation.add(name)
            warnings.warn(
                f"cp of {name} evaluated at {T:.1f} K, outside the declared "
                f"range [{lo:.0f}, {hi:.0f}] K; extrapolating",
                RuntimeWarning, stacklevel=2)
        return sp.cp_molar(T)

    # -- reactions ---------------------------------------------------------

    def stoichiometry(self) -> np.ndarray:
        """Stoichiometric matrix nu, shape (11, N_SPECIES), reactants < 0."""
        return self.nu


def stoichiometry(table: SpeciesTable | None = None) -> np.ndarray:
    """Module-level convenience wrapper around the bundled network."""
    if table is None:
        table = load_species_table()
    return table.stoichiometry()


# ---------------------------------------------------------------------------
# loader


def _require(record: dict, key: str, where: str):
    if key not in record or record[key] is None:
        raise PropertyDataError(f"{where}: missing field {key!r}")
    return record[key]


def _two_point_refs(raw, scale: float, where: str) -> tuple:
    try:
        (t1, v1), (t2, v2) = raw
    except (TypeError, ValueError):
        raise PropertyDataError(
            f"{where}: expected two (T, value) reference points") from None
    t1, t2 = float(t1), float(t2)
    if t1 <= 0 or t2 <= 0 or t1 == t2:
        raise PropertyDataError(
            f"{where}: reference temperatures must be positive and distinct")
    return ((t1, float(v1) * scale), (t2, float(v2) * scale))


def _parse_species(name: str, rec: dict) -> Species:
    where = f"species {name}"
    phase = _require(rec, "phase", where)
    if phase not in ("solid", "gas"):
        raise PropertyDataError(f"{where}: bad phase {phase!r}")
    molar_mass = float(_require(rec, "molar_mass_g_mol", where)) * 1e-3
    if molar_mass <= 0:
        raise PropertyDataError(f"{where}: molar mass must be positive")
    h_f = float(_require(rec, "formation_enthalpy_kJ_mol", where)) * 1e3

    cp_model = _require(rec, "cp_model", where)
    if cp_model == "quadratic":
        c0, c1, c2 = (float(v) for v in _require(rec, "cp_quadratic", where))
        cp_coeffs = (c0, c1 * 1e-3, c2 * 1e-5)
    elif cp_model == "jacobs5":
        cp_coeffs = tuple(float(v) for v in _require(rec, "cp_jacobs5", where))
        if len(cp_coeffs) != 5:
            raise PropertyDataError(f"{where}: cp_jacobs5 needs 5 terms")
    else:
        raise PropertyDataError(f"{where}: unknown cp_model {cp_model!r}")
    cp_range = tuple(float(v) for v in _require(rec, "cp_range_K", where))

    kwargs = dict(
        name=name, phase=phase, molar_mass=molar_mass,
        formation_enthalpy=h_f, cp_model=cp_model, cp_coeffs=cp_coeffs,
        cp_range=cp_range,
    )
    if phase == "solid":
        rho = float(_require(rec, "density_g_cm3", where)) * 1e3
        if rho <= 0:
            raise PropertyDataError(f"{where}: density must be positive")
        kwargs.update(
            solid_density=rho,
            thermal_conductivity=float(
                _require(rec, "thermal_conductivity_W_mK", where)),
            emissivity=float(_require(rec, "emissivity", where)),
            diffusion_volume=float(rec.get("diffusion_volume_cm3", 0.0)),
        )
    else:
        kwargs.update(
            conductivity_refs=_two_point_refs(
                _require(rec, "thermal_conductivity_refs_mW_mK", where),
                1e-3, where),
            viscosity_refs=_two_point_refs(
                _require(rec, "viscosity_refs_uPa_s", where), 1e-6, where),
            diffusion_volume=float(
                _require(rec, "diffusion_volume_cm3", where)),
        )
    return Species(**kwargs)


def _parse_material(name: str, rec: dict) -> WallMaterial:
    where = f"material {name}"
    c0, c1, c2 = (float(v) for v in _require(rec, "cp_quadratic", where))
    return WallMaterial(
        name=name,
        density=float(_require(rec, "density_kg_m3", where)),
        molar_mass=float(_require(rec, "molar_mass_g_mol", where)) * 1e-3,
        cp_coeffs=(c0, c1 * 1e-3, c2 * 1e-5),
        thermal_conductivity=float(
            _require(rec, "thermal_conductivity_W_mK", where)),
        emissivity=float(_require(rec, "emissivity", where)),
    )


def _parse_reaction(rec: dict) -> ReactionSpec:
    idx = int(_require(rec, "index", "reaction"))
    where = f"reaction #{idx}"
    stoich = np.zeros(N_SPECIES)
    for name, coeff in _require(rec, "stoichiometry", where).items():
        if name not in SPECIES_INDEX:
            raise PropertyDataError(f"{where}: unknown species {name!r}")
        stoich[SPECIES_INDEX[name]] = float(coeff)
    alpha = np.zeros(N_SPECIES)
    for name, expo in (rec.get("alpha") or {}).items():
        alpha[SPECIES_INDEX[name]] = float(expo)
    beta = np.zeros(N_SPECIES)
    for name, expo in (rec.get("beta") or {}).items():
        gi = SPECIES_INDEX[name]
        if ALL_SPECIES[gi] not in GASES:
            raise PropertyDataError(
                f"{where}: beta exponent on non-gas {name!r}")
        beta[gi] = float(expo)
    unit = _require(rec, "rate_unit", where)
    if unit not in ("kg_m3_s", "mol_m3_s", "per_s"):
        raise PropertyDataError(f"{where}: unknown rate_unit {unit!r}")
    ref = _require(rec, "reference_species", where)
    if ref not in SPECIES_INDEX:
        raise PropertyDataError(f"{where}: unknown reference {ref!r}")
    stoich.setflags(write=False)
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return ReactionSpec(
        index=idx,
        equation=str(rec.get("equation", "")),
        stoich=stoich,
        rate_unit=unit,
        reference_species=ref,
        k0=float(_require(rec, "k0", where)),
        n=float(_require(rec, "n", where)),
        activation_energy=float(
            _require(rec, "activation_energy_kJ_mol", where)) * 1e3,
        alpha=alpha,
        beta=beta,
    )


def _validate(table: SpeciesTable):
    # molar-mass consistency of the compound species
    for name, parts in _COMPOUND_SUMS.items():
        m = table.species[name].molar_mass
        m_sum = sum(table.species[p].molar_mass * k for p, k in parts.items())
        if abs(m - m_sum) / m_sum > 0.005:
            raise PropertyDataError(
                f"species {name}: molar mass {m*1e3:.2f} g/mol deviates "
                f"more than 0.5% from component sum {m_sum*1e3:.2f} g/mol")
    # cp positive over the declared range
    for name in ALL_SPECIES:
        sp = table.species[name]
        lo, hi = sp.cp_range
        grid = np.linspace(lo, hi, 64)
        vals = [sp.cp_molar(t) for t in grid]
        if min(vals) <= 0.0:
            raise PropertyDataError(
                f"species {name}: cp not positive over [{lo}, {hi}] K")
    # reactions: element balance exact, mass balance within rounding
    expected = set(range(1, N_REACTIONS + 1))
    got = {r.index for r in table.reactions}
    if got != expected:
        raise PropertyDataError(
            f"reaction set must be #1..#{N_REACTIONS}, got {sorted(got)}")
    for r in table.reactions:
        if not np.all(r.stoich == np.round(r.stoich)):
            raise PropertyDataError(
                f"reaction #{r.index}: non-integer stoichiometry")
        atoms = r.stoich.astype(int) @ ELEMENT_MATRIX
        if np.any(atoms != 0):
            bad = [e for e, a in zip(ELEMENTS, atoms) if a != 0]
            raise PropertyDataError(
                f"reaction #{r.index}: element balance violated for {bad}")
        mass = float(r.stoich @ table.molar_mass)
        scale = float(np.abs(r.stoich) @ table.molar_mass) / 2.0
        if abs(mass) / scale > 0.005:
            raise PropertyDataError(
                f"reaction #{r.index}: mass imbalance {mass*1e3:.3f} g/mol "
                f"exceeds 0.5% of {scale*1e3:.2f} g/mol")
        if r.stoich[SPECIES_INDEX[r.reference_species]] >= 0:
            raise PropertyDataError(
                f"reaction #{r.index}: reference species "
                f"{r.reference_species} is not a reactant")


def default_document_path() -> Path:
    return Path(resources.files("calcinersim").joinpath("data/species.yaml"))


def load_species_document(path: str | Path | None = None) -> dict:
    """Read a property document into a plain dict (no validation)."""
    doc_path = Path(path) if path is not None else default_document_path()
    with open(doc_path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or "species" not in doc:
        raise PropertyDataError(f"{doc_path}: not a property document")
    return doc


def load_species_table(path: str | Path | None = None) -> SpeciesTable:
    """Load and validate a property document; ``None`` loads the bundled one.

    Raises PropertyDataError naming the offending species/field on any
    missing record or invariant violation.
    """
    return table_from_document(load_species_document(path))


def table_from_document(doc: dict) -> SpeciesTable:
    """Build and validate a SpeciesTable from an already-parsed document."""

    records = doc["species"]
    missing = [s for s in ALL_SPECIES if s not in records]
    if missing:
        raise PropertyDataError(f"missing species: {', '.join(missing)}")
    extra = [s for s in records if s not in SPECIES_INDEX]
    if extra:
        raise PropertyDataError(f"unknown species: {', '.join(extra)}")
    species = {name: _parse_species(name, records[name])
               for name in ALL_SPECIES}
    for name in SOLIDS:
        if species[name].phase != "solid":
            raise PropertyDataError(f"species {name}: must be solid phase")
    for name in GASES:
        if species[name].phase != "gas":
            raise PropertyDataError(f"species {name}: must be gas phase")

    materials = doc.get("materials") or {}
    for key in ("refractory", "shell"):
        if key not in materials:
            raise PropertyDataError(f"missing material record {key!r}")
    reactions = sorted((_parse_reaction(r) for r in doc.get("reactions", [])),
                       key=lambda r: r.index)

    table = SpeciesTable(
        species=species,
        reactions=reactions,
        refractory=_parse_material("refractory", materials["refractory"]),
        shell=_parse_material("shell", materials["shell"]),
        T0=float(doc.get("meta", {}).get("temperature_standard_K",
                                         T_STANDARD)),
    )
    _validate(table)
    return table
