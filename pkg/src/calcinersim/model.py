"""Finite-volume assembly of the semi-explicit index-1 DAE.

Differential states per segment: solid and gas concentrations (mol per m^3
of segment volume) and the internal-energy densities of the mixture, the
refractory and the shell. Algebraic unknowns per segment: T_c, T_r, T_w and
P. The differential residual encodes upwind advection-reaction mass
balances and the three energy balances; the algebraic residual encodes the
volume closure and the internal-energy/temperature links.

Fluxes are assembled as total face flows (mol/s, W) shared between
neighbouring segments, so summing any balance over segments telescopes to
the boundary terms exactly: total moles and energy are conserved to
round-off per evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import GAS_CONSTANT as R
from .constants import STEFAN_BOLTZMANN as SIGMA
from .geometry import SegmentGeometry
from .kinetics import KineticsModel
from .species import ALL_SPECIES, GASES, N_SOLIDS, SPECIES_INDEX, SpeciesTable
from .thermo import ThermoModel
from . import transport
from .transport import GasTransport, WSGGModel

U_REF = 1e6          # J/m^3, nondimensionalizes the energy residual rows
IDX_CO2 = GASES.index("CO2")
IDX_H2O = GASES.index("H2O")


@dataclass(frozen=True)
class Stream:
    """One inlet stream: name, temperature [K], molar rates [mol/s] (17,)."""

    name: str
    temperature: float
    molar_rates: np.ndarray

    @classmethod
    def from_mass_rates(cls, name: str, temperature: float,
                        mass_rates: dict, table: SpeciesTable) -> "Stream":
        rates = np.zeros(len(ALL_SPECIES))
        for species, kg_s in mass_rates.items():
            if species not in SPECIES_INDEX:
                raise ValueError(f"stream {name}: unknown species {species}")
            if kg_s < 0.0:
                raise ValueError(f"stream {name}: negative rate for {species}")
            i = SPECIES_INDEX[species]
            rates[i] = kg_s / table.molar_mass[i]
        if temperature <= 0.0:
            raise ValueError(f"stream {name}: temperature must be positive")
        rates.setflags(write=False)
        return cls(name=name, temperature=temperature, molar_rates=rates)


@dataclass(frozen=True)
class BoundarySpec:
    """Inlet streams, outlet pressure and ambient conditions."""

    streams: tuple
    outlet_pressure: float     # Pa, anchors the pressure profile at the top
    T_env: float               # K
    closed_top: bool = False   # True closes the outlet face (test scenarios)

    def validate(self):
        if self.outlet_pressure <= 0.0 or self.T_env <= 0.0:
            raise ValueError("outlet pressure and ambient T must be positive")
        return self


@dataclass
class ModelFields:
    """Everything one residual evaluation produces (diagnostics included)."""

    v_faces: np.ndarray          # (n_v+1,) signed face velocities [m/s]
    species_flows: np.ndarray    # (n_v+1, 17) molar face flows [mol/s]
    enthalpy_flows: np.ndarray   # (n_v+1,) advected enthalpy [W]
    conduction_c: np.ndarray     # (n_v+1,) axial conduction, mixture [W]
    conduction_r: np.ndarray
    conduction_w: np.ndarray
    Q_cr_cv: np.ndarray          # (n_v,) exchange terms [W]
    Q_cr_rad: np.ndarray
    Q_rw_cv: np.ndarray
    Q_we_cv: np.ndarray
    Q_we_rad: np.ndarray
    beta_cr: np.ndarray          # (n_v,) film coefficient [W/(m^2 K)]
    eps_g: np.ndarray
    eps_c: np.ndarray
    rates: np.ndarray            # (n_v, 11) reaction extents [mol/(m^3 s)]
    production: np.ndarray       # (n_v, 17) net production [mol/(m^3 s)]
    props: transport.MixtureProps
    f: np.ndarray                # (n_v, 20) differential rhs
    g: np.ndarray                # (n_v, 4) scaled algebraic residual


class CalcinerModel:
    """Residual assembly over a fixed geometry/boundary/property set."""

    # per-segment layout: 10 solids, 7 gases, U_c, U_r, U_w | T_c, T_r, T_w, P
    n_diff = 20
    n_alg = 4

    def __init__(self, geom: SegmentGeometry, table: SpeciesTable,
                 bc: BoundarySpec, calibration=None,
                 wsgg: WSGGModel | None = None,
                 exterior_htc: float = 5.0, eps_env: float = 1.0,
                 diffusion: float = 0.0):
        self.geom = geom
        self.table = table
        self.bc = bc.validate()
        self.thermo = ThermoModel(table)
        self.gas = GasTransport(table)
        self.kinetics = KineticsModel(table, calibration)
        self.wsgg = wsgg or WSGGModel()
        self.exterior_htc = float(exterior_htc)
        self.eps_env = float(eps_env)
        self.diffusion = float(diffusion)
        self.n_v = geom.n_v

        spec = geom.spec
        k_r = table.refractory.thermal_conductivity
        k_w = table.shell.thermal_conductivity
        r_m1 = 0.5 * (spec.r_c + spec.r_r)        # refractory mid radius
        r_m2 = 0.5 * (spec.r_r + spec.r_w)        # shell mid radius
        self._dx_cr = transport.curved_width(spec.r_c, r_m1)
        # node-to-node conduction networks that do not depend on the state
        self.Ab_rw = transport.overall_heat_transfer(
            films=[],
            layers=[(transport.curved_width(r_m1, spec.r_r), k_r, geom.A_rm),
                    (transport.curved_width(spec.r_r, r_m2), k_w, geom.A_rw)])
        if self.exterior_htc > 0.0:
            self.Ab_we = transport.overall_heat_transfer(
                films=[(geom.A_we, self.exterior_htc)],
                layers=[(transport.curved_width(r_m2, spec.r_w), k_w,
                         geom.A_wm)])
        else:
            self.Ab_we = np.zeros(self.n_v)
        self._k_refractory = k_r
        self._k_shell = k_w
        self.eps_s = table.solid_emissivity
        self.eps_r = table.refractory.emissivity
        self.eps_w = table.shell.emissivity

        # boundary sources enter segment 1
        self.inlet_molar = np.zeros(len(ALL_SPECIES))
        self.inlet_enthalpy = 0.0
        for s in self.bc.streams:
            self.inlet_molar = self.inlet_molar + s.molar_rates
            self.inlet_enthalpy += self.thermo.enthalpy(
                s.temperature, s.molar_rates)
        self.inlet_molar.setflags(write=False)

        # solver-facing metadata (scales for FD steps and residual rows)
        self.diff_typical = np.array([1.0] * 17 + [U_REF] * 3)
        self.alg_typical = np.array([1000.0, 1000.0, 1000.0, 1e5])
        self.diff_floor = np.array([1.0] * 17 + [1e4] * 3)

    # -- pieces -------------------------------------------------------------

    def split(self, x, y):
        x = np.asarray(x, dtype=float).reshape(self.n_v, self.n_diff)
        y = np.asarray(y, dtype=float).reshape(self.n_v, self.n_alg)
        return (x[:, :N_SOLIDS], x[:, N_SOLIDS:17], x[:, 17], x[:, 18],
                x[:, 19], y[:, 0], y[:, 1], y[:, 2], y[:, 3])

    def pressure_velocity_field(self, x, y):
        """Signed face velocities (n_v+1,); bottom face closed."""
        Cs, Cg, _, _, _, Tc, _, _, P = self.split(x, y)
        props = transport.mixture_transport(Cg, Cs, Tc, P, self.table,
                                            self.gas)
        return self._face_velocities(P, props)

    def _face_velocities(self, P, props):
        n = self.n_v
        geom = self.geom
        dp = np.empty(n)
        dp[:n - 1] = P[1:] - P[:-1]
        dp[n - 1] = self.bc.outlet_pressure - P[-1]
        mu_f = np.empty(n)
        rho_f = np.empty(n)
        D_f = np.empty(n)
        mu_f[:n - 1] = 0.5 * (props.mu_m[:-1] + props.mu_m[1:])
        rho_f[:n - 1] = 0.5 * (props.rho_m[:-1] + props.rho_m[1:])
        D_f[:n - 1] = 0.5 * (geom.D_H[:-1] + geom.D_H[1:])
        mu_f[n - 1] = props.mu_m[-1]
        rho_f[n - 1] = props.rho_m[-1]
        D_f[n - 1] = geom.D_H[-1]
        v = np.zeros(n + 1)
        v[1:] = transport.velocity_darcy_weisbach(dp, geom.dy, mu_f, rho_f,
                                                  D_f)
        if self.bc.closed_top:
            v[-1] = 0.0
        return v

    # -- full evaluation ------------------------------------------------------

    def evaluate(self, x, y) -> ModelFields:
        geom = self.geom
        n = self.n_v
        Cs, Cg, Uc, Ur, Uw, Tc, Tr, Tw, P = self.split(x, y)
        C_full = np.concatenate([Cs, Cg], axis=1)

        h_all = self.thermo.molar_enthalpy(Tc)            # (n, 17)
        props = transport.mixture_transport(Cg, Cs, Tc, P, self.table,
                                            self.gas)
        v = self._face_velocities(P, props)

        # advective face flows; the top face draws nothing on backflow
        C_up = np.vstack([C_full[1:], np.zeros(17)])
        h_up = np.vstack([h_all[1:], np.zeros(17)])
        flows = np.zeros((n + 1, 17))
        flows[1:] = transport.upwind_face_flows(v[1:], geom.A_flow[1:],
                                                C_full, C_up)
        donor_h = np.where(v[1:, None] >= 0.0, h_all, h_up)
        H_flow = np.zeros(n + 1)
        H_flow[1:] = np.sum(flows[1:] * donor_h, axis=1)
        if self.diffusion != 0.0 and n > 1:
            d = transport.diffusive_face_flows(
                self.diffusion, geom.A_flow[1:n], C_full[:-1], C_full[1:],
                geom.dy)
            flows[1:n] += d

        # axial conduction, zero across inlet/outlet faces
        Qc = np.zeros(n + 1)
        Qr = np.zeros(n + 1)
        Qw = np.zeros(n + 1)
        if n > 1:
            k_face = 0.5 * (props.k_m[:-1] + props.k_m[1:])
            Qc[1:n] = transport.fourier_face_flows(
                k_face, geom.A_flow[1:n], Tc[:-1], Tc[1:], geom.dy)
            Qr[1:n] = transport.fourier_face_flows(
                self._k_refractory, geom.A_xr[1:n], Tr[:-1], Tr[1:], geom.dy)
            Qw[1:n] = transport.fourier_face_flows(
                self._k_shell, geom.A_xw[1:n], Tw[:-1], Tw[1:], geom.dy)

        # interphase exchange
        v_cell = 0.5 * (v[:-1] + v[1:])
        Re = props.rho_m * np.abs(v_cell) * geom.D_H / props.mu_m
        Pr = props.cp_mass * props.mu_m / props.k_m
        Nu = transport.gnielinski_nusselt(Re, Pr)
        beta_cr = props.k_m / geom.D_H * Nu
        Ab_cr = transport.overall_heat_transfer(
            films=[(geom.A_c, beta_cr)],
            layers=[(self._dx_cr, self._k_refractory, geom.A_c)])
        Q_cr_cv = Ab_cr * (Tc - Tr)
        Q_rw_cv = self.Ab_rw * (Tr - Tw)
        Q_we_cv = self.Ab_we * (Tw - self.bc.T_env)

        total_g = np.sum(Cg, axis=1)
        p_rad = (Cg[:, IDX_CO2] + Cg[:, IDX_H2O]) / np.maximum(
            total_g, 1e-300) * P / 1e5                     # bar
        L = self.wsgg.beam_length_factor * geom.D_H
        eps_g = self.wsgg.emissivity(Tc, p_rad, L)
        eps_c = transport.mixture_emissivity(self.eps_s, eps_g)
        Q_cr_rad = transport.radiation_exchange(geom.A_c, eps_c, Tc,
                                                self.eps_r, Tr)
        Q_we_rad = transport.radiation_exchange(geom.A_we, self.eps_w, Tw,
                                                self.eps_env, self.bc.T_env)

        rates, production = self.kinetics.reaction_rates(Tc, P, C_full)

        # differential rhs
        f = np.empty((n, self.n_diff))
        V = geom.V
        f[:, :17] = (flows[:-1] - flows[1:]) / V[:, None] + production
        f[0, :17] += self.inlet_molar / V[0]
        Q_cr = Q_cr_rad + Q_cr_cv
        f[:, 17] = (H_flow[:-1] - H_flow[1:] + Qc[:-1] - Qc[1:]) / V - Q_cr / V
        f[0, 17] += self.inlet_enthalpy / V[0]
        f[:, 18] = (Qr[:-1] - Qr[1:] + Q_cr - Q_rw_cv) / geom.V_r
        f[:, 19] = (Qw[:-1] - Qw[1:] + Q_rw_cv - Q_we_rad
                    - Q_we_cv) / geom.V_w

        # algebraic residual (scaled)
        Vs_hat = self.thermo.solid_volume_fraction(Cs)
        Vg_hat = total_g * R * Tc / P
        u_c = np.sum(C_full * h_all, axis=1) - P * Vg_hat
        g = np.empty((n, self.n_alg))
        g[:, 0] = Vg_hat + Vs_hat - 1.0
        g[:, 1] = (Uc - u_c) / U_REF
        g[:, 2] = (Ur - self.thermo.refractory.energy_density(Tr)) / U_REF
        g[:, 3] = (Uw - self.thermo.shell.energy_density(Tw)) / U_REF

        return ModelFields(
            v_faces=v, species_flows=flows, enthalpy_flows=H_flow,
            conduction_c=Qc, conduction_r=Qr, conduction_w=Qw,
            Q_cr_cv=Q_cr_cv, Q_cr_rad=Q_cr_rad, Q_rw_cv=Q_rw_cv,
            Q_we_cv=Q_we_cv, Q_we_rad=Q_we_rad, beta_cr=beta_cr,
            eps_g=eps_g, eps_c=eps_c, rates=rates, production=production,
            props=props, f=f, g=g)

    # -- spec surface ----------------------------------------------------------

    def differential_rhs(self, x, y):
        """dx/dt, shape (n_v, 20)."""
        return self.evaluate(x, y).f

    def algebraic_residual(self, x, y):
        """Scaled algebraic residual g, shape (n_v, 4)."""
        Cs, Cg, Uc, Ur, Uw, Tc, Tr, Tw, P = self.split(x, y)
        Vs_hat = self.thermo.solid_volume_fraction(Cs)
        Vg_hat = np.sum(Cg, axis=1) * R * Tc / P
        u_c = self.thermo.mixture_internal_energy_density(Cs, Cg, Tc, P)
        g = np.empty((self.n_v, self.n_alg))
        g[:, 0] = Vg_hat + Vs_hat - 1.0
        g[:, 1] = (Uc - u_c) / U_REF
        g[:, 2] = (Ur - self.thermo.refractory.energy_density(Tr)) / U_REF
        g[:, 3] = (Uw - self.thermo.shell.energy_density(Tw)) / U_REF
        return g

    def residuals(self, x, y):
        fields = self.evaluate(x, y)
        return fields.f, fields.g

    # -- construction and bookkeeping -------------------------------------------

    def state_from_profile(self, Tc, Tr, Tw, C_s, C_g):
        """Build a consistent (x, y) pair by forward evaluation.

        Concentrations are per segment volume; P follows from the volume
        closure, U from the thermo relations, so g = 0 to round-off.
        """
        n = self.n_v
        Tc = np.broadcast_to(np.asarray(Tc, float), (n,)).copy()
        Tr = np.broadcast_to(np.asarray(Tr, float), (n,)).copy()
        Tw = np.broadcast_to(np.asarray(Tw, float), (n,)).copy()
        Cs = np.broadcast_to(np.asarray(C_s, float), (n, N_SOLIDS)).copy()
        Cg = np.broadcast_to(np.asarray(C_g, float), (n, 7)).copy()
        Vs = self.thermo.solid_volume_fraction(Cs)
        if np.any(Vs >= 1.0):
            raise ValueError("solids exceed the segment volume")
        total_g = np.sum(Cg, axis=1)
        if np.any(total_g <= 0.0):
            raise ValueError("every segment needs gas for the volume closure")
        P = total_g * R * Tc / (1.0 - Vs)
        x = np.empty((n, self.n_diff))
        x[:, :N_SOLIDS] = Cs
        x[:, N_SOLIDS:17] = Cg
        x[:, 17] = self.thermo.mixture_internal_energy_density(Cs, Cg, Tc, P)
        x[:, 18] = self.thermo.refractory.energy_density(Tr)
        x[:, 19] = self.thermo.shell.energy_density(Tw)
        y = np.stack([Tc, Tr, Tw, P], axis=1)
        return x, y

    def gas_fill_state(self, T: float, mole_fractions: dict,
                       pressure: float | None = None):
        """Uniform solid-free gas fill at temperature T and outlet pressure."""
        P = self.bc.outlet_pressure if pressure is None else pressure
        x_g = np.zeros(7)
        for name, frac in mole_fractions.items():
            x_g[GASES.index(name)] = float(frac)
        if abs(np.sum(x_g) - 1.0) > 1e-9:
            raise ValueError("initial gas mole fractions must sum to 1")
        Cg = x_g * P / (R * T)
        return self.state_from_profile(T, T, T, np.zeros(N_SOLIDS), Cg)

    def species_balance(self, x, y, fields: ModelFields | None = None):
        """Per-species bookkeeping of one evaluation (all in mol/s)."""
        if fields is None:
            fields = self.evaluate(x, y)
        V = self.geom.V
        accumulation = fields.f[:, :17] * V[:, None]
        return {
            "d_dt_total": np.sum(accumulation, axis=0),
            "inlet": self.inlet_molar.copy(),
            "outlet": fields.species_flows[-1].copy(),
            "reaction": np.sum(fields.production * V[:, None], axis=0),
        }

    def energy_balance(self, x, y, fields: ModelFields | None = None):
        """Total-energy bookkeeping of one evaluation (all in W)."""
        if fields is None:
            fields = self.evaluate(x, y)
        geom = self.geom
        d_dt = float(fields.f[:, 17] @ geom.V + fields.f[:, 18] @ geom.V_r
                     + fields.f[:, 19] @ geom.V_w)
        return {
            "d_dt_total": d_dt,
            "inlet": self.inlet_enthalpy,
            "outlet": float(fields.enthalpy_flows[-1]),
            "wall_loss": float(np.sum(fields.Q_we_cv + fields.Q_we_rad)),
        }
