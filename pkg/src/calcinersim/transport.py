"""Transport correlations: velocity, viscosity, conductivity, heat transfer.

Pure-gas viscosity uses a Sutherland law fitted exactly through the two
tabulated reference points; gas conductivity interpolates linearly between
its two points (clamped outside). Mixtures combine with Wilke's rule
(viscosity) and the Wassiljewa/Mason-Saxena form (conductivity), suspended
solids enter through the extended Einstein viscosity and the serial
conductivity. Convection uses the Gnielinski Nusselt correlation with a
laminar floor, radiation a weighted-sum-of-grey-gases emissivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import STEFAN_BOLTZMANN as SIGMA
from .species import GASES, N_SOLIDS, SpeciesTable

MU_FLOOR = 1e-7        # Pa s; the steam two-point fit crosses zero below ~295 K
DP_DZ_REG = 1e-6       # Pa/m; below this the velocity law is linearized


# ---------------------------------------------------------------------------
# pure-component properties


def sutherland_fit(refs) -> tuple[float, float, float]:
    """Fit (mu0, T_ref, S_mu) through two (T, mu) points.

    The law mu(T) = mu0 (T/T_ref)^1.5 (T_ref+S)/(T+S) passes exactly through
    both points; T_ref is the first reference temperature. Raises ValueError
    when the implied S_mu <= -T_ref (pole at or above the reference point).
    """
    (T1, mu1), (T2, mu2) = refs
    c = (mu2 / mu1) * (T1 / T2) ** 1.5
    if c == 1.0:
        raise ValueError("degenerate viscosity references")
    S = (c * T2 - T1) / (1.0 - c)
    if S <= -T1:
        raise ValueError(
            f"non-bracketing Sutherland fit: S_mu = {S:.1f} K <= -T_ref")
    return mu1, T1, S


def sutherland_viscosity(fit, T):
    """Evaluate a Sutherland fit at T [Pa s]."""
    mu0, T0, S = fit
    return mu0 * (np.asarray(T) / T0) ** 1.5 * (T0 + S) / (np.asarray(T) + S)


class GasTransport:
    """Vectorized per-gas viscosity and conductivity from a species table."""

    def __init__(self, table: SpeciesTable):
        fits = [sutherland_fit(table.species[g].viscosity_refs)
                for g in GASES]
        self.mu0 = np.array([f[0] for f in fits])
        self.T_ref = np.array([f[1] for f in fits])
        self.S_mu = np.array([f[2] for f in fits])
        refs = [table.species[g].conductivity_refs for g in GASES]
        self.kT1 = np.array([r[0][0] for r in refs])
        self.k1 = np.array([r[0][1] for r in refs])
        self.kT2 = np.array([r[1][0] for r in refs])
        self.k2 = np.array([r[1][1] for r in refs])
        self.M_gas = table.molar_mass[N_SOLIDS:]

    def viscosity(self, T):
        """mu_i(T), shape (..., 7) [Pa s], floored at MU_FLOOR."""
        T = np.asarray(T, dtype=float)[..., None]
        mu = (self.mu0 * (T / self.T_ref) ** 1.5
              * (self.T_ref + self.S_mu) / (T + self.S_mu))
        return np.maximum(mu, MU_FLOOR)

    def conductivity(self, T):
        """k_i(T), shape (..., 7) [W/(m K)]: linear in T, clamped."""
        T = np.asarray(T, dtype=float)[..., None]
        w = (T - self.kT1) / (self.kT2 - self.kT1)
        w = np.clip(w, 0.0, 1.0)
        return self.k1 + w * (self.k2 - self.k1)


# ---------------------------------------------------------------------------
# mixtures


@dataclass
class MixtureProps:
    """Mixture transport properties; arrays share the leading shape."""

    mu_g: np.ndarray      # gas viscosity [Pa s]
    mu_m: np.ndarray      # suspension viscosity [Pa s]
    k_g: np.ndarray       # gas conductivity [W/(m K)]
    k_m: np.ndarray       # serial gas+solids conductivity [W/(m K)]
    rho_m: np.ndarray     # mixture density sum(M C) [kg/m^3]
    phi: np.ndarray       # solid volume fraction
    cp_vol: np.ndarray    # volumetric heat capacity sum(C cp) [J/(m^3 K)]
    cp_mass: np.ndarray   # specific heat capacity [J/(kg K)]


def wilke_phi(mu, M):
    """Wilke interaction factors phi_ij, shape (..., 7, 7)."""
    mu_i = mu[..., :, None]
    mu_j = mu[..., None, :]
    M_i = M[:, None]
    M_j = M[None, :]
    num = (1.0 + np.sqrt(mu_i / mu_j) * (M_j / M_i) ** 0.25) ** 2
    den = np.sqrt(8.0 * (1.0 + M_i / M_j))
    return num / den


def mixture_transport(C_g, C_s, T, P, table: SpeciesTable,
                      gas: GasTransport) -> MixtureProps:
    """Mixture transport properties of one or more segments.

    ``C_g`` (..., 7) and ``C_s`` (..., 10) are mol per segment volume.
    Requires gas in every entry (sum C_g > 0) and a solid volume fraction
    below the Einstein-form pole at 0.5.
    """
    C_g = np.asarray(C_g, dtype=float)
    C_s = np.asarray(C_s, dtype=float)
    total_g = np.sum(C_g, axis=-1)
    if np.any(total_g <= 0.0):
        raise ValueError("mixture_transport requires gas in every segment")
    x = C_g / total_g[..., None]

    mu_i = gas.viscosity(T)
    k_i = gas.conductivity(T)
    phi_ij = wilke_phi(mu_i, gas.M_gas)
    denom = np.einsum("...j,...ij->...i", x, phi_ij)
    mu_g = np.sum(x * mu_i / denom, axis=-1)
    k_g = np.sum(x * k_i / denom, axis=-1)

    # solid volume fraction; the closure V_g + V_s = V makes 1-phi the gas
    # volume fraction used by the serial-layer conductivity
    molar_vol_s = table.molar_mass[:N_SOLIDS] / table.solid_density
    phi = C_s @ molar_vol_s
    if np.any(phi >= 0.5):
        raise ValueError(
            "solid volume fraction >= 0.5: outside the suspension "
            "viscosity model domain")
    mu_m = mu_g * (1.0 + phi / 2.0) / (1.0 - 2.0 * phi)
    frac_s = C_s * molar_vol_s
    k_inv = (1.0 - phi) / k_g + np.sum(
        frac_s / table.solid_conductivity, axis=-1)
    k_m = 1.0 / k_inv

    rho_m = np.concatenate([C_s, C_g], axis=-1) @ table.molar_mass
    cp = table.cp(T)
    cp_vol = np.sum(C_s * cp[..., :N_SOLIDS], axis=-1) + np.sum(
        C_g * cp[..., N_SOLIDS:], axis=-1)
    cp_mass = cp_vol / np.maximum(rho_m, 1e-300)
    return MixtureProps(mu_g=mu_g, mu_m=mu_m, k_g=k_g, k_m=k_m, rho_m=rho_m,
                        phi=phi, cp_vol=cp_vol, cp_mass=cp_mass)


# ---------------------------------------------------------------------------
# velocity


def velocity_darcy_weisbach(dp, dz, mu_m, rho_m, D_H, eps_reg=DP_DZ_REG):
    """Signed mixture velocity [m/s] from the pressure difference dp [Pa].

    v = (2/0.316 (D_H^5/(mu rho^3))^(1/4) |dp|/dz)^(4/7) sgn(-dp/dz).
    The 4/7 power has infinite slope at dp = 0, so below ``eps_reg`` [Pa/m]
    the law is replaced by a linear ramp that matches the value at the
    threshold.
    """
    dp = np.asarray(dp, dtype=float)
    coef = (2.0 / 0.316) * (D_H ** 5 / (mu_m * rho_m ** 3)) ** 0.25
    s = np.abs(dp) / dz
    v_reg = (coef * eps_reg) ** (4.0 / 7.0)
    v_mag = np.where(s >= eps_reg,
                     (coef * np.maximum(s, eps_reg)) ** (4.0 / 7.0),
                     v_reg * (s / eps_reg))
    return v_mag * np.sign(-dp)


# ---------------------------------------------------------------------------
# convective heat transfer


def friction_factor(Re):
    """Darcy friction factor (0.79 ln Re - 1.64)^-2 for turbulent flow."""
    Re = np.asarray(Re, dtype=float)
    return (0.79 * np.log(np.maximum(Re, 1.001)) - 1.64) ** -2


RE_LAMINAR = 2300.0
RE_TURBULENT = 3000.0
NU_LAMINAR = 3.66


def gnielinski_nusselt(Re, Pr):
    """Nusselt number: Gnielinski above Re=3000, Nu=3.66 below Re=2300,
    linear blend in between (keeps Nu continuous through startup flows)."""
    Re = np.asarray(Re, dtype=float)
    Pr = np.asarray(Pr, dtype=float)
    Re_t = np.maximum(Re, RE_TURBULENT)
    f = friction_factor(Re_t)
    f8 = f / 8.0
    nu_turb = (f8 * (Re_t - 1000.0) * Pr
               / (1.0 + 12.7 * np.sqrt(f8) * (Pr ** (2.0 / 3.0) - 1.0)))
    w = np.clip((Re - RE_LAMINAR) / (RE_TURBULENT - RE_LAMINAR), 0.0, 1.0)
    return (1.0 - w) * NU_LAMINAR + w * nu_turb


def overall_heat_transfer(films, layers):
    """Overall A*beta [W/K] of a series surface/conduction network.

    ``films`` is a list of (A, beta) convection ends, ``layers`` a list of
    (dx, k, A) conduction layers; for curved walls dx = ln(r_out/r_in)*r_in
    with A evaluated at r_in. All entries may be arrays.
    """
    resistance = 0.0
    for A, beta in films:
        resistance = resistance + 1.0 / (A * beta)
    for dx, k, A in layers:
        resistance = resistance + dx / (k * A)
    return 1.0 / resistance


def curved_width(r_in, r_out):
    """Conduction width of a curved layer: ln(r_out/r_in) * r_in."""
    return np.log(r_out / r_in) * r_in


# ---------------------------------------------------------------------------
# radiation


@dataclass(frozen=True)
class WSGGModel:
    """Weighted-sum-of-grey-gases emissivity over CO2/H2O partial pressure.

    eps_g = sum_j a_j(T) (1 - exp(-kappa_j p L)) with p = p_CO2 + p_H2O in
    bar, L the mean beam length in m and a_j = w0_j + w1_j (T / 1000 K),
    clipped to [0, 1]. One transparent window plus three grey gases.
    """

    kappa: tuple = (0.0, 0.7, 7.0, 80.0)          # 1/(bar m)
    weight_c0: tuple = (0.52, 0.23, 0.16, 0.09)
    weight_c1: tuple = (0.11, -0.04, -0.035, -0.035)
    beam_length_factor: float = 0.95              # L = factor * D_H

    def emissivity(self, T, p_bar, L):
        """Gas emissivity for temperature T [K], p [bar], beam length L [m]."""
        T = np.asarray(T, dtype=float)
        t = np.clip(T / 1000.0, 0.3, 2.5)[..., None]
        a = np.clip(np.asarray(self.weight_c0)
                    + np.asarray(self.weight_c1) * t, 0.0, 1.0)
        pl = (np.asarray(p_bar) * np.asarray(L))[..., None]
        return np.sum(a * (1.0 - np.exp(-np.asarray(self.kappa) * pl)),
                      axis=-1)


def mixture_emissivity(eps_s, eps_g):
    """Total emissivity of the solid-gas mixture with overlap term."""
    return eps_s + eps_g - eps_s * eps_g


def radiation_exchange(A, eps_hot, T_hot, eps_cold, T_cold):
    """sigma A (eps_hot T_hot^4 - eps_cold T_cold^4)  [W]."""
    return SIGMA * A * (eps_hot * np.asarray(T_hot) ** 4
                        - eps_cold * np.asarray(T_cold) ** 4)


# ---------------------------------------------------------------------------
# face fluxes


def upwind_face_flows(v, A, q_lower, q_upper):
    """Advective face flows A*v*q_donor; donor side follows sign(v).

    ``q_*`` may carry a trailing species axis; v and A are per-face.
    """
    v = np.asarray(v, dtype=float)
    A = np.asarray(A, dtype=float)
    q_lower = np.asarray(q_lower, dtype=float)
    q_upper = np.asarray(q_upper, dtype=float)
    if q_lower.ndim == v.ndim + 1:
        donor = np.where(v[..., None] >= 0.0, q_lower, q_upper)
        return (A * v)[..., None] * donor
    donor = np.where(v >= 0.0, q_lower, q_upper)
    return A * v * donor


def fourier_face_flows(k_face, A_face, T_lower, T_upper, dz):
    """Conductive face flows -k A dT/dz  [W], central difference."""
    return -k_face * A_face * (np.asarray(T_upper) - np.asarray(T_lower)) / dz


def diffusive_face_flows(D, A_face, C_lower, C_upper, dz):
    """Diffusive face flows -D A dC/dz per species; D may be scalar or (17,)."""
    grad = (np.asarray(C_upper) - np.asarray(C_lower)) / dz
    return -(D * grad) * np.asarray(A_face)[..., None]
