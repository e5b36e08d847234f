"""Enthalpy, volume and internal-energy models for all phases.

Enthalpy is H(T, n) = sum_i n_i (dHf_i + int_{T0}^{T} cp_i dtau), volume is
incompressible for solids and ideal for gases; both are homogeneous of
order 1 in the mole vector, so densities follow by evaluating them on
concentration vectors. Heat-capacity integrals are closed-form (polynomial
and five-term expressions), keeping everything smooth for the Newton solver.
"""

from __future__ import annotations

import numpy as np

from .constants import GAS_CONSTANT as R
from .species import N_SOLIDS, SpeciesTable, WallMaterial

T_MIN = 200.0     # K, hard validity window for temperature inversion
T_MAX = 3000.0


class TemperatureInversionError(RuntimeError):
    """Energy density outside the range attainable for T in [200, 3000] K."""


class ThermoModel:
    """Evaluates H, V, U and their temperature derivatives for one table."""

    def __init__(self, table: SpeciesTable):
        self.table = table
        self.M = table.molar_mass
        # per-mole solid volume M_i/rho_i [m^3/mol], solids slice
        self.solid_molar_volume = (
            table.molar_mass[:N_SOLIDS] / table.solid_density)
        self.refractory = _WallThermo(table.refractory, table.T0)
        self.shell = _WallThermo(table.shell, table.T0)

    # -- molar quantities ----------------------------------------------------

    def molar_enthalpy(self, T):
        """h_i(T) = dHf_i + int cp_i, shape (..., 17) [J/mol]."""
        return self.table.formation_enthalpy + self.table.cp_integral(T)

    def enthalpy(self, T, n) -> float:
        """H(T, n) [J] for a mole vector over the full species order.

        Pressure does not enter (ideal gas / incompressible solids).
        """
        n = np.asarray(n, dtype=float)
        return float(n @ self.molar_enthalpy(T))

    def volume(self, T, P, n) -> float:
        """V(T, P, n) [m^3]; solids n*M/rho, gases n*R*T/P."""
        n = np.asarray(n, dtype=float)
        v_solid = float(n[:N_SOLIDS] @ self.solid_molar_volume)
        v_gas = float(np.sum(n[N_SOLIDS:]) * R * T / P)
        return v_solid + v_gas

    def heat_of_reaction(self, index: int, T: float | None = None) -> float:
        """dH of reaction ``index`` (1-based) at T [J/mol extent]."""
        nu_row = self.table.nu[index - 1]
        if T is None:
            T = self.table.T0
        return float(nu_row @ self.molar_enthalpy(T))

    # -- densities (per m^3 of segment volume) --------------------------------

    def solid_volume_fraction(self, C_s):
        """V_hat_s from solid concentrations (..., 10) [mol/m^3]."""
        return np.asarray(C_s) @ self.solid_molar_volume

    def gas_volume_fraction(self, C_g, T, P):
        """V_hat_g = sum C_g R T / P."""
        return np.sum(np.asarray(C_g), axis=-1) * R * np.asarray(T) / P

    def mixture_internal_energy_density(self, C_s, C_g, T, P):
        """U_hat_c = H_hat_s + H_hat_g - P V_hat_g  [J/m^3].

        The P V_hat_g term cancels the gas pressure-volume work, so the
        result is independent of P for an ideal gas; P is accepted to match
        the defining relation.
        """
        h = self.molar_enthalpy(T)
        h_s = np.sum(np.asarray(C_s) * h[..., :N_SOLIDS], axis=-1)
        h_g = np.sum(np.asarray(C_g) * h[..., N_SOLIDS:], axis=-1)
        pv = self.gas_volume_fraction(C_g, T, P) * P
        return h_s + h_g - pv

    def mixture_du_dT(self, C_s, C_g, T):
        """d U_hat_c / d T_c  [J/(m^3 K)]; positive whenever cp > 0."""
        cp = self.table.cp(T)
        cps = np.sum(np.asarray(C_s) * cp[..., :N_SOLIDS], axis=-1)
        cpg = np.sum(np.asarray(C_g) * (cp[..., N_SOLIDS:] - R), axis=-1)
        return cps + cpg

    # -- inversion -------------------------------------------------------------

    def invert_temperature(self, u_target: float, C_s=None, C_g=None,
                           phase: str = "mixture", tol: float = 1e-10) -> float:
        """Solve U_hat(T) = u_target for T on [200, 3000] K.

        Safeguarded Newton (bisection fallback); converges to |dT| <= tol.
        Raises TemperatureInversionError when u_target is not bracketed.
        """
        if phase == "mixture":
            C_s = np.zeros(10) if C_s is None else np.asarray(C_s, float)
            C_g = np.zeros(7) if C_g is None else np.asarray(C_g, float)
            if np.all(C_s == 0.0) and np.all(C_g == 0.0):
                raise TemperatureInversionError(
                    "empty composition has no temperature")

            def f(T):
                return self.mixture_internal_energy_density(
                    C_s, C_g, T, 101325.0) - u_target

            def df(T):
                return self.mixture_du_dT(C_s, C_g, T)
        elif phase in ("refractory", "shell"):
            wall = self.refractory if phase == "refractory" else self.shell

            def f(T):
                return wall.energy_density(T) - u_target

            def df(T):
                return wall.du_dT(T)
        else:
            raise ValueError(f"unknown phase {phase!r}")
        return _safeguarded_newton(f, df, phase, tol)


class _WallThermo:
    """Energy density of a single-pseudo-species wall phase."""

    def __init__(self, material: WallMaterial, T0: float):
        self.material = material
        self.conc = material.molar_concentration   # mol/m^3
        self.c0, self.c1, self.c2 = material.cp_coeffs
        self.T0 = T0

    def cp_molar(self, T):
        return self.c0 + self.c1 * T + self.c2 * T * T

    def energy_density(self, T):
        """U_hat = H_hat [J/m^3]; formation enthalpy taken as 0."""
        T = np.asarray(T, dtype=float)
        T0 = self.T0
        integral = (self.c0 * (T - T0)
                    + self.c1 / 2.0 * (T * T - T0 * T0)
                    + self.c2 / 3.0 * (T ** 3 - T0 ** 3))
        return self.conc * integral

    def du_dT(self, T):
        return self.conc * self.cp_molar(T)


def _safeguarded_newton(f, df, what: str, tol: float) -> float:
    lo, hi = T_MIN, T_MAX
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise TemperatureInversionError(
            f"{what}: energy density not attainable for T in "
            f"[{T_MIN:.0f}, {T_MAX:.0f}] K (residuals {f_lo:.3e}, {f_hi:.3e})")
    T = 0.5 * (lo + hi)
    for _ in range(200):
        fT = f(T)
        if fT > 0.0:
            hi = T
        else:
            lo = T
        dfT = df(T)
        T_new = T - fT / dfT if dfT > 0.0 else 0.5 * (lo + hi)
        if not (lo <= T_new <= hi):
            T_new = 0.5 * (lo + hi)
        if abs(T_new - T) <= tol:
            return T_new
        T = T_new
    return T
