"""Reaction rates of the 11-reaction network.

Every rate follows r = factor * k0 * T^n * exp(-E_A/(R T)) * prod_l P_l^beta
* prod_l C_l^alpha with concentrations in mol/L and partial pressures (gas
species only) in Pa. The tabulated pre-exponentials carry mixed output
units; each rate is converted to mol reaction extent/(m^3 s) according to
its unit tag (see species.ReactionSpec). Production rates are R = nu^T r.
"""

from __future__ import annotations

import numpy as np

from .constants import GAS_CONSTANT as R
from .species import N_SOLIDS, SPECIES_INDEX, SpeciesTable

EPS_HALF_ORDER = 1e-12    # mol/L shift bounding d(C^0.5)/dC at C = 0
NEGATIVE_C_TOL = 1e-6     # mol/m^3; worse than this is a hard error


class KineticsModel:
    """Rate evaluation for one species table and one calibration set."""

    def __init__(self, table: SpeciesTable, calibration=None):
        self.table = table
        self.nu = table.nu
        reactions = table.reactions
        factors = np.ones(len(reactions))
        if calibration:
            for idx, value in calibration.items():
                factors[int(idx) - 1] = float(value)
        self.factors = factors
        self.k0 = np.array([r.k0 for r in reactions])
        self.n_exp = np.array([r.n for r in reactions])
        self.E_A = np.array([r.activation_energy for r in reactions])
        # per-reaction participant lists: (species index, exponent)
        self.alpha_terms = [
            [(i, float(r.alpha[i])) for i in np.nonzero(r.alpha)[0]]
            for r in reactions]
        self.beta_terms = [
            [(i - N_SOLIDS, float(r.beta[i])) for i in np.nonzero(r.beta)[0]]
            for r in reactions]
        self.unit = [r.rate_unit for r in reactions]
        self.ref_idx = np.array(
            [SPECIES_INDEX[r.reference_species] for r in reactions])
        self.ref_mass = table.molar_mass[self.ref_idx]

    def rate_constants(self, T):
        """k_j(T) = factor * k0 * T^n * exp(-E_A/(RT)), shape (..., 11)."""
        T = np.asarray(T, dtype=float)[..., None]
        return (self.factors * self.k0 * T ** self.n_exp
                * np.exp(-self.E_A / (R * T)))

    def rate_constant(self, index: int, T: float) -> float:
        """Rate constant of one reaction (1-based index)."""
        return float(self.rate_constants(T)[..., index - 1])

    def reaction_rates(self, T, P, C):
        """Reaction extents r (..., 11) and production rates R (..., 17).

        ``C`` is the full concentration vector in mol/m^3. Concentrations
        more negative than -1e-6 mol/m^3 are a hard error; small negative
        excursions clamp to zero so rates stay C^1 near the axis.
        """
        C = np.asarray(C, dtype=float)
        if np.any(C < -NEGATIVE_C_TOL):
            worst = float(np.min(C))
            raise ValueError(
                f"negative concentration {worst:.3e} mol/m^3 passed to "
                "kinetics; the integrator must prevent this")
        C_pos = np.maximum(C, 0.0)
        C_molL = C_pos * 1e-3
        total_g = np.sum(C_pos[..., N_SOLIDS:], axis=-1)
        # mole fractions of the gas phase; zero gas means zero partial
        # pressures (reactions needing them stall, as they should)
        safe_total = np.where(total_g > 0.0, total_g, 1.0)
        p_partial = (C_pos[..., N_SOLIDS:] / safe_total[..., None]
                     * np.asarray(P)[..., None])
        p_partial = np.where(total_g[..., None] > 0.0, p_partial, 0.0)

        k = self.rate_constants(T)
        r = np.empty_like(k)
        for j in range(len(self.k0)):
            term = k[..., j]
            for i, a in self.alpha_terms[j]:
                c = C_molL[..., i]
                if a == 1.0:
                    term = term * c
                elif a == 0.5:
                    term = term * c / np.sqrt(c + EPS_HALF_ORDER)
                else:
                    term = term * c ** a
            for gi, b in self.beta_terms[j]:
                term = term * p_partial[..., gi] ** b
            unit = self.unit[j]
            if unit == "kg_m3_s":
                term = term / self.ref_mass[j]
            elif unit == "per_s":
                term = term * C_pos[..., self.ref_idx[j]]
            r[..., j] = term
        return r, r @ self.nu
