"""Implicit-Euler integrator for the semi-explicit index-1 DAE.

Each step solves the coupled system

    (x' - x - dt f(x', y')) / s_x = 0,      g(x', y') = 0

with a damped Newton iteration on the interleaved per-segment unknowns.
The Jacobian is a finite-difference approximation assembled with a 3-color
scheme that exploits the block-tridiagonal segment coupling; it is
refreshed at the start of every step and within a step on stall. Steps are
rejected (and dt halved) on Newton failure or negative concentrations; dt
grows by 1.5x after repeated successes. Everything is evaluated in a fixed
order, so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .thermo import TemperatureInversionError

FD_EPS = 1e-7          # relative finite-difference perturbation
ARMIJO = 1e-4
NEGATIVE_STATE_TOL = 1e-9   # mol/m^3 allowed below zero after a step


class SolverFailure(RuntimeError):
    """Integration failed; carries a diagnostics dict."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class SolverConfig:
    """Time stepping and Newton settings."""

    dt_init: float = 0.05        # s
    dt_min: float = 1e-7
    dt_max: float = 30.0
    dt_growth: float = 1.5
    newton_tol: float = 1e-10    # scaled residual inf-norm
    newton_max_iter: int = 20
    algebraic_tol: float = 1e-8
    steady_state_tol: float = 1e-5   # 1/s, scaled |dx/dt|
    t_max_steady: float = 7200.0     # s, cap for run-to-steady-state
    jacobian_mode: str = "colored-fd"    # or "dense-fd"
    max_damping: int = 8
    jacobian_refresh: int = 5

    def validate(self):
        if not (0.0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        for name in ("newton_tol", "algebraic_tol", "steady_state_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.dt_growth < 1.0:
            raise ValueError("dt_growth must be >= 1")
        if self.jacobian_mode not in ("colored-fd", "dense-fd"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")
        return self


@dataclass
class Trajectory:
    """Recorded snapshots plus integration statistics."""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)      # (x, y) copies
    steady: bool = False
    t_settle: float | None = None
    stats: dict = field(default_factory=dict)

    def append(self, t, x, y):
        self.times.append(t)
        self.states.append((x.copy(), y.copy()))

    @property
    def final(self):
        return self.times[-1], self.states[-1][0], self.states[-1][1]


class DaeIntegrator:
    """Integrates any model exposing the block-structured residual protocol.

    Required model attributes: n_v, n_diff, n_alg, diff_typical (n_diff,),
    alg_typical (n_alg,), diff_floor (n_diff,) and a method
    residuals(x, y) -> (f, g) with shapes (n_v, n_diff), (n_v, n_alg).
    Segment coupling must be at most nearest-neighbour (block tridiagonal).
    """

    def __init__(self, model, config: SolverConfig | None = None):
        self.model = model
        self.config = (config or SolverConfig()).validate()
        self.n_seg = model.n_v
        self.nd = model.n_diff
        self.na = model.n_alg
        self.nb = self.nd + self.na
        self.n = self.n_seg * self.nb
        self.typical = np.tile(
            np.concatenate([model.diff_typical, model.alg_typical]),
            self.n_seg)
        self._diff_cols = (np.arange(self.n).reshape(self.n_seg, self.nb)
                           [:, :self.nd])

    # -- packing ---------------------------------------------------------------

    def pack(self, x, y):
        z = np.empty((self.n_seg, self.nb))
        z[:, :self.nd] = x
        z[:, self.nd:] = y
        return z.ravel()

    def unpack(self, z):
        z = z.reshape(self.n_seg, self.nb)
        return z[:, :self.nd], z[:, self.nd:]

    # -- residual ---------------------------------------------------------------

    def residual(self, z, x_old, dt, s_diff):
        x, y = self.unpack(z)
        with np.errstate(all="ignore"):
            f, g = self.model.residuals(x, y)
        F = np.empty((self.n_seg, self.nb))
        F[:, :self.nd] = (x - x_old - dt * f) / s_diff
        F[:, self.nd:] = g
        return F.ravel()

    def _diff_scale(self, x_old):
        return np.maximum(np.abs(x_old), self.model.diff_typical)

    # -- jacobian ----------------------------------------------------------------

    def jacobian(self, z, x_old, dt, s_diff, F0):
        J = np.zeros((self.n, self.n))
        stride = 3 if (self.config.jacobian_mode == "colored-fd"
                       and self.n_seg >= 3) else self.n_seg
        if stride < 1:
            stride = 1
        for m in range(stride):
            segs = np.arange(m, self.n_seg, stride)
            for j in range(self.nb):
                cols = segs * self.nb + j
                delta = FD_EPS * (np.abs(z[cols]) + self.typical[cols])
                zp = z.copy()
                zp[cols] += delta
                Fp = self.residual(zp, x_old, dt, s_diff)
                dF = Fp - F0
                for seg, col, d in zip(segs, cols, delta):
                    lo = max(0, seg - 1) * self.nb
                    hi = min(self.n_seg, seg + 2) * self.nb
                    J[lo:hi, col] = dF[lo:hi] / d
        return J

    def jacobian_check(self, z, x_old, dt, n_probes=5, seed=0):
        """Max relative error of J @ d vs a directional finite difference."""
        s_diff = self._diff_scale(x_old)
        F0 = self.residual(z, x_old, dt, s_diff)
        J = self.jacobian(z, x_old, dt, s_diff, F0)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_probes):
            d = rng.standard_normal(self.n) * self.typical
            eps = FD_EPS
            Fd = (self.residual(z + eps * d, x_old, dt, s_diff) - F0) / eps
            Jd = J @ d
            scale = np.max(np.abs(Fd)) + 1e-30
            worst = max(worst, float(np.max(np.abs(Jd - Fd)) / scale))
        return worst

    # -- newton -------------------------------------------------------------------

    def _newton(self, z0, x_old, dt):
        cfg = self.config
        z = z0.copy()
        s_diff = self._diff_scale(x_old)
        F = self.residual(z, x_old, dt, s_diff)
        norm = _inf_norm(F)
        lu = None
        fresh = False
        n_jac = 0
        for it in range(cfg.newton_max_iter):
            if norm <= cfg.newton_tol:
                return z, {"iterations": it, "norm": norm, "n_jac": n_jac}
            if lu is None or (it > 0 and it % cfg.jacobian_refresh == 0
                              and not fresh):
                J = self.jacobian(z, x_old, dt, s_diff, F)
                n_jac += 1
                try:
                    lu = lu_factor(J)
                except ValueError:
                    return None, {"iterations": it, "norm": norm,
                                  "n_jac": n_jac, "reason": "singular"}
                fresh = True
            dz = lu_solve(lu, -F)
            lam = 1.0
            accepted = False
            for _ in range(cfg.max_damping + 1):
                z_new = z + lam * dz
                F_new = self.residual(z_new, x_old, dt, s_diff)
                norm_new = _inf_norm(F_new)
                if norm_new <= (1.0 - ARMIJO * lam) * norm \
                        or norm_new <= cfg.newton_tol:
                    accepted = True
                    break
                lam *= 0.5
            if not accepted:
                if fresh:
                    return None, {"iterations": it, "norm": norm,
                                  "n_jac": n_jac, "reason": "stalled"}
                lu = None     # stale Jacobian; refresh and retry
                fresh = False
                continue
            z, F, norm = z_new, F_new, norm_new
            fresh = False
        if norm <= cfg.newton_tol:
            return z, {"iterations": cfg.newton_max_iter, "norm": norm,
                       "n_jac": n_jac}
        return None, {"iterations": cfg.newton_max_iter, "norm": norm,
                      "n_jac": n_jac, "reason": "max_iter"}

    # -- stepping -----------------------------------------------------------------

    def step(self, x, y, dt):
        """One implicit-Euler step; returns (x', y', info) or (None, None, info)."""
        z0 = self.pack(x, y)
        z, info = self._newton(z0, np.asarray(x, dtype=float), dt)
        if z is None:
            return None, None, info
        x_new, y_new = self.unpack(z)
        x_new = x_new.copy()
        y_new = y_new.copy()
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(y_new))):
            info["reason"] = "non-finite state"
            return None, None, info
        conc = x_new[:, :17] if self.nd >= 17 else x_new
        if np.min(conc) < -NEGATIVE_STATE_TOL:
            info["reason"] = "negative concentration"
            info["min_concentration"] = float(np.min(conc))
            return None, None, info
        g = self.model.residuals(x_new, y_new)[1]
        g_norm = float(np.max(np.abs(g)))
        if g_norm > self.config.algebraic_tol:
            info["reason"] = "algebraic residual above tolerance"
            info["g_norm"] = g_norm
            return None, None, info
        info["g_norm"] = g_norm
        return x_new, y_new, info

    def simulate(self, x0, y0, t_end, record_dt=None, steady_tol=None,
                 stop_at_steady=False):
        """Integrate from (x0, y0) to t_end (or to steady state).

        ``record_dt`` controls the snapshot cadence (None records every
        accepted step); ``steady_tol`` (default: config value) sets the
        scaled |dx/dt| threshold used for t_settle detection.
        """
        cfg = self.config
        steady_tol = cfg.steady_state_tol if steady_tol is None else steady_tol
        x = np.array(x0, dtype=float)
        y = np.array(y0, dtype=float)
        traj = Trajectory()
        traj.append(0.0, x, y)
        stats = {"steps": 0, "rejected": 0, "newton_iterations": 0,
                 "jacobians": 0, "max_g_norm": 0.0, "dt_final": cfg.dt_init}
        t = 0.0
        dt = cfg.dt_init
        streak = 0
        next_record = record_dt if record_dt else 0.0
        floor = self.model.diff_floor
        while t < t_end - 1e-12:
            dt_try = min(dt, t_end - t)
            x_new, y_new, info = self.step(x, y, dt_try)
            stats["newton_iterations"] += info.get("iterations", 0)
            stats["jacobians"] += info.get("n_jac", 0)
            if x_new is None:
                stats["rejected"] += 1
                streak = 0
                dt = dt_try / 2.0
                if dt < cfg.dt_min:
                    raise SolverFailure(
                        f"time step fell below dt_min at t = {t:.6g} s "
                        f"({info.get('reason', 'newton failure')})",
                        diagnostics={"t": t, "dt": dt, "info": info,
                                     "stats": stats})
                continue
            rate = np.max(np.abs(x_new - x) / dt_try
                          / (np.abs(x_new) + floor))
            t += dt_try
            x, y = x_new, y_new
            stats["steps"] += 1
            stats["max_g_norm"] = max(stats["max_g_norm"], info["g_norm"])
            stats["dt_final"] = dt_try
            streak += 1
            if streak >= 2:
                dt = min(dt * cfg.dt_growth, cfg.dt_max)
            if traj.t_settle is None and rate < steady_tol:
                traj.t_settle = t
                traj.steady = True
                if stop_at_steady:
                    traj.append(t, x, y)
                    break
            if record_dt is None or t >= next_record - 1e-12:
                traj.append(t, x, y)
                if record_dt:
                    while next_record <= t + 1e-12:
                        next_record += record_dt
        if traj.times[-1] != t:
            traj.append(t, x, y)
        traj.stats = stats
        return traj

    def run_to_steady_state(self, x0, y0, record_dt=None):
        """Integrate until the steady-state criterion holds (or t_max)."""
        traj = self.simulate(x0, y0, self.config.t_max_steady,
                             record_dt=record_dt, stop_at_steady=True)
        return traj, traj.steady, traj.t_settle


def _inf_norm(F):
    if not np.all(np.isfinite(F)):
        return np.inf
    return float(np.max(np.abs(F)))


def consistent_init(model, x0, algebraic_tol: float = 1e-8):
    """Solve g(x0, y0) = 0 for y0 by per-segment temperature inversion.

    The wall phases invert their energy densities directly; the mixture
    temperature comes from the pressure-free form of the internal energy
    and P then follows from the volume closure. Raises SolverFailure naming
    the segment and phase when an inversion cannot bracket.
    """
    from .constants import GAS_CONSTANT as R
    from .species import N_SOLIDS

    x0 = np.asarray(x0, dtype=float)
    th = model.thermo
    n = model.n_v
    y0 = np.empty((n, 4))
    for k in range(n):
        Cs = x0[k, :N_SOLIDS]
        Cg = x0[k, N_SOLIDS:17]
        total_g = float(np.sum(Cg))
        if total_g <= 0.0:
            raise SolverFailure(
                f"consistent initialization failed: segment {k + 1} has no "
                "gas, volume closure unsolvable")
        Vs = float(th.solid_volume_fraction(Cs))
        if Vs >= 1.0:
            raise SolverFailure(
                f"consistent initialization failed: segment {k + 1} solids "
                "overfill the volume")
        try:
            Tc = th.invert_temperature(x0[k, 17], Cs, Cg, phase="mixture")
            Tr = th.invert_temperature(x0[k, 18], phase="refractory")
            Tw = th.invert_temperature(x0[k, 19], phase="shell")
        except TemperatureInversionError as exc:
            raise SolverFailure(
                f"consistent initialization failed in segment {k + 1}: {exc}"
            ) from exc
        P = total_g * R * Tc / (1.0 - Vs)
        y0[k] = (Tc, Tr, Tw, P)
    g = model.residuals(x0, y0)[1]
    g_norm = float(np.max(np.abs(g)))
    if g_norm > algebraic_tol:
        raise SolverFailure(
            f"consistent initialization left |g| = {g_norm:.3e} above "
            f"tolerance {algebraic_tol:.1e}")
    return x0, y0
