"""Segment geometry of the cylinder-with-two-cones reaction chamber.

The chamber is a vertical cylinder of radius r_c between heights h_cl and
h_cu, a lower cone tapering to r_l at y=0 and an upper cone tapering to r_u
at y=h_tot. The refractory extends to r_r and the steel shell to r_w; both
follow the chamber contour with uniform thickness (cone radii shifted by the
same offset).

The axis is split into n_v uniform segments of height dy = h_tot/n_v. Each
segment is decomposed into its overlap with the lower cone, the cylinder and
the upper cone; cone pieces are exact frusta with radii evaluated at the
piece faces, so segment volumes are the exact integral of the cross-section
over the segment height. Volumes are therefore strictly positive and add up
to the closed-form chamber volume for any n_v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeometrySpec:
    """Chamber dimensions [m] and axial segment count."""

    h_tot: float
    h_cl: float
    h_cu: float
    r_c: float
    r_l: float
    r_u: float
    r_r: float
    r_w: float
    n_v: int

    def validate(self):
        if not (0.0 < self.h_cl < self.h_cu < self.h_tot):
            raise ValueError(
                f"need 0 < h_cl < h_cu < h_tot, got "
                f"({self.h_cl}, {self.h_cu}, {self.h_tot})")
        if not (0.0 < self.r_l <= self.r_c and 0.0 < self.r_u <= self.r_c):
            raise ValueError("need 0 < r_l, r_u <= r_c")
        if not (self.r_c < self.r_r < self.r_w):
            raise ValueError("need r_c < r_r < r_w")
        if self.n_v < 1:
            raise ValueError("n_v must be >= 1")
        return self


def _pieces(spec: GeometrySpec, a: float, b: float, offset: float):
    """Cone/cylinder pieces of axial slice [a, b] at radius offset.

    Returns (h_l, r_l_lo, r_l_hi, h_c, h_u, r_u_lo, r_u_hi) where each cone
    piece is a frustum with its lower/upper face radii. ``offset`` shifts
    every radius outward (refractory/shell contours).
    """
    rc = spec.r_c + offset
    rl = spec.r_l + offset
    ru = spec.r_u + offset
    h_up = spec.h_tot - spec.h_cu      # upper cone height

    h_l = max(0.0, min(b, spec.h_cl) - a)
    if h_l > 0.0:
        y0 = a
        r_l_lo = rl + (rc - rl) * y0 / spec.h_cl
        r_l_hi = rl + (rc - rl) * (y0 + h_l) / spec.h_cl
    else:
        r_l_lo = r_l_hi = rc

    h_u = max(0.0, b - max(a, spec.h_cu))
    if h_u > 0.0:
        y0 = max(a, spec.h_cu)
        r_u_lo = rc + (ru - rc) * (y0 - spec.h_cu) / h_up
        r_u_hi = rc + (ru - rc) * (y0 + h_u - spec.h_cu) / h_up
    else:
        r_u_lo = r_u_hi = rc

    h_c = (b - h_u) - (a + h_l)        # overlap with the cylinder section
    return h_l, r_l_lo, r_l_hi, h_c, h_u, r_u_lo, r_u_hi


def _frustum_volume(r1: float, r2: float, h: float) -> float:
    return math.pi / 3.0 * (r1 * r1 + r2 * r2 + r1 * r2) * h


def _frustum_lateral(r1: float, r2: float, h: float) -> float:
    return math.pi * (r1 + r2) * math.hypot(h, r1 - r2)


def slice_volume(spec: GeometrySpec, a: float, b: float,
                 offset: float = 0.0) -> float:
    """Exact volume [m^3] of the chamber slice between heights a and b."""
    h_l, rl1, rl2, h_c, h_u, ru1, ru2 = _pieces(spec, a, b, offset)
    rc = spec.r_c + offset
    return (_frustum_volume(rl1, rl2, h_l)
            + math.pi * rc * rc * h_c
            + _frustum_volume(ru1, ru2, h_u))


def slice_lateral_area(spec: GeometrySpec, a: float, b: float,
                       offset: float = 0.0) -> float:
    """Lateral (side) surface area [m^2] of the slice between a and b."""
    h_l, rl1, rl2, h_c, h_u, ru1, ru2 = _pieces(spec, a, b, offset)
    rc = spec.r_c + offset
    return (_frustum_lateral(rl1, rl2, h_l)
            + 2.0 * math.pi * rc * h_c
            + _frustum_lateral(ru1, ru2, h_u))


def chamber_radius(spec: GeometrySpec, y, offset: float = 0.0):
    """Contour radius [m] at height y (vectorized)."""
    y = np.asarray(y, dtype=float)
    rc = spec.r_c + offset
    rl = spec.r_l + offset
    ru = spec.r_u + offset
    r = np.full_like(y, rc)
    low = y < spec.h_cl
    r = np.where(low, rl + (rc - rl) * y / spec.h_cl, r)
    h_up = spec.h_tot - spec.h_cu
    high = y > spec.h_cu
    r = np.where(high, rc + (ru - rc) * (y - spec.h_cu) / h_up, r)
    return r


@dataclass(frozen=True)
class SegmentGeometry:
    """Per-segment geometry arrays (length n_v unless noted)."""

    spec: GeometrySpec
    dy: float
    y_faces: np.ndarray          # (n_v+1,) segment face heights
    V: np.ndarray                # chamber volume per segment
    V_r: np.ndarray              # refractory ring volume
    V_w: np.ndarray              # shell ring volume
    A_c: np.ndarray              # chamber lateral area (= A_cr)
    A_rm: np.ndarray             # lateral area at mid-refractory radius
    A_rw: np.ndarray             # lateral area at r_r
    A_wm: np.ndarray             # lateral area at mid-shell radius
    A_we: np.ndarray             # lateral area at r_w
    D_H: np.ndarray              # hydraulic diameter 4 V / A_c
    A_faces: np.ndarray          # (n_v+1,) flow cross-sections at faces
    A_flow: np.ndarray           # (n_v+1,) face areas used for transport
    A_xr: np.ndarray             # (n_v+1,) refractory ring cross-sections
    A_xw: np.ndarray             # (n_v+1,) shell ring cross-sections

    @property
    def n_v(self) -> int:
        return self.spec.n_v


def segment_partition(spec: GeometrySpec) -> SegmentGeometry:
    """Partition the chamber into n_v segments of uniform height."""
    spec.validate()
    n = spec.n_v
    dy = spec.h_tot / n
    y = np.linspace(0.0, spec.h_tot, n + 1)

    d_r = spec.r_r - spec.r_c
    d_w = spec.r_w - spec.r_c
    d_rm = 0.5 * d_r                   # mid-refractory contour
    d_wm = 0.5 * (d_r + d_w)           # mid-shell contour

    V = np.empty(n)
    V_rr = np.empty(n)                 # volume inside refractory contour
    V_ww = np.empty(n)                 # volume inside shell contour
    A_c = np.empty(n)
    A_rm = np.empty(n)
    A_rw = np.empty(n)
    A_wm = np.empty(n)
    A_we = np.empty(n)
    for k in range(n):
        a, b = y[k], y[k + 1]
        V[k] = slice_volume(spec, a, b)
        V_rr[k] = slice_volume(spec, a, b, d_r)
        V_ww[k] = slice_volume(spec, a, b, d_w)
        A_c[k] = slice_lateral_area(spec, a, b)
        A_rm[k] = slice_lateral_area(spec, a, b, d_rm)
        A_rw[k] = slice_lateral_area(spec, a, b, d_r)
        A_wm[k] = slice_lateral_area(spec, a, b, d_wm)
        A_we[k] = slice_lateral_area(spec, a, b, d_w)

    V_r = V_rr - V
    V_w = V_ww - V_rr
    D_H = 4.0 * V / A_c

    A_faces = math.pi * chamber_radius(spec, y) ** 2
    # one shared area per face keeps the flux sum telescoping exactly;
    # segment-average cross-sections, averaged across the face
    A_avg = V / dy
    A_flow = np.empty(n + 1)
    A_flow[0] = A_avg[0]
    A_flow[-1] = A_avg[-1]
    A_flow[1:-1] = 0.5 * (A_avg[:-1] + A_avg[1:])

    A_xr_avg = V_r / dy                # ring cross-sections, axial conduction
    A_xw_avg = V_w / dy
    A_xr = np.empty(n + 1)
    A_xw = np.empty(n + 1)
    A_xr[0], A_xr[-1] = A_xr_avg[0], A_xr_avg[-1]
    A_xw[0], A_xw[-1] = A_xw_avg[0], A_xw_avg[-1]
    A_xr[1:-1] = 0.5 * (A_xr_avg[:-1] + A_xr_avg[1:])
    A_xw[1:-1] = 0.5 * (A_xw_avg[:-1] + A_xw_avg[1:])

    geom = SegmentGeometry(
        spec=spec, dy=dy, y_faces=y, V=V, V_r=V_r, V_w=V_w,
        A_c=A_c, A_rm=A_rm, A_rw=A_rw, A_wm=A_wm, A_we=A_we,
        D_H=D_H, A_faces=A_faces, A_flow=A_flow, A_xr=A_xr, A_xw=A_xw)
    for arr in (y, V, V_r, V_w, A_c, A_rm, A_rw, A_wm, A_we, D_H,
                A_faces, A_flow, A_xr, A_xw):
        arr.setflags(write=False)
    if np.any(V <= 0) or np.any(V_r <= 0) or np.any(V_w <= 0):
        raise ValueError("non-positive segment volume; check dimensions")
    return geom


def total_volume(spec: GeometrySpec, offset: float = 0.0) -> float:
    """Closed-form chamber volume (both cones + cylinder) [m^3]."""
    return slice_volume(spec, 0.0, spec.h_tot, offset)
