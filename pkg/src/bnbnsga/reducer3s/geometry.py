"""Helical gear pair geometry and the closure construction of the gear train.

All functions broadcast over leading array axes, so the same code evaluates a
single design or a whole population.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import ContractError

EPS_UNDEFINED = 1e3  # violation reported when involute terms are undefined


@dataclass
class StageGeometry:
    m: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    b: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    da1: np.ndarray
    da2: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    a: np.ndarray
    alpha_t: float
    beta: float

    @property
    def u(self) -> np.ndarray:
        return self.z2 / self.z1


def stage_geometry(m, z1, z2, b, x1, alpha_n: float, beta: float) -> StageGeometry:
    """Pitch, tip and root diameters of a zero-sum shifted helical pair (x2 = -x1)."""
    m, z1, z2, b, x1 = (np.asarray(v, dtype=float) for v in (m, z1, z2, b, x1))
    cb = np.cos(beta)
    x2 = -x1
    d1 = m * z1 / cb
    d2 = m * z2 / cb
    return StageGeometry(
        m=m, z1=z1, z2=z2, b=b, x1=x1, x2=x2,
        d1=d1, d2=d2,
        da1=d1 + 2.0 * m * (1.0 + x1),
        da2=d2 + 2.0 * m * (1.0 + x2),
        df1=d1 - 2.0 * m * (1.25 - x1),
        df2=d2 - 2.0 * m * (1.25 - x2),
        a=0.5 * (d1 + d2),
        alpha_t=float(np.arctan(np.tan(alpha_n) / cb)),
        beta=float(beta),
    )


def center_distance(m, z1, z2, beta: float) -> np.ndarray:
    return np.asarray(m, dtype=float) * (np.asarray(z1) + np.asarray(z2)) / (2.0 * np.cos(beta))


def contact_ratio(g: StageGeometry) -> np.ndarray:
    """Transverse contact ratio; NaN where a tip circle falls inside its base circle.

    With zero-sum shift the working pressure angle equals the transverse one.
    """
    cos_t = np.cos(g.alpha_t)
    rb1 = 0.5 * g.d1 * cos_t
    rb2 = 0.5 * g.d2 * cos_t
    ra1 = 0.5 * g.da1
    ra2 = 0.5 * g.da2
    q1 = ra1**2 - rb1**2
    q2 = ra2**2 - rb2**2
    ok = (q1 >= 0) & (q2 >= 0)
    path = np.sqrt(np.where(ok, q1, 0.0)) + np.sqrt(np.where(ok, q2, 0.0)) - g.a * np.sin(g.alpha_t)
    pitch = np.pi * g.m * cos_t / np.cos(g.beta)
    return np.where(ok, path / pitch, np.nan)


def geometric_constraints(g: StageGeometry, eps_min: float = 1.3, x1_min: float = 0.1812):
    """``(c_eps, c_bmin, c_bmax, c_shift)``, each feasible when <= 0.

    Facewidth margins are in mm; the caller scales them.
    """
    eps = contact_ratio(g)
    c_eps = np.where(np.isnan(eps), EPS_UNDEFINED, eps_min - np.nan_to_num(eps))
    c_bmin = 0.1 * g.d2 - g.b
    c_bmax = g.b - g.d1
    c_shift = x1_min - g.x1
    return c_eps, c_bmin, c_bmax, c_shift


def undercut_shift_bound(z_min: int, alpha_n: float) -> float:
    """Smallest pinion shift avoiding undercut for ``z_min`` teeth."""
    return 1.0 - z_min * np.sin(alpha_n) ** 2 / 2.0


def closure_angle(a2, a3, d13) -> np.ndarray:
    """Angle at O1 between O1O3 and O1O2 (law of cosines); NaN if no triangle."""
    a2, a3, d13 = (np.asarray(v, dtype=float) for v in (a2, a3, d13))
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_a = (a2**2 - a3**2 + d13**2) / (2.0 * a2 * d13)
    ok = (a2 > 0) & (d13 > 0) & (np.abs(cos_a) <= 1.0 + 1e-12)
    return np.where(ok, np.arccos(np.clip(cos_a, -1.0, 1.0)), np.nan)


def intermediate_positions(o1, o3, a2, a3):
    """Both positions of O2 at distance a2 from O1 and a3 from O3.

    Returns ``(upper, lower, alpha1)`` where ``lower`` has the smaller y
    coordinate. Positions are computed from the clipped cosine, so they exist
    (with wrong distances) even when the triangle cannot close.
    """
    o1 = np.asarray(o1, dtype=float)
    o3 = np.asarray(o3, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    delta = o3 - o1
    d13 = np.hypot(delta[..., 0], delta[..., 1])
    safe = np.where(d13 > 0, d13, 1.0)
    e = delta / safe[..., None]
    n = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_a = (a2**2 - a3**2 + d13**2) / (2.0 * np.where(a2 > 0, a2, 1.0) * safe)
    cos_a = np.clip(np.nan_to_num(cos_a), -1.0, 1.0)
    sin_a = np.sqrt(1.0 - cos_a**2)
    p = o1 + a2[..., None] * (cos_a[..., None] * e + sin_a[..., None] * n)
    q = o1 + a2[..., None] * (cos_a[..., None] * e - sin_a[..., None] * n)
    p_low = p[..., 1] <= q[..., 1]
    lower = np.where(p_low[..., None], p, q)
    upper = np.where(p_low[..., None], q, p)
    return upper, lower, np.arccos(cos_a)


def box_margin(center, radius, box_center, box_half) -> np.ndarray:
    """Largest relative overshoot of a circle outside an axis-aligned box (<= 0 inside)."""
    center = np.asarray(center, dtype=float)
    hx, hy = box_half
    cx, cy = box_center
    mx = (np.abs(center[..., 0] - cx) + radius) / hx - 1.0
    my = (np.abs(center[..., 1] - cy) + radius) / hy - 1.0
    return np.maximum(mx, my)


@dataclass
class Closure:
    O0: np.ndarray
    O1: np.ndarray
    O2: np.ndarray
    O2_alt: np.ndarray
    O3: np.ndarray
    alpha1: np.ndarray
    xi2: np.ndarray
    xi3: np.ndarray
    c_upper: np.ndarray
    c_lower: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return (self.c_upper <= 0) & (self.c_lower <= 0)


def closure_geometry(a, xi1, radii_w2_p3, input_position, output_position, casing_center, casing_half) -> Closure:
    """Place the four shaft centres given the stage centre distances.

    ``a`` holds the three centre distances along the last axis. O1 follows
    from O0, ``a[0]`` and ``xi1``; O2 closes the triangle O1-O2-O3. Of the two
    closing positions the lower one is preferred for lubrication when both
    keep the stage-2 wheel and stage-3 pinion (tip radii ``radii_w2_p3``)
    inside the casing. Triangle margins are relative to |O0O3|.
    """
    a = np.asarray(a, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    o0 = np.broadcast_to(np.asarray(input_position, dtype=float), a.shape[:-1] + (2,))
    o3 = np.broadcast_to(np.asarray(output_position, dtype=float), a.shape[:-1] + (2,))
    scale = float(np.hypot(*np.subtract(output_position, input_position)))
    if scale == 0.0:
        raise ContractError("input and output shafts coincide")
    o1 = o0 + a[..., 0:1] * np.stack([np.cos(xi1), np.sin(xi1)], axis=-1)
    d13 = np.linalg.norm(o3 - o1, axis=-1)
    a2, a3 = a[..., 1], a[..., 2]
    c_upper = (d13 - (a2 + a3)) / scale
    c_lower = (np.abs(a2 - a3) - d13) / scale
    upper, lower, alpha1 = intermediate_positions(o1, o3, a2, a3)
    ra_w2, ra_p3 = radii_w2_p3

    def fit(o2):
        return np.maximum(
            box_margin(o2, ra_w2, casing_center, casing_half),
            box_margin(o2, ra_p3, casing_center, casing_half),
        )

    fit_low, fit_up = fit(lower), fit(upper)
    use_low = (fit_low <= 0) | (fit_low <= fit_up)
    o2 = np.where(use_low[..., None], lower, upper)
    o2_alt = np.where(use_low[..., None], upper, lower)
    xi2 = np.arctan2(o2[..., 1] - o1[..., 1], o2[..., 0] - o1[..., 0])
    xi3 = np.arctan2(o3[..., 1] - o2[..., 1], o3[..., 0] - o2[..., 0])
    return Closure(o0, o1, o2, o2_alt, o3, alpha1, xi2, xi3, c_upper, c_lower)
