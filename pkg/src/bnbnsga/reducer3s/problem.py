"""Decision layout, objectives and the 41-entry constraint vector of the reducer.

Slot layout (20 slots)::

    0-2    module catalog index, stages 1-3   (categorical)
    3-5    pinion teeth Z_s1                  (integer, 14-30)
    6-8    wheel teeth Z_s2                   (integer, 14-150)
    9-11   facewidth b_s, mm
    12-14  pinion profile shift x1_s
    15-18  shaft radii r_a0..r_a3, mm
    19     orientation xi_1 of O0 -> O1, rad

Gears: pinion s sits on shaft s-1 and wheel s on shaft s. The stage-1 and
stage-3 gears share the front plane; the stage-2 pair sits in the back plane.
All shafts span the full casing depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..model import Categorical, Continuous, Integer, ProblemDef
from .config import ReducerConfig
from .geometry import StageGeometry, box_margin, closure_geometry, geometric_constraints, stage_geometry
from .strength import (
    bending_stress,
    contact_stress,
    permissible_bending,
    permissible_contact,
    shaft_constraints,
    stage_power_constraints,
    tangential_force,
    torque_chain,
)

N_VARS = 20
N_OBJ = 2


def _constraint_names() -> list[str]:
    names = []
    for s in (1, 2, 3):
        names += [f"bending_power_s{s}", f"contact_power_s{s}"]
    for s in (1, 2, 3):
        names += [f"contact_ratio_s{s}", f"facewidth_min_s{s}", f"facewidth_max_s{s}", f"profile_shift_s{s}"]
    names += ["closure_reach", "closure_gap"]
    names += [f"casing_{g}{s}" for s in (1, 2, 3) for g in ("pinion", "wheel")]
    names += [f"pinion_bore_s{s}" for s in (1, 2, 3)]
    names += [
        "clear_wheel1_shaft2", "clear_wheel1_shaft3",
        "clear_wheel2_shaft0", "clear_wheel2_shaft3",
        "clear_wheel3_shaft0", "clear_wheel3_shaft1",
        "overlap_wheel1_wheel3",
    ]
    names += [f"shear_shaft{k}" for k in range(4)]
    names += ["twist"]
    return names


CONSTRAINT_NAMES = tuple(_constraint_names())
N_CON = len(CONSTRAINT_NAMES)
CONSTRAINT_INDEX = {name: i for i, name in enumerate(CONSTRAINT_NAMES)}

CONSTRAINT_DOCS = {
    "bending_power": "1 - min over pinion/wheel of sigma_FP / sigma_F",
    "contact_power": "1 - min over pinion/wheel of (sigma_HP / sigma_H)^2",
    "contact_ratio": "1.3 - transverse contact ratio",
    "facewidth_min": "(0.1 d2 - b) / d1",
    "facewidth_max": "(b - d1) / d1",
    "profile_shift": "0.1812 - x1",
    "closure_reach": "(|O1O3| - a2 - a3) / |O0O3|",
    "closure_gap": "(|a2 - a3| - |O1O3|) / |O0O3|",
    "casing": "largest relative overshoot of the tip circle outside the casing box",
    "pinion_bore": "(r_shaft - r_root) / r_root for the pinion on its shaft",
    "clear_wheel": "(r_tip + r_shaft - centre distance) / r_tip for a foreign shaft",
    "overlap_wheel1_wheel3": "(r_tip1 + r_tip3 - |O1O3|) / (r_tip1 + r_tip3), shared front plane",
    "shear_shaft": "tau / tau_max - 1",
    "twist": "theta / theta_max - 1",
}


@dataclass
class ReducerVariables:
    """Decoded view of one decision vector or a batch (leading axes)."""

    module_idx: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    b: np.ndarray
    x1: np.ndarray
    r: np.ndarray
    xi1: np.ndarray

    def modules(self, cfg: ReducerConfig) -> np.ndarray:
        return np.asarray(cfg.module_catalog)[self.module_idx.astype(int)]


def decode(x: np.ndarray) -> ReducerVariables:
    x = np.asarray(x, dtype=float)
    return ReducerVariables(
        module_idx=x[..., 0:3].astype(int),
        z1=x[..., 3:6].copy(),
        z2=x[..., 6:9].copy(),
        b=x[..., 9:12].copy(),
        x1=x[..., 12:15].copy(),
        r=x[..., 15:19].copy(),
        xi1=x[..., 19].copy(),
    )


def encode(v: ReducerVariables) -> np.ndarray:
    return np.concatenate(
        [
            np.asarray(v.module_idx, dtype=float),
            np.asarray(v.z1, dtype=float),
            np.asarray(v.z2, dtype=float),
            np.asarray(v.b, dtype=float),
            np.asarray(v.x1, dtype=float),
            np.asarray(v.r, dtype=float),
            np.asarray(v.xi1, dtype=float)[..., None],
        ],
        axis=-1,
    )


def variable_specs(cfg: ReducerConfig) -> list:
    specs = [Categorical(f"module_s{s}", cfg.module_catalog) for s in (1, 2, 3)]
    specs += [Integer(f"pinion_teeth_s{s}", *cfg.pinion_teeth) for s in (1, 2, 3)]
    specs += [Integer(f"wheel_teeth_s{s}", *cfg.wheel_teeth) for s in (1, 2, 3)]
    specs += [Continuous(f"facewidth_s{s}", *cfg.facewidth_range) for s in (1, 2, 3)]
    specs += [Continuous(f"profile_shift_s{s}", *cfg.profile_shift_range) for s in (1, 2, 3)]
    specs += [Continuous(f"shaft_radius_{k}", *cfg.shaft_radius_range) for k in range(4)]
    specs += [Continuous("xi1", *cfg.xi1_range)]
    return specs


def domain_size(cfg: ReducerConfig) -> int:
    """Number of integer/categorical combinations (a product, not a sum)."""
    n = 1
    for s in variable_specs(cfg):
        if s.is_integer:
            n *= s.cardinality
    return n


def volume_objective(v: ReducerVariables, cfg: ReducerConfig, modules=None) -> np.ndarray:
    """Total shaft and gear-blank volume, mm^3."""
    m = v.modules(cfg) if modules is None else np.asarray(modules, dtype=float)
    shafts = np.sum(np.asarray(cfg.shaft_lengths) * v.r**2, axis=-1)
    gears = np.sum(v.b * m**2 / 2.0 * (v.z1**2 + v.z2**2), axis=-1)
    return np.pi * (shafts + gears)


def ratio_objective(v: ReducerVariables, cfg: ReducerConfig) -> np.ndarray:
    """Relative gap between the target ratio and the train ratio.

    Written as ``|u_bar * prod(z1) - prod(z2)| / (u_bar * prod(z1))`` so the
    tooth products stay exact integers and an exact train gives exactly 0.
    """
    target = cfg.u_bar * np.prod(v.z1, axis=-1)
    return np.abs(target - np.prod(v.z2, axis=-1)) / target


def ratio_is_exact(z1, z2, u_bar) -> bool:
    """Exact rational check that the teeth ratios multiply to ``u_bar``."""
    prod = Fraction(1)
    for a, b in zip(z1, z2):
        prod *= Fraction(int(b), int(a))
    return prod == Fraction(u_bar).limit_denominator(10**9)


def _stages(v: ReducerVariables, cfg: ReducerConfig) -> list[StageGeometry]:
    m = v.modules(cfg)
    return [
        stage_geometry(m[..., s], v.z1[..., s], v.z2[..., s], v.b[..., s], v.x1[..., s], cfg.alpha_n, cfg.beta)
        for s in range(3)
    ]


def layout(v: ReducerVariables, cfg: ReducerConfig):
    """Stage geometries and shaft-centre placement."""
    stages = _stages(v, cfg)
    a = np.stack([g.a for g in stages], axis=-1)
    closure = closure_geometry(
        a, v.xi1, (0.5 * stages[1].da2, 0.5 * stages[2].da1),
        cfg.input_position, cfg.output_position, cfg.casing_center, cfg.casing_half,
    )
    return stages, closure


def constraints(v: ReducerVariables, cfg: ReducerConfig) -> np.ndarray:
    """All 41 constraint values in ``CONSTRAINT_NAMES`` order."""
    stages, cl = layout(v, cfg)
    torques = torque_chain(cfg.input_torque, v.z1, v.z2)
    s_fp = permissible_bending(cfg)
    s_hp = permissible_contact(cfg)
    cols = []
    for s, g in enumerate(stages):
        ft = tangential_force(torques[..., s], g.d1)
        sf = bending_stress(ft, g.b, g.m, cfg)
        sh = contact_stress(ft, g.b, g.d1, g.u, cfg)
        cols += list(stage_power_constraints(sf, sh, s_fp, s_hp))
    for g in stages:
        c_eps, c_bmin, c_bmax, c_shift = geometric_constraints(g, cfg.eps_alpha_min, cfg.x1_min)
        cols += [c_eps, c_bmin / g.d1, c_bmax / g.d1, c_shift]
    cols += [cl.c_upper, cl.c_lower]

    centers = [cl.O0, cl.O1, cl.O2, cl.O3]
    tip_p = [0.5 * g.da1 for g in stages]
    tip_w = [0.5 * g.da2 for g in stages]
    for s in range(3):
        cols.append(box_margin(centers[s], tip_p[s], cfg.casing_center, cfg.casing_half))
        cols.append(box_margin(centers[s + 1], tip_w[s], cfg.casing_center, cfg.casing_half))
    for s, g in enumerate(stages):
        root = 0.5 * g.df1
        cols.append((v.r[..., s] - root) / np.abs(root))

    def dist(i, j):
        return np.linalg.norm(centers[i] - centers[j], axis=-1)

    for wheel, shaft in ((1, 2), (1, 3), (2, 0), (2, 3), (3, 0), (3, 1)):
        rt = tip_w[wheel - 1]
        cols.append((rt + v.r[..., shaft] - dist(wheel, shaft)) / rt)
    both = tip_w[0] + tip_w[2]
    cols.append((both - dist(1, 3)) / both)

    c_tau, c_theta = shaft_constraints(v.z1, v.z2, v.r, cfg)
    cols += [c_tau[..., k] for k in range(4)]
    cols.append(c_theta)
    return np.stack(cols, axis=-1)


def evaluate(x: np.ndarray, cfg: ReducerConfig) -> tuple[np.ndarray, np.ndarray]:
    v = decode(x)
    F = np.stack([volume_objective(v, cfg), ratio_objective(v, cfg)], axis=-1)
    return F, constraints(v, cfg)


class _Evaluator:
    """Picklable batch evaluator bound to one configuration."""

    def __init__(self, cfg: ReducerConfig):
        self.cfg = cfg

    def __call__(self, X):
        return evaluate(X, self.cfg)


def assemble(cfg: ReducerConfig | None = None) -> ProblemDef:
    cfg = cfg or ReducerConfig()
    return ProblemDef(
        variable_specs(cfg), N_OBJ, N_CON, _Evaluator(cfg), vectorized=True, name=f"3sr-{cfg.label}"
    )


def constraint_index_map() -> list[dict]:
    """Published layout of the constraint vector."""
    out = []
    for i, name in enumerate(CONSTRAINT_NAMES):
        key = next(k for k in CONSTRAINT_DOCS if name.startswith(k))
        out.append({"index": i, "name": name, "definition": CONSTRAINT_DOCS[key]})
    return out
