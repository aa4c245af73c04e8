"""Tooth-root, flank and shaft strength checks for one reducer stage.

Influence factors come from the configuration table rather than being
computed from gear micro-geometry.
"""

from __future__ import annotations

import numpy as np

from ..model import ContractError
from .config import ReducerConfig

NO_LOAD_SENTINEL = -1e6


def _positive(name, v):
    if np.any(np.asarray(v) <= 0):
        raise ContractError(f"{name} must be positive")


def tangential_force(torque, d1):
    """F_t = 2 C / d1 for a pinion torque in N*mm and pitch diameter in mm."""
    _positive("d1", d1)
    return 2.0 * np.asarray(torque, dtype=float) / np.asarray(d1, dtype=float)


def bending_stress(F_t, b, m_n, cfg: ReducerConfig):
    """Root bending stress of pinion and wheel, MPa."""
    _positive("facewidth", b)
    _positive("module", m_n)
    k = cfg.factor("K_A") * cfg.factor("K_V") * cfg.factor("K_Falpha") * cfg.factor("K_Fbeta")
    common = cfg.factor("Y_beta") * cfg.factor("Y_B") * cfg.factor("Y_DT")
    base = np.asarray(F_t, dtype=float) / (np.asarray(b, dtype=float) * np.asarray(m_n, dtype=float))
    out = []
    for gear in (0, 1):
        y = cfg.factor("Y_F", gear) * cfg.factor("Y_S", gear) * common
        out.append(base * y * k)
    return out[0], out[1]


def permissible_bending(cfg: ReducerConfig) -> float:
    y = 1.0
    for name in ("Y_ST", "Y_NT", "Y_deltaRelT", "Y_RrelT", "Y_X"):
        y *= cfg.factor(name)
    return cfg.sigma_FLim / cfg.S_Fmin * y


def contact_stress(F_t, b, d1, u, cfg: ReducerConfig):
    """Flank contact stress of pinion and wheel, MPa."""
    _positive("facewidth", b)
    _positive("d1", d1)
    _positive("ratio", u)
    u = np.asarray(u, dtype=float)
    z = cfg.factor("Z_H") * cfg.factor("Z_E") * cfg.factor("Z_eps") * cfg.factor("Z_beta")
    sigma_h0 = z * np.sqrt(np.asarray(F_t, dtype=float) / (np.asarray(b) * np.asarray(d1)) * (u + 1.0) / u)
    k = np.sqrt(cfg.factor("K_A") * cfg.factor("K_V") * cfg.factor("K_Halpha") * cfg.factor("K_Hbeta"))
    return cfg.factor("Z_BD", 0) * sigma_h0 * k, cfg.factor("Z_BD", 1) * sigma_h0 * k


def permissible_contact(cfg: ReducerConfig) -> float:
    z = 1.0
    for name in ("Z_NT", "Z_L", "Z_V", "Z_R", "Z_W", "Z_X"):
        z *= cfg.factor(name)
    return cfg.sigma_HLim / cfg.S_Hmin * z


def _ratio(limit, stress):
    stress = np.asarray(stress, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(stress > 0, limit / np.where(stress > 0, stress, 1.0), np.inf)


def stage_power_constraints(sigma_F, sigma_H, sigma_FP, sigma_HP):
    """``(c_bend, c_contact)`` from pinion/wheel stress pairs; feasible when <= 0.

    The transmissible power margin keeps the weaker of pinion and wheel.
    Unloaded stages get a large negative sentinel instead of -inf.
    """
    rf = np.minimum(_ratio(sigma_FP, sigma_F[0]), _ratio(sigma_FP, sigma_F[1]))
    rh = np.minimum(_ratio(sigma_HP, sigma_H[0]), _ratio(sigma_HP, sigma_H[1])) ** 2
    c_bend = np.where(np.isinf(rf), NO_LOAD_SENTINEL, 1.0 - np.where(np.isinf(rf), 0.0, rf))
    c_contact = np.where(np.isinf(rh), NO_LOAD_SENTINEL, 1.0 - np.where(np.isinf(rh), 0.0, rh))
    return c_bend, c_contact


def torque_chain(C_e, z1, z2):
    """Torques on shafts 0..3 (last axis) for per-stage teeth arrays ``z1``, ``z2``."""
    ratios = np.asarray(z2, dtype=float) / np.asarray(z1, dtype=float)
    cum = np.cumprod(ratios, axis=-1)
    ones = np.ones(cum.shape[:-1] + (1,))
    return float(C_e) * np.concatenate([ones, cum], axis=-1)


def shaft_shear(C, r):
    """Torsional shear 2C / (pi r^3), MPa."""
    _positive("shaft radius", r)
    return 2.0 * np.asarray(C, dtype=float) / (np.pi * np.asarray(r, dtype=float) ** 3)


def twist_angle(C, lengths, r, G: float, exponent: int = 3):
    """Summed twist sum(2 C l / (G pi r^k)) over the last axis."""
    _positive("shaft radius", r)
    C = np.asarray(C, dtype=float)
    r = np.asarray(r, dtype=float)
    return np.sum(2.0 * C * np.asarray(lengths, dtype=float) / (G * np.pi * r**exponent), axis=-1)


def shaft_constraints(z1, z2, r, cfg: ReducerConfig):
    """``(c_tau, c_theta)``: four shear margins and the twist margin."""
    C = torque_chain(cfg.input_torque, z1, z2)
    c_tau = shaft_shear(C, r) / cfg.tau_max - 1.0
    theta = twist_angle(C, cfg.shaft_lengths, r, cfg.G, cfg.twist_exponent)
    return c_tau, theta / cfg.theta_max - 1.0
