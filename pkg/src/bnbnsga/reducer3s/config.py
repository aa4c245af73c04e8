"""Fixed data of a three-stage reducer instance and its JSON file format."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from ..model import ContractError

# Renard R40 series over one decade: 41 normal modules from 1 to 10 mm.
R40_MODULES = (
    1.00, 1.06, 1.12, 1.18, 1.25, 1.32, 1.40, 1.50, 1.60, 1.70, 1.80, 1.90,
    2.00, 2.12, 2.24, 2.36, 2.50, 2.65, 2.80, 3.00, 3.15, 3.35, 3.55, 3.75,
    4.00, 4.25, 4.50, 4.75, 5.00, 5.30, 5.60, 6.00, 6.30, 6.70, 7.10, 7.50,
    8.00, 8.50, 9.00, 9.50, 10.00,
)

FACTOR_NAMES = (
    "K_A", "K_V", "K_Falpha", "K_Fbeta", "K_Halpha", "K_Hbeta",
    "Y_F", "Y_S", "Y_beta", "Y_B", "Y_DT",
    "Y_ST", "Y_NT", "Y_deltaRelT", "Y_RrelT", "Y_X",
    "Z_H", "Z_E", "Z_eps", "Z_beta", "Z_BD",
    "Z_NT", "Z_L", "Z_V", "Z_R", "Z_W", "Z_X",
)
# factors that may differ between pinion and wheel, given as [pinion, wheel]
PER_GEAR_FACTORS = ("Y_F", "Y_S", "Z_BD")


def unit_factors() -> dict:
    return {name: 1.0 for name in FACTOR_NAMES}


@dataclass(frozen=True)
class ReducerConfig:
    """Instance data. Lengths in mm, forces in N, stresses in MPa, angles in rad."""

    P_t: float = 50_000.0
    N_e: float = 1500.0
    u_bar: float = 16.0
    input_position: tuple[float, float] = (0.0, 0.0)
    output_position: tuple[float, float] = (300.0, 0.0)
    casing_center: tuple[float, float] = (150.0, 0.0)
    casing_half: tuple[float, float] = (190.0, 70.0)
    shaft_lengths: tuple[float, float, float, float] = (80.0, 80.0, 80.0, 80.0)
    alpha_n: float = math.radians(20.0)
    beta: float = math.radians(15.0)
    tau_max: float = 50.0
    theta_max: float = 0.05
    G: float = 80_000.0
    twist_exponent: int = 3
    sigma_FLim: float = 430.0
    sigma_HLim: float = 1500.0
    S_Fmin: float = 1.4
    S_Hmin: float = 1.0
    eps_alpha_min: float = 1.3
    x1_min: float = 0.1812
    z_min: int = 14
    pinion_teeth: tuple[int, int] = (14, 30)
    wheel_teeth: tuple[int, int] = (14, 150)
    facewidth_range: tuple[float, float] = (5.0, 150.0)
    profile_shift_range: tuple[float, float] = (0.0, 1.0)
    shaft_radius_range: tuple[float, float] = (5.0, 80.0)
    xi1_range: tuple[float, float] = (-math.pi, math.pi)
    factors: dict = field(default_factory=unit_factors)
    module_catalog: tuple[float, ...] = R40_MODULES
    label: str = "reference"

    def __post_init__(self):
        if not self.u_bar > 1:
            raise ContractError(f"u_bar must exceed 1, got {self.u_bar}")
        cat = self.module_catalog
        if len(cat) != 41 or any(b <= a for a, b in zip(cat, cat[1:])):
            raise ContractError("module_catalog needs 41 strictly increasing entries")
        missing = set(FACTOR_NAMES) - set(self.factors)
        if missing:
            raise ContractError(f"missing factors: {sorted(missing)}")
        for name, v in self.factors.items():
            vals = v if isinstance(v, (list, tuple)) else [v]
            if any(x <= 0 for x in vals):
                raise ContractError(f"factor {name} must be positive")
            if isinstance(v, (list, tuple)) and (name not in PER_GEAR_FACTORS or len(v) != 2):
                raise ContractError(f"factor {name}: only {PER_GEAR_FACTORS} may be [pinion, wheel] pairs")
        if self.twist_exponent not in (3, 4):
            raise ContractError("twist_exponent must be 3 or 4")
        if self.S_Fmin <= 0 or self.S_Hmin <= 0:
            raise ContractError("safety factors must be positive")

    def factor(self, name: str, gear: int = 0) -> float:
        """Factor value; ``gear`` is 0 for the pinion, 1 for the wheel."""
        v = self.factors[name]
        return float(v[gear]) if isinstance(v, (list, tuple)) else float(v)

    @property
    def input_torque(self) -> float:
        """Input shaft torque C_e in N*mm."""
        omega = 2.0 * math.pi * self.N_e / 60.0
        return self.P_t / omega * 1000.0

    def with_factors(self, **overrides) -> ReducerConfig:
        return replace(self, factors={**self.factors, **overrides})

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> ReducerConfig:
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for k, v in data.items():
            if k == "factors":
                kw[k] = {**unit_factors(), **v}
            elif isinstance(v, list):
                kw[k] = tuple(v)
            else:
                kw[k] = v
        return cls(**kw)


def load_config(path: str | Path) -> ReducerConfig:
    with open(path) as fh:
        return ReducerConfig.from_dict(json.load(fh))


def save_config(cfg: ReducerConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")


def data_path(name: str) -> Path:
    return Path(str(resources.files("bnbnsga.reducer3s") / "data" / name))


def preset(name: str = "reference") -> ReducerConfig:
    """Shipped instances: ``reference`` (unit factors) or ``realistic``."""
    return load_config(data_path(f"{name}.json"))
