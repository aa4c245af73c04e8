"""Look inside one reducer evaluation.

Decodes the bundled feasible design, prints its gear data and lists the
constraints with the least slack. A constraint value above zero means a
violation; the most negative values have the most room.

Run: python demos/reducer_anatomy.py
"""

import json

import numpy as np

from bnbnsga.reducer3s import CONSTRAINT_NAMES, decode, domain_size, evaluate, preset
from bnbnsga.reducer3s.config import data_path


def main():
    cfg = preset("reference")
    with open(data_path("reference_feasible.json")) as fh:
        x = np.array(json.load(fh)["vectors"][0])
    v = decode(x)
    f, c = evaluate(x, cfg)

    print(f"integer domain size: {domain_size(cfg):,} combinations")
    print("stage  module  pinion  wheel  facewidth")
    for s, (m, z1, z2, b) in enumerate(zip(v.modules(cfg), v.z1, v.z2, v.b), start=1):
        print(f"{s:5d}  {m:6.2f}  {z1:6.0f}  {z2:5.0f}  {b:9.2f}")
    print(f"volume {f[0]:.1f} mm^3, ratio error {f[1]:.4f}")

    print("tightest constraints:")
    for i in np.argsort(-c)[:8]:
        print(f"  {CONSTRAINT_NAMES[i]:28s} {c[i]: .4f}")


if __name__ == "__main__":
    main()
