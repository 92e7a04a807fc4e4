"""Write the meshes that the golden-file tests render.

Run from the repository root:

    python3 demos/make_golden_inputs.py

It regenerates ``tests/golden/torus.obj`` and ``tests/golden/bend.zskin``.
The frozen outputs next to them must be regenerated afterwards with
``python3 tests/test_golden.py --refresh``.
"""
import json
import math
import os

import numpy as np

from nprkit import shapes
from nprkit.io.obj import dump_obj

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "golden")


def bend_document():
    # a tube along z with two bones; the upper bone swings 60 degrees about x
    tube = shapes.cylinder(0.3, height=2.0, n_around=24, n_along=12)
    z = tube.positions[:, 2]
    w_tip = np.clip((z + 0.25) / 0.5, 0.0, 1.0)
    half = math.radians(60) / 2
    swing = [math.cos(half), math.sin(half), 0.0, 0.0]
    return {
        "format": "zskin-1",
        "mesh": {
            "positions": np.round(tube.positions, 12).tolist(),
            "triangles": tube.faces.tolist(),
        },
        "bones": [
            {"name": "root", "parent": None, "bind": {"translation": [0, 0, -1]}},
            {"name": "tip", "parent": "root", "bind": {"translation": [0, 0, 1]}},
        ],
        "weights": [
            [["root", round(1.0 - float(w), 12)], ["tip", round(float(w), 12)]] for w in w_tip
        ],
        "animations": {
            "bend": {
                "tip": {
                    "times": [0.0, 1.0],
                    "rotations": [[1, 0, 0, 0], swing],
                    # keys replace the whole local transform, so the offset is repeated
                    "translations": [[0, 0, 1], [0, 0, 1]],
                }
            },
        },
    }


def main():
    os.makedirs(HERE, exist_ok=True)
    with open(os.path.join(HERE, "torus.obj"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_obj(shapes.torus(n_major=32, n_minor=16)))
    with open(os.path.join(HERE, "bend.zskin"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(bend_document(), fh, indent=None, separators=(",", ":"))
        fh.write("\n")


if __name__ == "__main__":
    main()
