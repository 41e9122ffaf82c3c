#!/usr/bin/env python3
# Copyright 2026 The socnav Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the bundled example scenes and run configs in data/.

The two scenes are deliberately small so the bundled configs train and
evaluate in seconds:

  corridor  a 32 x 6 m walled corridor with a walkway along the midline;
            the simplest possible scene for smoke-testing the full
            gen-data -> train -> eval pipeline.

  shortcut  a 30 x 20 m yard whose center is non-traversable (a lawn).
            The walkway takes a U-shaped detour around it, so cutting
            straight across is shorter but off the sanctioned route --
            the canonical setup for studying compliance-aware training.

Run from the repository root:  python3 tools/make_worlds.py
"""

import json
import pathlib

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"


def border_grid(width, height):
    """All-open cell rows with a one-cell blocked border ring."""
    rows = []
    for y in range(height):
        if y == 0 or y == height - 1:
            rows.append("#" * width)
        else:
            rows.append("#" + "." * (width - 2) + "#")
    return rows


def block_rect(rows, res, x0, y0, x1, y1):
    """Blocks every cell whose center lies in [x0,x1] x [y0,y1] meters."""
    out = []
    for cy, row in enumerate(rows):
        ry = (cy + 0.5) * res
        if not (y0 <= ry <= y1):
            out.append(row)
            continue
        chars = list(row)
        for cx in range(len(chars)):
            rx = (cx + 0.5) * res
            if x0 <= rx <= x1:
                chars[cx] = "#"
        out.append("".join(chars))
    return out


def leg(frm, to, steps):
    """Evenly spaced points from frm to to, inclusive."""
    return [
        [
            frm[0] + (to[0] - frm[0]) * i / steps,
            frm[1] + (to[1] - frm[1]) * i / steps,
        ]
        for i in range(steps + 1)
    ]


def chain(nodes):
    """Deduplicates consecutive coincident nodes and chains them with edges."""
    out = []
    for p in nodes:
        if out and abs(out[-1][0] - p[0]) < 1e-9 and abs(out[-1][1] - p[1]) < 1e-9:
            continue
        out.append(p)
    edges = [[i - 1, i] for i in range(1, len(out))]
    return {"nodes": out, "edges": edges}


def save(name, obj):
    path = DATA_DIR / name
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    res = 0.5

    # Corridor: 64 x 12 cells at 0.5 m, walkway nodes every meter on y=3.25.
    save(
        "corridor.json",
        {"resolution_m": res, "origin_m": [0.0, 0.0], "rows": border_grid(64, 12)},
    )
    save(
        "corridor_net.json",
        chain([[1.25 + 1.0 * i, 3.25] for i in range(30)]),
    )

    # Shortcut yard: 60 x 40 cells at 0.5 m with the central lawn blocked and
    # a U-shaped walkway skirting it (west leg down, south leg across, east
    # leg up).
    rows = border_grid(60, 40)
    rows = block_rect(rows, res, 10.0, 6.0, 20.0, 14.0)
    save(
        "shortcut.json",
        {"resolution_m": res, "origin_m": [0.0, 0.0], "rows": rows},
    )
    save(
        "shortcut_net.json",
        chain(
            leg([3.25, 10.25], [3.25, 3.25], 7)
            + leg([3.25, 3.25], [26.75, 3.25], 24)
            + leg([26.75, 3.25], [26.75, 10.25], 7)
        ),
    )

    # Small-but-real run configs. The policy is compact enough that the full
    # pipeline (gen-data, train --stage il, eval) completes in seconds.
    policy = {
        "history_len": 4,
        "chunk_len": 4,
        "patch_w": 5,
        "latent_dim": 16,
        "encoder_hidden": [32],
        "velocity_hidden": [32, 32],
        "flow_steps": 5,
        "sigma": 0.15,
    }
    common = {
        "seed": 7,
        "policy": policy,
        "il": {"lr": 0.005, "momentum": 0.9, "batch_size": 16, "steps": 300},
        "grpo": {
            "group_size": 6,
            "eps_clip": 0.2,
            "lr": 0.001,
            "iterations": 10,
            "tasks_per_iter": 2,
        },
        "data": {
            "n_standard": 30,
            "n_recovery": 10,
            "example_stride": 4,
            "l_min_m": 10.0,
            "densify_spacing_m": 0.25,
        },
    }
    save(
        "config_corridor.json",
        {
            **common,
            "scenario": "corridor.json",
            "network": "corridor_net.json",
            "out_dir": "out_corridor",
            "benchmark": {
                "bucket_lengths_m": [8.0, 16.0],
                "bucket_tolerance": 0.1,
                "pairs_per_bucket": 4,
                "auto_scale": True,
                "max_steps": 120,
                "with_pedestrians": True,
            },
        },
    )
    save(
        "config_shortcut.json",
        {
            **common,
            "scenario": "shortcut.json",
            "network": "shortcut_net.json",
            "out_dir": "out_shortcut",
            "rewards": {
                "lambda_social": 0.3,
                "lambda_expert": 1.0,
                "lambda_smooth": 0.3,
                "lambda_efficiency": 0.3,
            },
            "benchmark": {
                "bucket_lengths_m": [10.0, 25.0],
                "bucket_tolerance": 0.1,
                "pairs_per_bucket": 4,
                "auto_scale": True,
                "max_steps": 160,
                "with_pedestrians": True,
            },
        },
    )


if __name__ == "__main__":
    main()
