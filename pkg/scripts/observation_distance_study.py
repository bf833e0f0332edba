#!/usr/bin/env python3
"""Temporal reconstruction quality as the sensor moves away from the source.

Drives the CLI in invert-rho-volterra mode for a spatial factor supported
on (0.15, 0.45) (offset bump at 0.3 with width 0.3) while sweeping the
observation point x0 across the interval, once with exact traces and once
with 1% relative trace noise.

Two effects show up in the table:

* Clean data: the trace amplitude decays as x0 leaves the support, the
  Volterra kernel becomes worse conditioned, and the discretization error
  grows with distance.
* Relative noise: the CLI scales the noise to the trace's own amplitude,
  so the noise-to-signal ratio is the same at every sensor and the error
  stays of one order across the sweep instead of blowing up.

Writes one CSV per run into a temp directory and prints a summary table.

Usage: python3 scripts/observation_distance_study.py
"""

import json
import tempfile
from pathlib import Path

from fracsource.cli import run

X0S = [0.2, 0.3, 0.4, 0.55, 0.7, 0.85]
SUPPORT = (0.15, 0.45)


def distance_to_support(x0: float) -> float:
    lo, hi = SUPPORT
    return max(lo - x0, x0 - hi, 0.0)


def one_error(tmp: str, x0: float, noise_level: float) -> float:
    cfg = {
        "mode": "invert-rho-volterra",
        "alpha": 0.5,
        "N": 16,
        "n_steps": 512,
        "x0": x0,
        "noise_level": noise_level,
        "seed": 42,
        "g": {
            "profile": "offset_bump",
            "params": {"center_frac": 0.3, "width_frac": 0.3},
        },
        "rho": {"profile": "affine", "params": {"intercept": 1.0, "slope": 0.5}},
    }
    path = Path(tmp) / f"x0_{x0}_noise_{noise_level}.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    code = run(str(path))
    if code != 0:
        raise RuntimeError(f"CLI run failed with exit code {code}")
    for line in path.with_suffix(".csv").read_text(encoding="utf-8").splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        if key == "rel_l2_error":
            return float(value)
    raise RuntimeError("output carries no rel_l2_error")


def main():
    print(f"{'x0':>6} {'dist(x0, supp g)':>17} {'err (clean)':>12} {'err (1% noise)':>15}")
    with tempfile.TemporaryDirectory() as tmp:
        for x0 in X0S:
            clean = one_error(tmp, x0, 0.0)
            noisy = one_error(tmp, x0, 0.01)
            print(
                f"{x0:6.2f} {distance_to_support(x0):17.2f}"
                f" {clean:12.3e} {noisy:15.3e}"
            )


if __name__ == "__main__":
    main()
