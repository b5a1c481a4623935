#!/usr/bin/env python3
"""Render an attraction-time slice of the Henon-map basin.

Colors each pixel of the z-plane slice (w frozen at the fixed point) by
entry stage into the certificate ball; escaped pixels ramp dark gray.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fbbasins import automaps as am  # noqa: E402
from fbbasins import basin, render  # noqa: E402


def main():
    h = am.Henon(0.1, 0.18)
    p = np.array([0.2, 0.2], dtype=complex)
    cert = am.certificate_from_sampling(h, p, 0.01)
    seq = basin.AutoSequence([h], cert, cyclic=True)

    spec = render.SliceSpec(
        origin=p, axes=(np.array([1.0, 0.0]), np.array([1.0j, 0.0])),
        extent=(3.0, 3.0), resolution=(512, 512))
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "henon_slice.png")
    job = render.RenderJob(sequence=seq, slice_spec=spec, budget=200,
                           escape_radius=1e3, out_path=out, seed=0)
    summary = render.run_render(job)
    print(f"attracted {summary['attracted']}, escaped {summary['escaped']}, "
          f"undecided {summary['undecided']} -> {out}")


if __name__ == "__main__":
    main()
