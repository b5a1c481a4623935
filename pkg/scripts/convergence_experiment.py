#!/usr/bin/env python3
"""Measure the limit-map convergence rate for the two reference maps.

Prints the per-stage Cauchy differences, the fitted geometric ratio, and
the certified prediction r^2/s; writes CSV reports next to this script.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fbbasins import automaps as am  # noqa: E402
from fbbasins import basin  # noqa: E402


def reference_sequence():
    f = am.Composition((am.Shear(axis=0, g=[0, 0, 2.0]), am.HalfScale(2)))
    cert = am.ContractionCertificate(
        p=np.zeros(2, dtype=complex), rho=0.05, s=0.45, r=0.55,
        delta=am.schwarz_delta(0.05, 0.45, 0.55), quad_C=2.1)
    return "half_scale_shear", basin.AutoSequence([f], cert, cyclic=True)


def henon_sequence():
    h = am.Henon(0.1, 0.18)
    p = np.array([0.2, 0.2], dtype=complex)
    cert = am.certificate_from_sampling(h, p, 0.01)
    return "henon", basin.AutoSequence([h], cert, cyclic=True)


def main():
    out_dir = os.path.dirname(os.path.abspath(__file__))
    for name, seq in (reference_sequence(), henon_sequence()):
        rep = basin.convergence_report(seq, n_samples=256, j_max=20)
        print(f"== {name} ==")
        print(f"  certified bracket (s, r) = ({seq.cert.s:.4f}, {seq.cert.r:.4f})")
        print(f"  predicted ratio r^2/s    = {rep.predicted_ratio:.4f}")
        print(f"  fitted ratio             = {rep.fitted_ratio:.4f}")
        print(f"  stages fitted            = {rep.used_stages}")
        print(f"  observed_R, observed_eps = {rep.observed_R:.4g}, "
              f"{rep.observed_eps:.4g}")
        path = os.path.join(out_dir, f"convergence_{name}.csv")
        with open(path, "w") as fh:
            fh.write(rep.to_csv())
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()
