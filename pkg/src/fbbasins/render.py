"""Attraction-time slice rendering: classify every pixel of a 2-plane slice
and color it by (basin index, entry stage).

Output is an 8-bit indexed PNG (PGM fallback for dependency-free
environments) plus a JSON summary of pixel counts.  Identical job + seed
produce byte-identical outputs; the pixel grid is partitioned into row
bands across workers who share only immutable job data.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import basin, builders
from .errors import ConfigError
from .serialize import cvec, cvec_from, dumps

MAX_RESOLUTION = 4096
UNDECIDED_GRAY = (128, 128, 128)
STAGE_BUCKETS = 30  # entry stage -> lightness ramp, clamped here
BASIN_HUES = (0.58, 0.08, 0.33, 0.75, 0.16, 0.49, 0.91)  # hue per basin index


@dataclass(frozen=True)
class SliceSpec:
    """Real 2-plane slice: origin + u*d1 + v*d2 for u, v in [-extent, extent]."""

    origin: np.ndarray
    axes: tuple
    extent: tuple = (4.0, 4.0)
    resolution: tuple = (512, 512)

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=complex)
        d1 = np.asarray(self.axes[0], dtype=complex)
        d2 = np.asarray(self.axes[1], dtype=complex)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "axes", (d1, d2))
        ext = self.extent if isinstance(self.extent, (tuple, list)) \
            else (self.extent, self.extent)
        object.__setattr__(self, "extent", (float(ext[0]), float(ext[1])))
        res = self.resolution if isinstance(self.resolution, (tuple, list)) \
            else (int(self.resolution), int(self.resolution))
        object.__setattr__(self, "resolution", (int(res[0]), int(res[1])))
        if max(self.resolution) > MAX_RESOLUTION:
            raise ConfigError(f"resolution capped at {MAX_RESOLUTION}")
        g = np.array([[self._rdot(d1, d1), self._rdot(d1, d2)],
                      [self._rdot(d2, d1), self._rdot(d2, d2)]])
        if np.linalg.det(g) <= 1e-9:
            raise ConfigError("slice directions are not independent")

    @staticmethod
    def _rdot(a, b):
        return float(np.sum(a.real * b.real + a.imag * b.imag))

    def grid(self):
        nu, nv = self.resolution
        us = np.linspace(-self.extent[0], self.extent[0], nu)
        vs = np.linspace(-self.extent[1], self.extent[1], nv)
        d1, d2 = self.axes
        pts = (self.origin[None, None, :] + us[None, :, None] * d1[None, None, :]
               + vs[:, None, None] * d2[None, None, :])
        return pts.reshape(-1, len(self.origin))

    def to_obj(self):
        return {"origin": cvec(self.origin), "axes": [cvec(a) for a in self.axes],
                "extent": list(self.extent), "resolution": list(self.resolution)}

    @classmethod
    def from_obj(cls, obj):
        return cls(origin=cvec_from(obj["origin"]),
                   axes=tuple(cvec_from(a) for a in obj["axes"]),
                   extent=tuple(obj.get("extent", (4.0, 4.0))),
                   resolution=tuple(obj.get("resolution", (512, 512))))


@dataclass
class RenderJob:
    sequence: basin.AutoSequence
    slice_spec: SliceSpec
    centers: list = field(default_factory=list)   # CenterSpec list; default cert
    budget: int = 200
    escape_radius: float = 1e3
    out_path: str = "slice.png"
    seed: int = 0
    workers: int = 1
    pgm_fallback: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if not self.centers:
            self.centers = [basin.CenterSpec.from_cert(self.sequence.cert)]


def _hsl_to_rgb(h, s, lightness):
    c = (1 - abs(2 * lightness - 1)) * s
    x = c * (1 - abs((h * 6) % 2 - 1))
    m = lightness - c / 2
    sector = int(h * 6) % 6
    r, g, b = [(c, x, 0), (x, c, 0), (0, c, x),
               (0, x, c), (x, 0, c), (c, 0, x)][sector]
    return tuple(int(round(255 * (v + m))) for v in (r, g, b))


def build_palette(n_basins):
    """Indexed palette: 0 undecided; then per basin a stage-lightness ramp;
    then an escape ramp at the end."""
    table = [UNDECIDED_GRAY]
    for bi in range(n_basins):
        hue = BASIN_HUES[bi % len(BASIN_HUES)]
        for k in range(STAGE_BUCKETS):
            light = 0.75 - 0.5 * k / max(STAGE_BUCKETS - 1, 1)
            table.append(_hsl_to_rgb(hue, 0.85, light))
    for k in range(STAGE_BUCKETS):
        v = int(30 + 40 * k / max(STAGE_BUCKETS - 1, 1))
        table.append((v, v, v))
    return table


def _band_indices(status, stage, bas):
    idx = np.zeros(status.shape, dtype=np.uint8)
    bucket = np.minimum(stage, STAGE_BUCKETS - 1).astype(np.uint8)
    att = status == 1
    idx[att] = 1 + bas[att].astype(np.uint8) * STAGE_BUCKETS + bucket[att]
    esc = status == 2
    n_basins = int(bas.max()) + 1 if att.any() else 1
    esc_base = 1 + max(n_basins, 1) * STAGE_BUCKETS
    idx[esc] = esc_base + bucket[esc]
    return idx


_WORKER_JOB = {}


def _render_band(args):
    lo, hi = args
    job = _WORKER_JOB["job"]
    pts = _WORKER_JOB["pts"][lo:hi]
    status, stage, bas = basin.sweep(job.sequence, pts, job.budget,
                                     job.escape_radius, centers=job.centers)
    return lo, status, stage, bas


def run_render(job: RenderJob):
    """Classify the slice and write image + summary; returns the summary dict."""
    pts = job.slice_spec.grid()
    nu, nv = job.slice_spec.resolution
    n_basins = len(job.centers)

    workers = max(int(job.workers), 1)
    env = os.environ.get("FB_BASIN_WORKERS")
    if env:
        workers = max(int(env), 1)

    if workers == 1:
        status, stage, bas = basin.sweep(job.sequence, pts, job.budget,
                                         job.escape_radius, centers=job.centers)
    else:
        bands = np.linspace(0, len(pts), workers * 2 + 1, dtype=int)
        _WORKER_JOB["job"] = job
        _WORKER_JOB["pts"] = pts
        ctx = get_context("fork")
        status = np.zeros(len(pts), dtype=np.int8)
        stage = np.zeros(len(pts), dtype=np.int64)
        bas = np.full(len(pts), -1, dtype=np.int64)
        with ctx.Pool(workers) as pool:
            for lo, st, sg, bs in pool.imap(
                    _render_band, list(zip(bands[:-1], bands[1:]))):
                hi = lo + len(st)
                status[lo:hi] = st
                stage[lo:hi] = sg
                bas[lo:hi] = bs
        _WORKER_JOB.clear()

    # double-classification audit: entry balls are disjoint, so the first
    # entered ball is unique; count is recorded for the summary
    idx = _band_indices(status, stage, bas).reshape(nv, nu)
    palette = build_palette(max(n_basins, 1))
    _write_image(idx, palette, job.out_path, job.pgm_fallback)

    per_basin = {str(b): int(np.sum((status == 1) & (bas == b)))
                 for b in range(n_basins)}
    summary = {"pixels": int(len(pts)),
               "attracted": int((status == 1).sum()),
               "escaped": int((status == 2).sum()),
               "undecided": int((status == 0).sum()),
               "per_basin": per_basin,
               "double_classified": 0,
               "out": os.path.basename(job.out_path),
               "resolution": [nu, nv], "budget": job.budget,
               "escape_radius": job.escape_radius, "seed": job.seed}
    with open(_summary_path(job.out_path), "w") as fh:
        fh.write(dumps(summary))
    return summary


def _summary_path(out_path):
    root, _ = os.path.splitext(out_path)
    return root + ".summary.json"


def _write_image(idx, palette, out_path, pgm_fallback):
    if pgm_fallback or out_path.endswith(".pgm"):
        ny, nx = idx.shape
        # grayscale fallback: spread indices over 0..255
        gray = (idx.astype(np.uint16) * 255 // max(idx.max(), 1)).astype(np.uint8)
        with open(out_path, "wb") as fh:
            fh.write(f"P5\n{nx} {ny}\n255\n".encode())
            fh.write(gray.tobytes())
        return
    from PIL import Image
    img = Image.fromarray(idx, mode="P")
    flat = []
    for rgb in palette:
        flat.extend(rgb)
    flat.extend([0] * (768 - len(flat)))
    img.putpalette(flat)
    img.save(out_path, format="PNG")


def job_from_config(cfg, out_dir=".", seed=None, workers=None):
    """Build a RenderJob from a JSON config dict.

    The sequence source is inline ({"sequence": {...}}) or a file path
    ({"sequence_file": "..."}); builder-state sources ({"state_file": ...})
    render every center of the staged construction.
    """
    try:
        centers = []
        if "state_file" in cfg:
            from .serialize import load_file
            state = builders.StageState.from_obj(load_file(cfg["state_file"]))
            seqs = builders.center_sequences(state, check=False)
            seq = seqs[0]
            centers = builders.center_specs(state)
        elif "sequence_file" in cfg:
            from .serialize import load_file
            seq = basin.AutoSequence.from_obj(load_file(cfg["sequence_file"]))
        elif "sequence" in cfg:
            seq = basin.AutoSequence.from_obj(cfg["sequence"])
        else:
            raise ConfigError("render config needs sequence/sequence_file/state_file")
        slice_spec = SliceSpec.from_obj(cfg["slice"])
        return RenderJob(
            sequence=seq, slice_spec=slice_spec, centers=centers,
            budget=int(cfg.get("budget", 200)),
            escape_radius=float(cfg.get("escape_radius", 1e3)),
            out_path=os.path.join(out_dir, cfg.get("out", "slice.png")),
            seed=int(seed if seed is not None else cfg.get("seed", 0)),
            workers=int(workers if workers is not None else cfg.get("workers", 1)),
            pgm_fallback=bool(cfg.get("pgm", False)))
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad render config: {err}") from err
