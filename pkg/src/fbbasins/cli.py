"""Command-line front end.

Subcommands: certify, render, build {disjoint,lines,varieties}, hull,
verify.  Global flags: --config, --seed, --workers, --out.  Exit codes:
0 pass, 1 invariant violation, 2 config error, 3 builder stage failure.
FB_BASIN_WORKERS overrides --workers.  All outputs are deterministic in
config + seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import automaps, builders, hull, render, verify
from .errors import ConfigError, FBError, StageFailed
from .serialize import dump_file, dumps, load_file

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_STAGE_FAILED = 3


def _load_config(path):
    if path is None:
        raise ConfigError("--config is required for this subcommand")
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"config not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"config parse error at line {err.lineno}, column {err.colno}: "
            f"{err.msg}") from err


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_certify(args):
    cfg = _load_config(args.config)
    try:
        m = automaps.from_obj(cfg["map"])
        p = np.array([complex(re, im) for re, im in cfg["p"]])
        rho = float(cfg["rho"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad certify config: {err}") from err
    n = int(cfg.get("n_samples", 4096))
    unsafe = bool(cfg.get("unsafe", False))
    try:
        cert = automaps.certificate_from_sampling(m, p, rho, n_samples=n,
                                                  seed=args.seed, unsafe=unsafe)
    except FBError as err:
        print(dumps({"ok": False, "error": str(err)}))
        return EXIT_VIOLATION
    out = os.path.join(_out_dir(args), cfg.get("out", "certificate.json"))
    dump_file(cert.to_obj(), out)
    print(dumps({"ok": True, "certificate": cert.to_obj(), "out": out}))
    return EXIT_OK


def cmd_render(args):
    cfg = _load_config(args.config)
    job = render.job_from_config(cfg, out_dir=_out_dir(args), seed=args.seed,
                                 workers=args.workers)
    t0 = time.monotonic()
    summary = render.run_render(job)
    print(dumps(summary))
    print(f"rendered in {time.monotonic() - t0:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_build(args):
    cfg = _load_config(args.config)
    out = _out_dir(args)
    if args.kind == "disjoint":
        known = set(builders.DisjointConfig.__dataclass_fields__)
        bad = set(cfg) - known
        if bad:
            raise ConfigError(f"unknown disjoint-config fields: {sorted(bad)}")
        if args.seed is not None:
            cfg["seed"] = args.seed
        bcfg = builders.DisjointConfig(**cfg)
        seq, state = builders.build_disjoint_basins(bcfg)
        extra = {}
    elif args.kind == "lines":
        try:
            lines = tuple(builders.LineSpec.from_obj(o) for o in cfg.pop("lines"))
        except (KeyError, TypeError) as err:
            raise ConfigError(f"bad lines config: {err}") from err
        if args.seed is not None:
            cfg["seed"] = args.seed
        bcfg = builders.LinesConfig(lines=lines, **cfg)
        seq, state, log = builders.build_line_intersector(bcfg)
        extra = {"path_log": log}
    elif args.kind == "varieties":
        try:
            varieties = tuple(builders.VarietySpec.from_obj(o)
                              for o in cfg.pop("varieties"))
            excluded = np.array([complex(re, im) for re, im in
                                 cfg.pop("excluded_p")])
        except (KeyError, TypeError) as err:
            raise ConfigError(f"bad varieties config: {err}") from err
        if args.seed is not None:
            cfg["seed"] = args.seed
        bcfg = builders.VarietiesConfig(varieties=varieties,
                                        excluded_p=excluded, **cfg)
        seq, state, log, samples = builders.build_variety_container(bcfg)
        extra = {"tuck_log": log}
    else:
        raise ConfigError(f"unknown build kind {args.kind!r}")

    dump_file(seq.to_obj(), os.path.join(out, "sequence.json"))
    dump_file(state.to_obj(), os.path.join(out, "state.json"))
    _write_witness_csv(state, os.path.join(out, "witnesses.csv"))
    if extra:
        dump_file(extra, os.path.join(out, "logs.json"))
    print(dumps({"ok": True, "stages": state.stage,
                 "maps": len(state.maps), "factors": len(state.factors),
                 "out": out}))
    return EXIT_OK


def _write_witness_csv(state, path):
    rows = ["stage,basin,point_re0,point_im0,point_re1,point_im1,"
            "image_re0,image_im0,image_re1,image_im1"]
    for w in state.witnesses:
        vals = [w.stage, w.basin,
                w.point[0].real, w.point[0].imag,
                w.point[1].real, w.point[1].imag,
                w.image[0].real, w.image[0].imag,
                w.image[1].real, w.image[1].imag]
        rows.append(",".join(repr(v) for v in vals))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def cmd_hull(args):
    cfg = _load_config(args.config)
    out = _out_dir(args)
    try:
        op = cfg["op"]
        disks = [(complex(c[0], c[1]), float(r)) for c, r in cfg["disks"]]
        resolution = int(cfg.get("resolution", hull.DEFAULT_RESOLUTION))
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad hull config: {err}") from err
    k = hull.from_disks(disks, resolution=resolution)
    if op == "hull":
        result = hull.poly_hull(k)
        report = {"op": op, "convex": hull.is_poly_convex(result),
                  "area": result.area()}
    elif op == "connect":
        p1 = complex(*cfg["p1"])
        p2 = complex(*cfg["p2"])
        avoid = [complex(*q) for q in cfg.get("avoid", [])]
        result = hull.connect_avoiding(k, p1, p2, avoid)
        report = {"op": op, "convex": hull.is_poly_convex(result),
                  "area": result.area(),
                  "avoided": [[q.real, q.imag] for q in avoid]}
    else:
        raise ConfigError(f"unknown hull op {op!r}")
    base = os.path.join(out, cfg.get("out", "hull"))
    with open(base + ".pgm", "wb") as fh:
        fh.write(result.to_pgm())
    dump_file(result.sidecar(), base + ".json")
    print(dumps({"ok": True, **report, "out": base + ".pgm"}))
    return EXIT_OK


def cmd_verify(args):
    if args.suite not in verify.SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; "
                          f"choose from {', '.join(verify.SUITES)}")
    target = None
    if args.target:
        target = load_file(args.target)
    ok, report = verify.run_suite(args.suite, target=target, seed=args.seed or 0)
    print(dumps(report))
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fbbasins",
        description="sequence-attracting basins: build, certify, render, verify")
    ap.add_argument("--config", help="JSON config path")
    ap.add_argument("--seed", type=int, default=None, help="seed override")
    ap.add_argument("--workers", type=int, default=None,
                    help="worker count (FB_BASIN_WORKERS overrides)")
    ap.add_argument("--out", default=".", help="output directory")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("certify", help="measure a contraction certificate")
    sub.add_parser("render", help="render an attraction-time slice")
    bp = sub.add_parser("build", help="run a staged construction")
    bp.add_argument("kind", choices=("disjoint", "lines", "varieties"))
    sub.add_parser("hull", help="planar hull operations")
    vp = sub.add_parser("verify", help="run a named invariant suite")
    vp.add_argument("--suite", required=True)
    vp.add_argument("--target", help="JSON target (sequence or builder state)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"certify": cmd_certify, "render": cmd_render,
                "build": cmd_build, "hull": cmd_hull, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StageFailed as err:
        print(f"stage failed: {err}", file=sys.stderr)
        return EXIT_STAGE_FAILED
    except FBError as err:
        print(f"invariant violation: {err}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
