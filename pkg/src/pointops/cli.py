"""Command-line interface.

Subcommands cover the whole workflow: synthesize datasets, compute
per-pair optima, batch-evaluate, build a curve basis, fit style
profiles, apply/interpolate/chain them, and run the HTTP service.
``--json`` switches stdout to machine-readable reports; ``--no-meta``
strips timing so identical runs emit identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import basis as basis_mod
from . import dataset as dataset_mod
from . import evaluate as evaluate_mod
from . import fileio, oracle, style as style_mod, transform
from .dataset import DatasetError
from .fileio import CodecError


def _add_dataset_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--manifest", help="JSON-lines manifest of {input, gt} pairs")
    sub.add_argument("--input-dir", help="directory of input images")
    sub.add_argument("--gt-dir", help="directory of ground-truth images")
    sub.add_argument("--name", help="dataset name for reports")


def _resolve_dataset(args) -> dataset_mod.PairedDataset:
    if args.manifest:
        if args.input_dir or args.gt_dir:
            raise SystemExit("give either --manifest or --input-dir/--gt-dir, not both")
        return dataset_mod.load_manifest(args.manifest, name=args.name)
    if not (args.input_dir and args.gt_dir):
        raise SystemExit("need --manifest or both --input-dir and --gt-dir")
    return dataset_mod.load_dir_pair(args.input_dir, args.gt_dir, name=args.name)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        print(human, end="" if human.endswith("\n") else "\n")


def _maybe_write_report(args, report) -> None:
    if getattr(args, "report_dir", None):
        from . import report as report_mod  # matplotlib import stays lazy

        paths = report_mod.write_eval_report(report, args.report_dir, no_meta=args.no_meta)
        if not args.json:
            for p in paths:
                print(f"wrote {p}")


def cmd_gen_synth(args) -> int:
    ds = dataset_mod.generate_dataset(
        args.out,
        count=args.count,
        width=args.width,
        height=args.height,
        seed=args.seed,
        noise_sigma=args.noise_sigma,
        fmt=args.format,
    )
    payload = {"out": args.out, "pairs": len(ds), "seed": args.seed,
               "size": [args.width, args.height], "noise_sigma": args.noise_sigma}
    _emit(args, payload, f"generated {len(ds)} pairs under {args.out} (seed {args.seed})")
    return 0


def cmd_upper_bound(args) -> int:
    inp = fileio.read_image(args.input)
    gt = fileio.read_image(args.gt)
    rep = oracle.upper_bound(inp, gt)
    if args.dump_tf:
        transform.save_tone_curve(rep.curve, args.dump_tf)
    if args.dump_ccm:
        transform.save_color_matrix(rep.ccm, args.dump_ccm)
    payload = {
        "psnr_in": None if math.isinf(rep.psnr_in) else rep.psnr_in,
        "psnr_mid": None if math.isinf(rep.psnr_mid) else rep.psnr_mid,
        "psnr_out": None if math.isinf(rep.psnr_out) else rep.psnr_out,
        "tf": [float(v) for v in rep.curve],
        "ccm": [float(v) for v in rep.ccm.ravel()],
    }
    if not args.no_meta:
        payload["millis"] = rep.millis

    def fmt(v):
        return "inf" if math.isinf(v) else f"{v:.3f}"

    human = (
        f"psnr_in  {fmt(rep.psnr_in)} dB\n"
        f"psnr_mid {fmt(rep.psnr_mid)} dB\n"
        f"psnr_out {fmt(rep.psnr_out)} dB\n"
    )
    if not args.no_meta:
        human += f"millis   {rep.millis:.1f}\n"
    _emit(args, payload, human)
    return 0


def cmd_eval_upper(args) -> int:
    ds = _resolve_dataset(args)
    report = evaluate_mod.eval_upper_bound(ds)
    _maybe_write_report(args, report)
    _emit(args, evaluate_mod.report_to_json(report, no_meta=args.no_meta),
          evaluate_mod.report_to_table(report))
    return 0


def cmd_eval_style(args) -> int:
    styles = style_mod.load_style_set(args.set)
    profile = styles.get(args.style)
    ds = _resolve_dataset(args)
    report = evaluate_mod.eval_style(ds, profile)
    _maybe_write_report(args, report)
    _emit(args, evaluate_mod.report_to_json(report, no_meta=args.no_meta),
          evaluate_mod.report_to_table(report))
    return 0


def _optimal_curves(ds: dataset_mod.PairedDataset) -> list[np.ndarray]:
    curves = []
    for i in range(len(ds)):
        inp, gt = ds.load_pair(i)
        curves.append(oracle.optimal_tone_curve(oracle.bin_stats(inp, gt)))
    return curves


def cmd_build_basis(args) -> int:
    ds = _resolve_dataset(args)
    curves = _optimal_curves(ds)
    # the default component count caps at the corpus size; an explicit
    # --m out of range is still an error
    m = args.m if args.m is not None else min(basis_mod.DEFAULT_NUM_COMPONENTS, len(curves))
    b = basis_mod.build_basis(curves, m)
    basis_mod.save_basis(b, args.out)
    if args.report_dir:
        from . import report as report_mod

        m_max = min(args.rank_max, len(curves), 256)
        points = basis_mod.rank_error_curve(curves, m_max)
        paths = report_mod.write_rank_error_report(points, args.report_dir, basis=b)
        if not args.json:
            for p in paths:
                print(f"wrote {p}")
    payload = {"out": args.out, "m": b.m, "curves": len(curves),
               "sigma": [float(s) for s in b.sigma]}
    _emit(args, payload, f"built basis m={b.m} from {len(curves)} curves -> {args.out}")
    return 0


def cmd_fit_style(args) -> int:
    ds = _resolve_dataset(args)
    set_path = args.set
    try:
        styles = style_mod.load_style_set(set_path)
        if args.basis:
            raise SystemExit(f"{set_path} already exists; it fixes the basis, drop --basis")
    except FileNotFoundError:
        if not args.basis:
            raise SystemExit("new style set: need --basis <basis.json>")
        styles = style_mod.StyleSet(basis_mod.load_basis(args.basis))
    pairs = [ds.load_pair(i) for i in range(len(ds))]
    profile = style_mod.fit_style(pairs, styles.basis, ridge=args.ridge, name=args.style_name)
    styles.add(profile)
    style_mod.save_style_set(styles, set_path)
    payload = {"set": set_path, "style": profile.name, "pairs": profile.pair_count,
               "ridge": profile.ridge, "fit_rmse": profile.fit_rmse}
    _emit(args, payload,
          f"fit style {profile.name!r} on {profile.pair_count} pairs "
          f"(rmse {profile.fit_rmse:.4f}) -> {set_path}")
    return 0


def _dump_params(args, curve, ccm) -> None:
    if getattr(args, "dump_tf", None):
        transform.save_tone_curve(curve, args.dump_tf)
    if getattr(args, "dump_ccm", None):
        transform.save_color_matrix(ccm, args.dump_ccm)


def cmd_enhance(args) -> int:
    styles = style_mod.load_style_set(args.set)
    profile = styles.get(args.style)
    img = fileio.read_image(args.input)
    curve, ccm = style_mod.predict(profile, img)
    out = transform.enhance(img, curve, ccm)
    fileio.write_image(out, args.output)
    _dump_params(args, curve, ccm)
    _emit(args, {"output": args.output, "style": args.style},
          f"enhanced {args.input} with {args.style!r} -> {args.output}")
    return 0


def cmd_interp(args) -> int:
    styles = style_mod.load_style_set(args.set)
    mixed = style_mod.interpolate_styles(styles.get(args.style_a), styles.get(args.style_b), args.t)
    img = fileio.read_image(args.input)
    curve, ccm = style_mod.predict(mixed, img)
    out = transform.enhance(img, curve, ccm)
    fileio.write_image(out, args.output)
    _dump_params(args, curve, ccm)
    _emit(args, {"output": args.output, "style_a": args.style_a,
                 "style_b": args.style_b, "t": args.t},
          f"interpolated {args.style_a!r}/{args.style_b!r} at t={args.t:g} -> {args.output}")
    return 0


def cmd_chain(args) -> int:
    styles = style_mod.load_style_set(args.set)
    profiles = [styles.get(name) for name in args.styles]
    img = fileio.read_image(args.input)
    out = style_mod.chain_styles(img, profiles)
    fileio.write_image(out, args.output)
    _emit(args, {"output": args.output, "styles": args.styles},
          f"chained {', '.join(args.styles)} -> {args.output}")
    return 0


def cmd_serve(args) -> int:
    from . import server as server_mod

    styles = style_mod.load_style_set(args.set)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise SystemExit(f"--bind must look like HOST:PORT, got {args.bind!r}")
    server_mod.serve(styles, host=host, port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable stdout")
    common.add_argument("--no-meta", action="store_true",
                        help="omit timing so identical runs emit identical bytes")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for synthesis")

    parser = argparse.ArgumentParser(
        prog="pointops",
        description="global image enhancement: optimal tone curves, color matrices, styles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", parents=[common], help="generate a synthetic paired dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--format", choices=("ppm", "png"), default="ppm")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("upper-bound", parents=[common], help="per-pair optimal curve and matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--dump-tf")
    p.add_argument("--dump-ccm")
    p.set_defaults(func=cmd_upper_bound)

    p = sub.add_parser("eval-upper", parents=[common], help="upper-bound PSNRs over a dataset")
    _add_dataset_args(p)
    p.add_argument("--report-dir", help="write JSON/CSV/figures here")
    p.set_defaults(func=cmd_eval_upper)

    p = sub.add_parser("eval-style", parents=[common], help="style PSNRs over a dataset")
    p.add_argument("--set", required=True, help="style-set JSON file")
    p.add_argument("--style", required=True)
    _add_dataset_args(p)
    p.add_argument("--report-dir")
    p.set_defaults(func=cmd_eval_style)

    p = sub.add_parser("build-basis", parents=[common], help="SVD basis of optimal curves")
    _add_dataset_args(p)
    p.add_argument("--m", type=int, default=None,
                   help=f"component count (default min({basis_mod.DEFAULT_NUM_COMPONENTS}, corpus size))")
    p.add_argument("--out", required=True)
    p.add_argument("--report-dir")
    p.add_argument("--rank-max", type=int, default=20,
                   help="largest component count in the rank-error report")
    p.set_defaults(func=cmd_build_basis)

    p = sub.add_parser("fit-style", parents=[common], help="fit a style profile into a set")
    p.add_argument("--set", required=True)
    p.add_argument("--style-name", required=True)
    p.add_argument("--basis", help="basis JSON (only when creating a new set)")
    p.add_argument("--ridge", type=float, default=style_mod.DEFAULT_RIDGE)
    _add_dataset_args(p)
    p.set_defaults(func=cmd_fit_style)

    p = sub.add_parser("enhance", parents=[common], help="apply one style to an image")
    p.add_argument("--set", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dump-tf")
    p.add_argument("--dump-ccm")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("interp", parents=[common], help="blend two styles at t in [0,1]")
    p.add_argument("--set", required=True)
    p.add_argument("--style-a", required=True)
    p.add_argument("--style-b", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dump-tf")
    p.add_argument("--dump-ccm")
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("chain", parents=[common], help="apply styles in series")
    p.add_argument("--set", required=True)
    p.add_argument("--styles", nargs="+", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--set", required=True)
    p.add_argument("--bind", default="127.0.0.1:8765")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CodecError, DatasetError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
