"""Command-line entry point: ``maskrefine <command> [options]``.

Commands: gen-shapes, degrade, simulate-forward, train, refine, eval.
Settings come from built-in defaults, then ``--config FILE`` (key=value
lines), then explicit flags. Every command is a deterministic function of
its arguments, input files and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .core import RngStream, make_linear_schedule
from .data import gen_shapes
from .degradation import DegradeConfig, synthesize_coarse
from .denoiser import OracleDenoiser
from .forward import forward_trajectory
from .hires import HiresOptions, refine_hires, refine_instance
from .io import (
    load_config,
    load_image,
    load_mask,
    read_dataset,
    save_mask,
    write_dataset,
)
from .losses import LossConfig
from .metrics import boundary_iou, iou, mba
from .reverse import refine
from .tiny import load_model, save_model
from .training import TrainConfig, train

# stream roots per command, so commands never share random numbers
_STREAM = {"gen-shapes": 1, "degrade": 2, "simulate-forward": 3, "train": 4, "refine": 5}


class CliError(Exception):
    pass


def _settings(args):
    keys = ("seed", "steps", "schedule_start", "denoiser", "confidence", "error_rate",
            "input_size", "hires", "tau", "patch_size", "global_size", "iou_min", "iou_max",
            "max_attempts", "iterations", "lr", "alpha")
    overrides = {k: getattr(args, k, None) for k in keys}
    return load_config(args.config, overrides)


def _schedule(cfg):
    return make_linear_schedule(cfg.steps, cfg.schedule_start)


def _mask_files(path):
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.png"))
        if not files:
            raise CliError(f"no PNG files in {path}")
        return files
    if not path.exists():
        raise CliError(f"no such file: {path}")
    return [path]


def cmd_gen_shapes(args, cfg):
    samples = gen_shapes(args.n, args.size, RngStream(cfg.seed, (_STREAM["gen-shapes"],)),
                         channels=args.channels)
    write_dataset(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")


def cmd_degrade(args, cfg):
    files = _mask_files(args.input)
    dcfg = DegradeConfig(cfg.iou_min, cfg.iou_max, cfg.max_attempts)
    root = RngStream(cfg.seed, (_STREAM["degrade"],))
    out = Path(args.out)
    if len(files) > 1 or Path(args.input).is_dir():
        out.mkdir(parents=True, exist_ok=True)
        targets = [out / f.name for f in files]
    else:
        targets = [out]
    for i, (src, dst) in enumerate(zip(files, targets)):
        gt = load_mask(src)
        save_mask(synthesize_coarse(gt, dcfg, root.child(i)), dst)
    print(f"degraded {len(files)} mask(s)")


def cmd_simulate_forward(args, cfg):
    gt, coarse = load_mask(args.gt), load_mask(args.coarse)
    masks = forward_trajectory(gt, coarse, _schedule(cfg),
                               RngStream(cfg.seed, (_STREAM["simulate-forward"],)))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t, m in enumerate(masks):
        save_mask(m, out / f"m_{t:02d}.png")
    print(f"wrote m_0..m_{len(masks) - 1} to {out}")


def cmd_train(args, cfg):
    schedule = _schedule(cfg)
    root = RngStream(cfg.seed, (_STREAM["train"],))
    dcfg = DegradeConfig(cfg.iou_min, cfg.iou_max, cfg.max_attempts)
    dataset = [(image, gt, synthesize_coarse(gt, dcfg, root.child(1, i)))
               for i, (_, image, gt) in enumerate(read_dataset(args.data))]
    tcfg = TrainConfig(cfg.iterations, cfg.lr, LossConfig(alpha=cfg.alpha))
    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else print
    model = train(dataset, schedule, tcfg, root.child(2),
                  log_every=args.log_every if args.verbose else 0, log=log)
    save_model(model, args.out)
    print(f"saved model to {args.out}")


def _make_denoiser(cfg, args, shape):
    if cfg.denoiser == "oracle":
        if not args.gt:
            raise CliError("the oracle denoiser needs --gt")
        gt = load_mask(args.gt)
        if gt.shape != shape:
            raise CliError(f"--gt has shape {gt.shape}, coarse mask has {shape}")
        return OracleDenoiser(gt, cfg.confidence, cfg.error_rate, seed=cfg.seed,
                              input_size=cfg.input_size)
    return load_model(cfg.denoiser[len("tiny:"):], num_steps=cfg.steps, input_size=cfg.input_size)


def cmd_refine(args, cfg):
    image, coarse = load_image(args.image), load_mask(args.coarse)
    if image.shape[:2] != coarse.shape:
        raise CliError(f"image shape {image.shape[:2]} differs from mask shape {coarse.shape}")
    schedule = _schedule(cfg)
    denoiser = _make_denoiser(cfg, args, coarse.shape)
    rng = RngStream(cfg.seed, (_STREAM["refine"],))
    if args.dump_steps and (cfg.hires or args.instance):
        raise CliError("--dump-steps works only with plain refinement")
    if cfg.hires:
        opts = HiresOptions(cfg.global_size, cfg.tau, cfg.patch_size)
        result = refine_hires(image, coarse, denoiser, schedule, rng, opts)
    elif args.instance:
        result = refine_instance(image, coarse, denoiser, schedule, rng, margin=args.margin)
    else:
        res = refine(image, coarse, denoiser, schedule, rng,
                     keep_intermediates=bool(args.dump_steps))
        result = res.final_mask
        if args.dump_steps:
            out = Path(args.dump_steps)
            out.mkdir(parents=True, exist_ok=True)
            for k, m in enumerate(res.intermediate_masks):
                save_mask(m, out / f"m_{schedule.T - k:02d}.png")
    save_mask(result, args.out)
    print(f"wrote {args.out}")


def cmd_eval(args, cfg):
    preds, gts = _mask_files(args.pred), _mask_files(args.gt)
    if len(preds) == 1 and len(gts) == 1:
        pairs = [(preds[0].name, preds[0], gts[0])]
    else:
        by_name = {p.name: p for p in gts}
        missing = [p.name for p in preds if p.name not in by_name]
        if missing:
            raise CliError(f"no ground truth for {missing[0]}")
        pairs = [(p.name, p, by_name[p.name]) for p in preds]
    rows = []
    for name, p, g in pairs:
        pred, gt = load_mask(p), load_mask(g)
        if pred.shape != gt.shape:
            raise CliError(f"{name}: prediction {pred.shape} vs ground truth {gt.shape}")
        rows.append((name, iou(pred, gt), mba(pred, gt), boundary_iou(pred, gt)))
    width = max(len("id"), *(len(r[0]) for r in rows))
    print(f"{'id':<{width}}  {'iou':>8}  {'mba':>8}  {'boundary_iou':>12}")
    for name, a, b, c in rows:
        print(f"{name:<{width}}  {a:8.4f}  {b:8.4f}  {c:12.4f}")
    if len(rows) > 1:
        means = [sum(r[k] for r in rows) / len(rows) for k in (1, 2, 3)]
        print(f"{'mean':<{width}}  {means[0]:8.4f}  {means[1]:8.4f}  {means[2]:12.4f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "iou", "mba", "boundary_iou"])
            for name, a, b, c in rows:
                writer.writerow([name, repr(float(a)), repr(float(b)), repr(float(c))])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file (flags override it)")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--steps", type=int, help="diffusion steps T (default 6)")
    common.add_argument("--schedule-start", type=float, help="bar_beta at t=1 (default 0.8)")

    degrade = argparse.ArgumentParser(add_help=False)
    degrade.add_argument("--iou-min", type=float)
    degrade.add_argument("--iou-max", type=float)
    degrade.add_argument("--max-attempts", type=int)

    parser = argparse.ArgumentParser(prog="maskrefine", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-shapes", parents=[common], help="write a synthetic toy dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--channels", type=int, choices=(1, 3), default=3)
    p.add_argument("--out", required=True, help="dataset directory")

    p = sub.add_parser("degrade", parents=[common, degrade], help="synthesize coarse masks")
    p.add_argument("--in", dest="input", required=True, help="mask PNG or directory of PNGs")
    p.add_argument("--out", required=True, help="output PNG or directory")

    p = sub.add_parser("simulate-forward", parents=[common], help="write a forward trajectory")
    p.add_argument("--gt", required=True)
    p.add_argument("--coarse", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train", parents=[common, degrade], help="train the tiny denoiser")
    p.add_argument("--data", required=True, help="dataset directory (images/, masks/)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--iterations", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--alpha", type=float, help="texture loss weight (default 5)")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--log-every", type=int, default=500)

    p = sub.add_parser("refine", parents=[common], help="refine a coarse mask")
    p.add_argument("--image", required=True)
    p.add_argument("--coarse", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--denoiser", help="'oracle' (needs --gt) or 'tiny:<model path>'")
    p.add_argument("--gt", help="ground truth mask for the oracle denoiser")
    p.add_argument("--confidence", type=float, help="oracle confidence (default 1)")
    p.add_argument("--error-rate", type=float, help="oracle flip rate (default 0)")
    p.add_argument("--input-size", type=int, help="denoiser input size (default 64)")
    p.add_argument("--dump-steps", help="directory for m_T..m_0 PNGs")
    p.add_argument("--instance", action="store_true", help="refine inside the expanded bbox")
    p.add_argument("--margin", type=int, default=20)
    p.add_argument("--hires", action="store_const", const=True, default=None,
                   help="global steps on a downsized frame, final step on patches")
    p.add_argument("--tau", type=float)
    p.add_argument("--patch-size", type=int)
    p.add_argument("--global-size", type=int)

    p = sub.add_parser("eval", parents=[common], help="IoU / mBA / Boundary IoU table")
    p.add_argument("--pred", required=True, help="mask PNG or directory")
    p.add_argument("--gt", required=True, help="mask PNG or directory")
    p.add_argument("--csv", help="also write id,iou,mba,boundary_iou rows here")
    return parser


_COMMANDS = {
    "gen-shapes": cmd_gen_shapes,
    "degrade": cmd_degrade,
    "simulate-forward": cmd_simulate_forward,
    "train": cmd_train,
    "refine": cmd_refine,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _settings(args)
        _COMMANDS[args.command](args, cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"maskrefine {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
