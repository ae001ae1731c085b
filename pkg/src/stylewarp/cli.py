"""Batch command-line interface.

Subcommands: transfer (full pipeline), warp-only (correspondence warp of
the reference), similarity (one correlation row as a heatmap), evaluate
(Gram and content metrics as JSON lines), losses (the evaluable training
losses as one JSON object). All flags carry their defaults in --help;
--config loads the same keys from a JSON file, explicit flags win.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .correspondence import (
    SemanticMask,
    correlation_matrix,
    cyclic_warp_loss,
    downsample_mask,
    mask_warp_loss,
    similarity_map,
    warp,
    warp_mask,
)
from .diffusion import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_CNT_SCALE,
    DEFAULT_LAMBDA,
    DEFAULT_LAMBDA_C,
    DEFAULT_LAMBDA_M,
    DEFAULT_STEPS_INVERSION,
    DEFAULT_STEPS_SAMPLING,
    DEFAULT_TOTAL_STEPS,
    StyleConditioning,
    ToyDenoiser,
    forward_noise,
    make_schedule,
    noise_pred_loss,
    stage1_total_loss,
)
from .features import DEFAULT_SCALES, DEFAULT_STRIDE, extract_features, feature_channels
from .metrics import content_distance, gram_loss
from .pipeline import (
    DEFAULT_GAMMA,
    DEFAULT_TAU,
    TransferConfig,
    pad_to_multiple,
)
from .tensor_io import read_png, read_png_labels, write_png

_CONFIG_KEYS = set(TransferConfig.__dataclass_fields__)


def _add_pair_flags(p, with_out=True):
    p.add_argument("--input", help="input portrait PNG (required)")
    p.add_argument("--reference", help="reference portrait PNG (required)")
    if with_out:
        p.add_argument("--out", help="output PNG path (required)")


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


def _add_feature_flags(p):
    p.add_argument(
        "--stride", type=int, default=DEFAULT_STRIDE, help="pixels per feature cell"
    )
    p.add_argument(
        "--scales", type=int, default=DEFAULT_SCALES, help="feature pyramid levels"
    )


def _add_schedule_flags(p):
    p.add_argument(
        "--total-steps", type=int, default=DEFAULT_TOTAL_STEPS,
        help="diffusion schedule length T",
    )
    p.add_argument(
        "--beta-start", type=float, default=DEFAULT_BETA_START,
        help="linear beta schedule start",
    )
    p.add_argument(
        "--beta-end", type=float, default=DEFAULT_BETA_END,
        help="linear beta schedule end",
    )


def build_parser():
    """Returns the parser plus a name -> subparser map for default injection."""
    parser = argparse.ArgumentParser(
        prog="stylewarp",
        description="Semantic-aware portrait style transfer, deterministic core.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    t = sub.add_parser(
        "transfer", formatter_class=fmt, help="run the full style transfer pipeline"
    )
    _add_pair_flags(t)
    t.add_argument("--config", help="JSON file with TransferConfig keys")
    t.add_argument("--input-mask", help="label PNG aligned with the input")
    t.add_argument("--reference-mask", help="label PNG aligned with the reference")
    t.add_argument(
        "--regions",
        help="comma-separated labels kept from the warped reference "
        "(requires --input-mask)",
    )
    t.add_argument(
        "--gamma", type=float, default=DEFAULT_GAMMA,
        help="stylization strength in [0, 1]",
    )
    t.add_argument(
        "--tau", type=float, default=DEFAULT_TAU, help="softmax warp temperature"
    )
    _add_feature_flags(t)
    t.add_argument(
        "--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
        help="image-branch attention weight",
    )
    t.add_argument(
        "--cnt-scale", type=float, default=DEFAULT_CNT_SCALE,
        help="content conditioning scale",
    )
    t.add_argument(
        "--steps-inv", dest="steps_inversion", type=int,
        default=DEFAULT_STEPS_INVERSION, help="DDIM inversion steps",
    )
    t.add_argument(
        "--steps-sample", dest="steps_sampling", type=int,
        default=DEFAULT_STEPS_SAMPLING, help="DDIM sampling steps",
    )
    t.add_argument("--seed", type=int, default=0, help="denoiser weight seed")
    t.add_argument(
        "--feather", type=float, default=0.0,
        help="region blend ramp width in pixels",
    )
    t.add_argument(
        "--sim-query", type=int, default=None,
        help="content cell index; writes a similarity heatmap when set",
    )
    t.add_argument(
        "--downsample-latent", action="store_true",
        help="box-downsample images 2x before the diffusion stages",
    )
    _add_schedule_flags(t)

    w = sub.add_parser(
        "warp-only", formatter_class=fmt,
        help="write only the correspondence-warped reference",
    )
    _add_pair_flags(w)
    w.add_argument(
        "--tau", type=float, default=DEFAULT_TAU, help="softmax warp temperature"
    )
    _add_feature_flags(w)

    s = sub.add_parser(
        "similarity", formatter_class=fmt,
        help="write the similarity heatmap for one content cell",
    )
    _add_pair_flags(s)
    s.add_argument(
        "--query", type=int, required=True, help="content grid cell index"
    )
    _add_feature_flags(s)

    e = sub.add_parser(
        "evaluate", formatter_class=fmt,
        help="emit Gram loss and content distance as JSON lines",
    )
    e.add_argument("--input", help="input portrait PNG")
    e.add_argument("--reference", help="reference portrait PNG")
    e.add_argument(
        "--pair-list",
        help="file with one 'input reference' pair per line; overrides "
        "--input/--reference",
    )
    e.add_argument("--out", help="write JSON lines here instead of stdout")
    _add_feature_flags(e)

    l = sub.add_parser(
        "losses", formatter_class=fmt,
        help="evaluate the training loss functionals on one pair",
    )
    _add_pair_flags(l, with_out=False)
    l.add_argument("--input-mask", help="label PNG aligned with the input")
    l.add_argument("--reference-mask", help="label PNG aligned with the reference")
    l.add_argument(
        "--tau", type=float, default=DEFAULT_TAU, help="softmax warp temperature"
    )
    _add_feature_flags(l)
    l.add_argument(
        "--lambda-c", type=float, default=DEFAULT_LAMBDA_C,
        help="cyclic consistency weight",
    )
    l.add_argument(
        "--lambda-m", type=float, default=DEFAULT_LAMBDA_M,
        help="mask warping weight",
    )
    l.add_argument(
        "--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
        help="image-branch attention weight",
    )
    l.add_argument("--seed", type=int, default=0, help="noise and denoiser seed")
    l.add_argument(
        "--t", type=int, default=None,
        help="noising timestep for the prediction loss (default: T // 2)",
    )
    _add_schedule_flags(l)
    subparsers = {
        "transfer": t,
        "warp-only": w,
        "similarity": s,
        "evaluate": e,
        "losses": l,
    }
    return parser, subparsers


def _cmd_transfer(args) -> int:
    _require(args, "input", "reference", "out")
    regions = None
    if args.regions is not None:
        if isinstance(args.regions, (list, tuple)):
            regions = [int(r) for r in args.regions]
        else:
            regions = [int(r) for r in str(args.regions).split(",") if r != ""]
    cfg = TransferConfig(
        input_path=args.input,
        reference_path=args.reference,
        out_path=args.out,
        input_mask_path=args.input_mask,
        reference_mask_path=args.reference_mask,
        regions=regions,
        gamma=args.gamma,
        tau=args.tau,
        stride=args.stride,
        scales=args.scales,
        lam=args.lam,
        cnt_scale=args.cnt_scale,
        steps_inversion=args.steps_inversion,
        steps_sampling=args.steps_sampling,
        seed=args.seed,
        feather=args.feather,
        sim_query=args.sim_query,
        downsample_latent=args.downsample_latent,
        total_steps=args.total_steps,
        beta_start=args.beta_start,
        beta_end=args.beta_end,
    )
    pipeline.run_transfer(cfg)
    return 0


def _load_pair(args):
    img_in = read_png(args.input)
    img_ref = read_png(args.reference)
    if img_in.shape[2] != img_ref.shape[2]:
        if img_in.shape[2] == 1:
            img_in = np.repeat(img_in, 3, axis=2)
        if img_ref.shape[2] == 1:
            img_ref = np.repeat(img_ref, 3, axis=2)
    return img_in, img_ref


def _cmd_warp_only(args) -> int:
    _require(args, "input", "reference", "out")
    img_in, img_ref = _load_pair(args)
    pad_in = pad_to_multiple(img_in, args.stride)
    pad_ref = pad_to_multiple(img_ref, args.stride)
    f_in = extract_features(pad_in, args.stride, args.scales)
    f_ref = extract_features(pad_ref, args.stride, args.scales)
    corr = correlation_matrix(f_in, f_ref)
    warped = warp(corr, pad_ref, args.tau)
    warped = np.clip(warped[: img_in.shape[0], : img_in.shape[1]], 0.0, 1.0)
    write_png(warped, args.out)
    return 0


def _cmd_similarity(args) -> int:
    _require(args, "input", "reference", "out")
    img_in, img_ref = _load_pair(args)
    pad_in = pad_to_multiple(img_in, args.stride)
    pad_ref = pad_to_multiple(img_ref, args.stride)
    f_in = extract_features(pad_in, args.stride, args.scales)
    f_ref = extract_features(pad_ref, args.stride, args.scales)
    corr = correlation_matrix(f_in, f_ref)
    sim = similarity_map(corr, args.query, args.stride)
    sim = sim[: img_ref.shape[0], : img_ref.shape[1]]
    write_png(sim, args.out)
    return 0


def _evaluate_pair(path_a, path_b, stride, scales) -> str:
    a = read_png(path_a)
    b = read_png(path_b)
    if a.shape[2] != b.shape[2]:
        if a.shape[2] == 1:
            a = np.repeat(a, 3, axis=2)
        if b.shape[2] == 1:
            b = np.repeat(b, 3, axis=2)
    # unequal dims: replicate-pad both to the common bounding size
    h = max(a.shape[0], b.shape[0])
    w = max(a.shape[1], b.shape[1])
    a = np.pad(a, ((0, h - a.shape[0]), (0, w - a.shape[1]), (0, 0)), mode="edge")
    b = np.pad(b, ((0, h - b.shape[0]), (0, w - b.shape[1]), (0, 0)), mode="edge")
    record = {
        "pair": f"{path_a}|{path_b}",
        "gram": gram_loss(a, b, stride, scales),
        "content": content_distance(a, b, stride, scales),
    }
    return json.dumps(record)


def _cmd_evaluate(args) -> int:
    pairs = []
    if args.pair_list:
        for line in Path(args.pair_list).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"pair list line needs two paths, got: {line!r}")
            pairs.append((parts[0], parts[1]))
    elif args.input and args.reference:
        pairs.append((args.input, args.reference))
    else:
        raise ValueError("evaluate needs --pair-list or both --input and --reference")
    lines = [
        _evaluate_pair(a, b, args.stride, args.scales) for a, b in pairs
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_losses(args) -> int:
    _require(args, "input", "reference")
    img_in, img_ref = _load_pair(args)
    if img_in.shape[2] == 1:
        img_in = np.repeat(img_in, 3, axis=2)
        img_ref = np.repeat(img_ref, 3, axis=2)
    mult = 2 * args.stride
    pad_in = pad_to_multiple(img_in, mult)
    pad_ref = pad_to_multiple(img_ref, mult)
    f_in = extract_features(pad_in, args.stride, args.scales)
    f_ref = extract_features(pad_ref, args.stride, args.scales)
    corr = correlation_matrix(f_in, f_ref)

    l_cyc = cyclic_warp_loss(pad_ref, corr, args.tau)

    l_mask = None
    if args.input_mask and args.reference_mask:
        lab_in = pad_to_multiple(read_png_labels(args.input_mask), mult)
        lab_ref = pad_to_multiple(read_png_labels(args.reference_mask), mult)
        k = int(max(lab_in.max(), lab_ref.max())) + 1
        mask_in = downsample_mask(
            SemanticMask(lab_in, k), f_in.grid_h, f_in.grid_w
        )
        warped_soft = warp_mask(corr, SemanticMask(lab_ref, k), args.tau)
        l_mask = mask_warp_loss(mask_in, warped_soft)

    sched = make_schedule(args.total_steps, args.beta_start, args.beta_end)
    t = args.t if args.t is not None else args.total_steps // 2
    z0 = np.ascontiguousarray(pad_in.transpose(2, 0, 1))
    rng = np.random.default_rng(args.seed)
    eps = rng.standard_normal(z0.shape).astype(np.float32)
    z_t = forward_noise(z0, t, eps, sched)

    from .pipeline import build_text_tokens, pool_image_tokens
    from .wavelet import high_freq_conditioning

    hf = high_freq_conditioning(pad_in)
    token_dim = feature_channels(3, args.scales)
    cond = StyleConditioning(
        build_text_tokens(token_dim), pool_image_tokens(f_in.data), args.lam
    )
    denoiser = ToyDenoiser(
        channels=3, cnt_channels=hf.shape[0], token_dim=token_dim, seed=args.seed
    )
    l_noise = noise_pred_loss(eps, denoiser(z_t, t, hf, cond))

    total = stage1_total_loss(
        l_noise, l_cyc, 0.0 if l_mask is None else l_mask,
        args.lambda_c, args.lambda_m,
    )
    record = {
        "noise_pred": l_noise,
        "cyclic": l_cyc,
        "mask_warp": l_mask,
        "stage1_total": total,
    }
    sys.stdout.write(json.dumps(record) + "\n")
    return 0


_COMMANDS = {
    "transfer": _cmd_transfer,
    "warp-only": _cmd_warp_only,
    "similarity": _cmd_similarity,
    "evaluate": _cmd_evaluate,
    "losses": _cmd_losses,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)

    parser, subparsers = build_parser()
    if known.config:
        try:
            loaded = json.loads(Path(known.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {known.config}: {exc}", file=sys.stderr)
            return 1
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            print(
                f"error: unknown config keys: {sorted(unknown)}", file=sys.stderr
            )
            return 1
        remap = {
            "input_path": "input",
            "reference_path": "reference",
            "out_path": "out",
            "input_mask_path": "input_mask",
            "reference_mask_path": "reference_mask",
        }
        defaults = {remap.get(k, k): v for k, v in loaded.items()}
        for sp in subparsers.values():
            sp.set_defaults(**defaults)

    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
