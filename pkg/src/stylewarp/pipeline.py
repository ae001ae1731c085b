"""End-to-end transfer: features, correspondence, warp, conditioning,
latent initialization, DDIM inversion and sampling, artifact output.

Encoding to latent space is the identity image-to-tensor mapping (or an
optional 2x box downsample), so every latent-space formula runs
unchanged without a pretrained autoencoder. Images are replicate-padded
to a working multiple before processing and cropped back at the end.
Identical configs produce bitwise identical outputs.
"""

import math
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correspondence import (
    SemanticMask,
    correlation_matrix,
    similarity_map,
    warp,
)
from .diffusion import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_CNT_SCALE,
    DEFAULT_LAMBDA,
    DEFAULT_STEPS_INVERSION,
    DEFAULT_STEPS_SAMPLING,
    DEFAULT_TOTAL_STEPS,
    StyleConditioning,
    ToyDenoiser,
    ddim_invert,
    ddim_sample,
    make_schedule,
)
from .features import (
    DEFAULT_SCALES,
    DEFAULT_STRIDE,
    extract_features,
    feature_channels,
)
from .kernels import bilinear_up2, box_down2
from .latent import interpolate_conditioning, interpolate_strength, adain_wavelet_init
from .tensor_io import (
    chw_to_image,
    image_to_chw,
    read_png,
    read_png_labels,
    write_png,
)
from .wavelet import high_freq_conditioning

DEFAULT_GAMMA = 1.0
DEFAULT_TAU = 0.01

# the fixed pseudo-prompt: one seeded token bundle reused by every run
TEXT_TOKEN_SEED = 1001
TEXT_TOKEN_COUNT = 8
IMAGE_TOKENS_PER_AXIS = 4

DENOISER_HIDDEN = 16
DENOISER_DK = 8


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@contextmanager
def _stage(name):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(f"stage '{name}': {exc}") from exc


@dataclass
class TransferConfig:
    """All knobs of one transfer run; defaults mirror the CLI."""

    input_path: str
    reference_path: str
    out_path: str
    input_mask_path: str = None
    reference_mask_path: str = None
    regions: list = None
    gamma: float = DEFAULT_GAMMA
    tau: float = DEFAULT_TAU
    stride: int = DEFAULT_STRIDE
    scales: int = DEFAULT_SCALES
    lam: float = DEFAULT_LAMBDA
    cnt_scale: float = DEFAULT_CNT_SCALE
    steps_inversion: int = DEFAULT_STEPS_INVERSION
    steps_sampling: int = DEFAULT_STEPS_SAMPLING
    seed: int = 0
    feather: float = 0.0
    sim_query: int = None
    downsample_latent: bool = False
    total_steps: int = DEFAULT_TOTAL_STEPS
    beta_start: float = DEFAULT_BETA_START
    beta_end: float = DEFAULT_BETA_END

    def validate(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.stride < 1 or self.scales < 1:
            raise ValueError("stride and scales must be positive")
        if self.steps_inversion < 1 or self.steps_sampling < 1:
            raise ValueError("step counts must be >= 1")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.feather < 0:
            raise ValueError(f"feather must be >= 0, got {self.feather}")


def pad_to_multiple(image: np.ndarray, multiple: int) -> np.ndarray:
    """Replicate-pad bottom/right so both spatial dims divide `multiple`."""
    h, w = image.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return image
    pad = ((0, ph), (0, pw)) + ((0, 0),) * (image.ndim - 2)
    return np.pad(image, pad, mode="edge")


def _to_rgb(image: np.ndarray) -> np.ndarray:
    if image.shape[2] == 3:
        return image
    return np.repeat(image, 3, axis=2)


def build_text_tokens(token_dim: int) -> np.ndarray:
    """The constant pseudo-text embedding, [TEXT_TOKEN_COUNT, token_dim]."""
    rng = np.random.default_rng(TEXT_TOKEN_SEED)
    return rng.standard_normal((TEXT_TOKEN_COUNT, token_dim)).astype(np.float32)


def pool_image_tokens(feature_data: np.ndarray) -> np.ndarray:
    """Mean-pool a [gh, gw, C] feature grid into at most 4x4 tokens."""
    gh, gw, c = feature_data.shape
    rows = np.array_split(
        feature_data.astype(np.float64), min(IMAGE_TOKENS_PER_AXIS, gh), axis=0
    )
    tokens = []
    for r in rows:
        for b in np.array_split(r, min(IMAGE_TOKENS_PER_AXIS, gw), axis=1):
            tokens.append(b.mean(axis=(0, 1)))
    return np.asarray(tokens, dtype=np.float32)


def region_transfer(
    warped: np.ndarray,
    input_img: np.ndarray,
    input_mask: SemanticMask,
    regions,
    feather: float = 0.0,
) -> np.ndarray:
    """Keep warped pixels inside the selected labels, input pixels elsewhere.

    feather > 0 blends across the boundary with a linear ramp of that
    total width, centered on the label edge.
    """
    if warped.shape != input_img.shape:
        raise ValueError(f"shape mismatch: {warped.shape} vs {input_img.shape}")
    if input_mask.labels.shape != warped.shape[:2]:
        raise ValueError(
            f"mask {input_mask.labels.shape} does not match image {warped.shape[:2]}"
        )
    regions = sorted(set(int(r) for r in regions))
    bad = [r for r in regions if not 0 <= r < input_mask.num_classes]
    if bad:
        raise ValueError(
            f"unknown labels {bad}; mask has {input_mask.num_classes} classes"
        )
    keep = np.isin(input_mask.labels, regions)
    if feather > 0:
        from scipy.ndimage import distance_transform_edt

        d_in = distance_transform_edt(keep)
        d_out = distance_transform_edt(~keep)
        w = np.clip(0.5 + (d_in - d_out) / float(feather), 0.0, 1.0)
        w = w.astype(np.float32)
    else:
        w = keep.astype(np.float32)
    w = w[:, :, None]
    out = w * warped + (np.float32(1.0) - w) * input_img
    return np.ascontiguousarray(out, dtype=np.float32)


def _encode(image: np.ndarray, downsample: bool) -> np.ndarray:
    if downsample:
        image = box_down2(image)
    return image_to_chw(image)


def _decode(latent: np.ndarray, downsample: bool) -> np.ndarray:
    if downsample:
        latent = bilinear_up2(latent)
    return np.clip(chw_to_image(latent), 0.0, 1.0)


def _latent_res(image: np.ndarray, downsample: bool) -> np.ndarray:
    return box_down2(image) if downsample else image


def _read_mask(path, num_classes=None) -> SemanticMask:
    labels = read_png_labels(path)
    k = int(labels.max()) + 1 if num_classes is None else num_classes
    return SemanticMask(labels, max(k, 1))


def artifact_paths(out_path) -> dict:
    base = Path(out_path)
    stem = base.with_suffix("")
    return {
        "output": base,
        "warped": Path(f"{stem}.warped.png"),
        "similarity": Path(f"{stem}.sim.png"),
    }


def run_transfer(cfg: TransferConfig) -> np.ndarray:
    """Run the full pipeline and write the output artifacts.

    Returns the final output image (original input dimensions). The
    warped reference is always written next to the output; a similarity
    heatmap is written when cfg.sim_query is set.
    """
    cfg.validate()
    paths = artifact_paths(cfg.out_path)

    with _stage("read input"):
        raw_in = _to_rgb(read_png(cfg.input_path))
    with _stage("read reference"):
        raw_ref = _to_rgb(read_png(cfg.reference_path))

    # padding multiple: feature grid must tile the image and the latent
    # (possibly half-size) must stay even for the wavelet transforms
    mult = math.lcm(2 * cfg.stride, 4 if cfg.downsample_latent else 2)
    img_in = pad_to_multiple(raw_in, mult)
    img_ref = pad_to_multiple(raw_ref, mult)

    with _stage("features"):
        f_in = extract_features(img_in, cfg.stride, cfg.scales)
        f_ref = extract_features(img_ref, cfg.stride, cfg.scales)
    with _stage("correlation"):
        corr = correlation_matrix(f_in, f_ref)
    with _stage("warp"):
        warped = warp(corr, img_ref, cfg.tau)

    if cfg.regions is not None:
        with _stage("region transfer"):
            if cfg.input_mask_path is None:
                raise ValueError("region transfer requires --input-mask")
            mask = _read_mask(cfg.input_mask_path)
            mask = SemanticMask(
                pad_to_multiple(mask.labels, mult), mask.num_classes
            )
            warped = region_transfer(warped, img_in, mask, cfg.regions, cfg.feather)

    with _stage("conditioning"):
        lat_in_img = _latent_res(img_in, cfg.downsample_latent)
        lat_warp_img = _latent_res(warped, cfg.downsample_latent)
        hf_in = high_freq_conditioning(lat_in_img)
        hf_warp = high_freq_conditioning(lat_warp_img)
        token_dim = feature_channels(3, cfg.scales)
        text = build_text_tokens(token_dim)
        tok_in = pool_image_tokens(f_in.data)
        tok_ref = pool_image_tokens(
            extract_features(warped, cfg.stride, cfg.scales).data
        )
        tok_blend = interpolate_conditioning(tok_ref, tok_in, cfg.gamma)
        cond_invert = StyleConditioning(text, tok_in, cfg.lam)
        cond_sample = StyleConditioning(text, tok_blend, cfg.lam)

    with _stage("inversion"):
        sched = make_schedule(cfg.total_steps, cfg.beta_start, cfg.beta_end)
        denoiser = ToyDenoiser(
            channels=3,
            cnt_channels=hf_in.shape[0],
            token_dim=token_dim,
            hidden=DENOISER_HIDDEN,
            d_k=DENOISER_DK,
            seed=cfg.seed,
            s_cnt=cfg.cnt_scale,
        )
        z_in = _encode(img_in, cfg.downsample_latent)
        z_warp = _encode(warped, cfg.downsample_latent)
        zt_in = ddim_invert(
            z_in, denoiser, cfg.steps_inversion, sched, hf_in, cond_invert
        )
        zt_warp = ddim_invert(
            z_warp, denoiser, cfg.steps_inversion, sched, hf_warp, cond_invert
        )

    with _stage("latent init"):
        z_init = adain_wavelet_init(zt_in, zt_warp)
        z_start = interpolate_strength(z_init, zt_in, cfg.gamma)

    with _stage("sampling"):
        z0 = ddim_sample(
            z_start, denoiser, cfg.steps_sampling, sched, hf_in, cond_sample
        )

    with _stage("write output"):
        out = _decode(z0, cfg.downsample_latent)
        out = out[: raw_in.shape[0], : raw_in.shape[1]]
        write_png(out, paths["output"])
        warped_out = np.clip(warped[: raw_in.shape[0], : raw_in.shape[1]], 0.0, 1.0)
        write_png(warped_out, paths["warped"])

    if cfg.sim_query is not None:
        with _stage("similarity map"):
            sim = similarity_map(corr, cfg.sim_query, cfg.stride)
            sim = sim[: raw_ref.shape[0], : raw_ref.shape[1]]
            write_png(sim, paths["similarity"])

    return out
