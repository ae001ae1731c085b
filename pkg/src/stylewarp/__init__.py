"""Deterministic core of semantic-aware portrait style transfer.

Dense correspondence warping, Haar frequency decomposition, statistic
blending for latent initialization, decoupled cross-attention, and DDIM
sampling with pluggable denoisers, all on plain numpy tensors with an
optional numba fast path (STYLEWARP_BACKEND=auto|numba|numpy).
"""

from .backend import backend_name
from .correspondence import (
    CorrelationMatrix,
    SemanticMask,
    correlation_matrix,
    cyclic_warp_loss,
    downsample_mask,
    feature_l1_distance,
    mask_warp_loss,
    one_hot,
    similarity_map,
    warp,
    warp_mask,
)
from .diffusion import (
    AttentionWeights,
    LinearDenoiser,
    NoiseSchedule,
    StyleConditioning,
    ToyDenoiser,
    ZeroDenoiser,
    ddim_invert,
    ddim_invert_step,
    ddim_sample,
    ddim_step,
    decoupled_cross_attention,
    forward_noise,
    make_attention_weights,
    make_schedule,
    noise_pred_loss,
    stage1_total_loss,
    time_embedding,
    timestep_sequence,
)
from .features import (
    FeatureMap,
    extract_features,
    feature_channels,
    load_features,
    save_features,
)
from .latent import (
    adain,
    adain_wavelet_init,
    channel_stats,
    interpolate_conditioning,
    interpolate_strength,
)
from .metrics import content_distance, gram_loss, gram_matrix
from .pipeline import (
    PipelineError,
    TransferConfig,
    artifact_paths,
    build_text_tokens,
    pad_to_multiple,
    pool_image_tokens,
    region_transfer,
    run_transfer,
)
from .tensor_io import (
    FormatError,
    chw_to_image,
    image_to_chw,
    read_npy,
    read_png,
    read_png_labels,
    validate_image,
    validate_tensor,
    write_npy,
    write_png,
)
from .wavelet import SubbandSet, dwt_haar, high_freq_conditioning, idwt_haar

__version__ = "0.1.0"

__all__ = [
    "AttentionWeights",
    "CorrelationMatrix",
    "FeatureMap",
    "FormatError",
    "LinearDenoiser",
    "NoiseSchedule",
    "PipelineError",
    "SemanticMask",
    "StyleConditioning",
    "SubbandSet",
    "ToyDenoiser",
    "TransferConfig",
    "ZeroDenoiser",
    "adain",
    "adain_wavelet_init",
    "artifact_paths",
    "backend_name",
    "build_text_tokens",
    "channel_stats",
    "chw_to_image",
    "content_distance",
    "correlation_matrix",
    "cyclic_warp_loss",
    "ddim_invert",
    "ddim_invert_step",
    "ddim_sample",
    "ddim_step",
    "decoupled_cross_attention",
    "downsample_mask",
    "dwt_haar",
    "extract_features",
    "feature_channels",
    "feature_l1_distance",
    "forward_noise",
    "gram_loss",
    "gram_matrix",
    "high_freq_conditioning",
    "idwt_haar",
    "image_to_chw",
    "interpolate_conditioning",
    "interpolate_strength",
    "load_features",
    "make_attention_weights",
    "make_schedule",
    "mask_warp_loss",
    "noise_pred_loss",
    "one_hot",
    "pad_to_multiple",
    "pool_image_tokens",
    "read_npy",
    "read_png",
    "read_png_labels",
    "region_transfer",
    "run_transfer",
    "save_features",
    "similarity_map",
    "stage1_total_loss",
    "time_embedding",
    "timestep_sequence",
    "validate_image",
    "validate_tensor",
    "warp",
    "warp_mask",
    "write_npy",
    "write_png",
]
