"""Noise schedule, deterministic DDIM stepping, and the denoiser zoo.

The schedule stores cumulative products alpha_bar with alpha_bar[0] = 1.
Sampling and inversion share one jump formula; inversion is the
fixed-point-free variant that evaluates the noise prediction at the
current latent and steps up the same subsequence, so round trips are
exact only for predictions that do not depend on the latent. All loop
carriers stay float32; scalar schedule coefficients are Python floats so
numpy never promotes the latents to float64.
"""

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TOTAL_STEPS = 1000
DEFAULT_BETA_START = 8.5e-4
DEFAULT_BETA_END = 0.012
DEFAULT_STEPS_INVERSION = 10
DEFAULT_STEPS_SAMPLING = 30
DEFAULT_LAMBDA = 1.0
DEFAULT_LAMBDA_C = 1.0
DEFAULT_LAMBDA_M = 10.0
DEFAULT_CNT_SCALE = 1.0


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative schedule: alpha_bar[t] for t in 0..T, strictly decreasing."""

    total_steps: int
    alpha_bar: np.ndarray

    def __post_init__(self):
        ab = np.asarray(self.alpha_bar)
        if ab.ndim != 1 or ab.shape[0] != self.total_steps + 1:
            raise ValueError(
                f"alpha_bar must have T+1 = {self.total_steps + 1} entries, "
                f"got shape {ab.shape}"
            )
        if ab[0] != 1.0:
            raise ValueError(f"alpha_bar[0] must be 1, got {ab[0]}")
        if ab[-1] <= 0.0:
            raise ValueError("alpha_bar[T] must stay positive")
        if not np.all(np.diff(ab) < 0):
            raise ValueError("alpha_bar must be strictly decreasing")


def make_schedule(
    total_steps: int = DEFAULT_TOTAL_STEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linear beta schedule; alpha_bar[t] is the running product of (1 - beta)."""
    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1, got {total_steps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(
            f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]"
        )
    betas = np.linspace(beta_start, beta_end, total_steps, dtype=np.float64)
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    return NoiseSchedule(total_steps, alpha_bar)


def timestep_sequence(total_steps: int, steps: int) -> list:
    """Evenly spaced subsequence 0 = t_0 < ... < t_steps = T, rounding down."""
    if not 1 <= steps <= total_steps:
        raise ValueError(f"steps must be in [1, {total_steps}], got {steps}")
    return [(i * total_steps) // steps for i in range(steps + 1)]


def forward_noise(
    z0: np.ndarray, t: int, eps: np.ndarray, sched: NoiseSchedule
) -> np.ndarray:
    """Closed-form noising: sqrt(ab_t) * z0 + sqrt(1 - ab_t) * eps."""
    z0 = np.asarray(z0, dtype=np.float32)
    eps = np.asarray(eps, dtype=np.float32)
    if z0.shape != eps.shape:
        raise ValueError(f"shape mismatch: z0 {z0.shape} vs eps {eps.shape}")
    if not 0 <= t <= sched.total_steps:
        raise ValueError(f"t must be in [0, {sched.total_steps}], got {t}")
    a = float(sched.alpha_bar[t])
    return math.sqrt(a) * z0 + math.sqrt(1.0 - a) * eps


def _jump(z: np.ndarray, eps_hat: np.ndarray, a_from: float, a_to: float) -> np.ndarray:
    """Move a latent between noise levels with a fixed noise estimate.

    Predicts z0 at the source level, then renoises to the target level.
    The formula is its own inverse under swapped levels and equal eps_hat.
    """
    z0_hat = (z - math.sqrt(1.0 - a_from) * eps_hat) / math.sqrt(a_from)
    return math.sqrt(a_to) * z0_hat + math.sqrt(1.0 - a_to) * eps_hat


def ddim_step(
    z_t: np.ndarray, eps_hat: np.ndarray, t: int, t_prev: int, sched: NoiseSchedule
) -> np.ndarray:
    """One deterministic (eta = 0) sampling step from t down to t_prev."""
    if t_prev >= t:
        raise ValueError(f"t_prev must be < t, got t_prev={t_prev}, t={t}")
    if t_prev < 0 or t > sched.total_steps:
        raise ValueError(f"timesteps must lie in [0, {sched.total_steps}]")
    z_t = np.asarray(z_t, dtype=np.float32)
    eps_hat = np.asarray(eps_hat, dtype=np.float32)
    if z_t.shape != eps_hat.shape:
        raise ValueError(f"shape mismatch: z_t {z_t.shape} vs eps_hat {eps_hat.shape}")
    return _jump(z_t, eps_hat, float(sched.alpha_bar[t]), float(sched.alpha_bar[t_prev]))


def ddim_invert_step(
    z_t: np.ndarray, eps_hat: np.ndarray, t: int, t_next: int, sched: NoiseSchedule
) -> np.ndarray:
    """One inversion step from t up to t_next, eps_hat taken at the current point."""
    if t_next <= t:
        raise ValueError(f"t_next must be > t, got t_next={t_next}, t={t}")
    if t < 0 or t_next > sched.total_steps:
        raise ValueError(f"timesteps must lie in [0, {sched.total_steps}]")
    z_t = np.asarray(z_t, dtype=np.float32)
    eps_hat = np.asarray(eps_hat, dtype=np.float32)
    if z_t.shape != eps_hat.shape:
        raise ValueError(f"shape mismatch: z_t {z_t.shape} vs eps_hat {eps_hat.shape}")
    return _jump(z_t, eps_hat, float(sched.alpha_bar[t]), float(sched.alpha_bar[t_next]))


def ddim_sample(
    z_start: np.ndarray,
    denoiser,
    steps: int,
    sched: NoiseSchedule,
    c_cnt=None,
    c_sty=None,
) -> np.ndarray:
    """Iterate ddim_step down the even subsequence from T to 0."""
    seq = timestep_sequence(sched.total_steps, steps)
    z = np.asarray(z_start, dtype=np.float32)
    for i in range(len(seq) - 1, 0, -1):
        eps_hat = denoiser(z, seq[i], c_cnt, c_sty)
        z = ddim_step(z, eps_hat, seq[i], seq[i - 1], sched)
    return z


def ddim_invert(
    z0: np.ndarray,
    denoiser,
    steps: int,
    sched: NoiseSchedule,
    c_cnt=None,
    c_sty=None,
) -> np.ndarray:
    """Iterate the ascending recurrence from 0 to T over the same subsequence."""
    seq = timestep_sequence(sched.total_steps, steps)
    z = np.asarray(z0, dtype=np.float32)
    for i in range(len(seq) - 1):
        eps_hat = denoiser(z, seq[i], c_cnt, c_sty)
        z = ddim_invert_step(z, eps_hat, seq[i], seq[i + 1], sched)
    return z


@dataclass(frozen=True)
class AttentionWeights:
    """Projection matrices for the two-branch attention block.

    w_q: [d, d_k]; per branch a key projection [d_c, d_k] and a value
    projection [d_c, d], so the block maps [N, d] -> [N, d].
    """

    w_q: np.ndarray
    w_k_text: np.ndarray
    w_v_text: np.ndarray
    w_k_image: np.ndarray
    w_v_image: np.ndarray


def make_attention_weights(d: int, d_c: int, d_k: int, seed: int) -> AttentionWeights:
    """Draw all five projections from one seeded generator, 1/sqrt(fan_in) scale."""
    rng = np.random.default_rng(seed)

    def draw(rows, cols):
        return (rng.standard_normal((rows, cols)) / math.sqrt(rows)).astype(np.float32)

    return AttentionWeights(
        w_q=draw(d, d_k),
        w_k_text=draw(d_c, d_k),
        w_v_text=draw(d_c, d),
        w_k_image=draw(d_c, d_k),
        w_v_image=draw(d_c, d),
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def decoupled_cross_attention(
    z: np.ndarray,
    c_text: np.ndarray,
    c_image: np.ndarray,
    weights: AttentionWeights,
    lam: float = DEFAULT_LAMBDA,
) -> np.ndarray:
    """Text-branch attention plus lam times image-branch attention.

    Queries come from z, each branch has its own key/value projections,
    logits are scaled by 1/sqrt(d_k). The output is affine in lam; at
    lam = 0 the image branch is skipped entirely so the result is
    bitwise the text-only attention.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    # f64 internally: keeps the affine-in-lambda identity tight after the f32 cast
    z64 = np.asarray(z, dtype=np.float64)
    q = z64 @ weights.w_q.astype(np.float64)
    scale = 1.0 / math.sqrt(weights.w_q.shape[1])

    def branch(tokens, w_k, w_v):
        t64 = np.asarray(tokens, dtype=np.float64)
        attn = _softmax_rows((q @ (t64 @ w_k.astype(np.float64)).T) * scale)
        return attn @ (t64 @ w_v.astype(np.float64))

    out = branch(c_text, weights.w_k_text, weights.w_v_text)
    if lam != 0.0:
        out = out + lam * branch(c_image, weights.w_k_image, weights.w_v_image)
    return out.astype(np.float32)


@dataclass(frozen=True)
class StyleConditioning:
    """Token bundle for the style branch of the denoiser.

    text_tokens stands in for a fixed prompt embedding; image_tokens are
    pooled appearance features of the warped reference; lam weighs the
    image branch inside the attention block.
    """

    text_tokens: np.ndarray
    image_tokens: np.ndarray
    lam: float = DEFAULT_LAMBDA


class ZeroDenoiser:
    """Predicts zero noise; DDIM becomes a pure rescaling chain."""

    def __call__(self, z_t, t, c_cnt=None, c_sty=None):
        return np.zeros_like(z_t)


class LinearDenoiser:
    """Predicts coeff * z_t, ignoring every conditioning input."""

    def __init__(self, coeff: float = 0.1):
        self.coeff = float(coeff)

    def __call__(self, z_t, t, c_cnt=None, c_sty=None):
        return np.float32(self.coeff) * z_t


def time_embedding(t: int, dim: int) -> np.ndarray:
    """Sinusoidal embedding [dim]; dim must be even."""
    if dim % 2:
        raise ValueError(f"embedding dim must be even, got {dim}")
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / max(half - 1, 1))
    args = float(t) * freqs
    return np.concatenate([np.sin(args), np.cos(args)]).astype(np.float32)


class ToyDenoiser:
    """Small fixed-architecture noise predictor with seeded weights.

    Pointwise lift to a hidden width, sinusoidal time embedding, additive
    injection of a projected content conditioning scaled by s_cnt, tanh,
    a residual decoupled cross-attention on the style tokens, pointwise
    projection back to the latent channels. Same inputs and seed give
    bitwise identical outputs; s_cnt = 0 skips the injection entirely so
    the result is bitwise independent of c_cnt.

    out_gain shrinks the output projection. Deterministic inversion and
    sampling divide by sqrt(alpha_bar) near the noisy end of the chain,
    which amplifies any inversion/sampling asymmetry of the predictor by
    an order of magnitude; predictions well below the latent scale keep
    matched round trips near-contractive instead of saturating the
    decoded image.
    """

    def __init__(
        self,
        channels: int,
        cnt_channels: int = 0,
        token_dim: int = 0,
        hidden: int = 16,
        d_k: int = 8,
        seed: int = 0,
        s_cnt: float = DEFAULT_CNT_SCALE,
        out_gain: float = 0.01,
    ):
        if channels < 1 or hidden < 2 or hidden % 2:
            raise ValueError("need channels >= 1 and even hidden >= 2")
        self.channels = channels
        self.cnt_channels = cnt_channels
        self.token_dim = token_dim
        self.hidden = hidden
        self.s_cnt = float(s_cnt)
        self.out_gain = float(out_gain)
        rng = np.random.default_rng(seed)

        def draw(rows, cols):
            return (rng.standard_normal((rows, cols)) / math.sqrt(rows)).astype(
                np.float32
            )

        self.w_in = draw(channels, hidden)
        self.w_cnt = draw(cnt_channels, hidden) if cnt_channels else None
        if token_dim:
            # weight draws share the generator; attention gets its own derived seed
            attn_seed = int(rng.integers(0, 2**31 - 1))
            self.attn = make_attention_weights(hidden, token_dim, d_k, attn_seed)
        else:
            self.attn = None
        self.w_out = (np.float32(self.out_gain) * draw(hidden, channels)).astype(
            np.float32
        )

    def __call__(self, z_t, t, c_cnt=None, c_sty=None):
        z_t = np.asarray(z_t, dtype=np.float32)
        if z_t.ndim != 3 or z_t.shape[0] != self.channels:
            raise ValueError(
                f"expected [{self.channels}, H, W] latent, got shape {z_t.shape}"
            )
        c, h, w = z_t.shape
        n = h * w
        x = z_t.reshape(c, n).T @ self.w_in
        x = x + time_embedding(t, self.hidden)[None, :]
        if c_cnt is not None and self.s_cnt != 0.0:
            c_cnt = np.asarray(c_cnt, dtype=np.float32)
            if self.w_cnt is None:
                raise ValueError("denoiser was built without content conditioning")
            if c_cnt.shape != (self.cnt_channels, h, w):
                raise ValueError(
                    f"c_cnt must be [{self.cnt_channels}, {h}, {w}], "
                    f"got shape {c_cnt.shape}"
                )
            x = x + np.float32(self.s_cnt) * (c_cnt.reshape(self.cnt_channels, n).T @ self.w_cnt)
        x = np.tanh(x)
        if c_sty is not None:
            if self.attn is None:
                raise ValueError("denoiser was built without style conditioning")
            x = x + decoupled_cross_attention(
                x, c_sty.text_tokens, c_sty.image_tokens, self.attn, c_sty.lam
            )
        eps = x @ self.w_out
        return np.ascontiguousarray(eps.T.reshape(c, h, w), dtype=np.float32)


def noise_pred_loss(eps: np.ndarray, eps_hat: np.ndarray) -> float:
    """Mean squared error over all elements."""
    eps = np.asarray(eps, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if eps.shape != eps_hat.shape:
        raise ValueError(f"shape mismatch: {eps.shape} vs {eps_hat.shape}")
    return float(((eps - eps_hat) ** 2).mean())


def stage1_total_loss(
    l_sem: float,
    l_cyc: float,
    l_mask: float,
    lambda_c: float = DEFAULT_LAMBDA_C,
    lambda_m: float = DEFAULT_LAMBDA_M,
) -> float:
    """Weighted sum l_sem + lambda_c * l_cyc + lambda_m * l_mask."""
    return float(l_sem) + float(lambda_c) * float(l_cyc) + float(lambda_m) * float(l_mask)
