"""Fully-connected variational autoencoder over bar frames.

Single sigmoid hidden layer on each side, Gaussian posterior heads, Bernoulli
likelihood on the binary piano-roll cells. Training is plain SGD with exact
manually-derived gradients, deterministic per seed. Diagnostics report the
empirical rate (KL to the prior), distortion (negative reconstruction
log-likelihood) and a Monte-Carlo mutual-information estimate, all in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

LOGVAR_CLAMP = 10.0  # posterior log-variances are clipped to +/- this
_LOG_2PI = float(np.log(2.0 * np.pi))


class TrainingDivergedError(FloatingPointError):
    """Raised when the training objective stops being finite."""


@dataclass
class VaeModel:
    w_enc: np.ndarray  # (input, hidden)
    b_enc: np.ndarray
    w_mu: np.ndarray  # (hidden, latent)
    b_mu: np.ndarray
    w_logvar: np.ndarray  # (hidden, latent)
    b_logvar: np.ndarray
    w_dec: np.ndarray  # (latent, hidden)
    b_dec: np.ndarray
    w_out: np.ndarray  # (hidden, input)
    b_out: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        d, h = self.w_enc.shape
        lat = self.w_mu.shape[1]
        expected = {
            "w_enc": (d, h), "b_enc": (h,),
            "w_mu": (h, lat), "b_mu": (lat,),
            "w_logvar": (h, lat), "b_logvar": (lat,),
            "w_dec": (lat, h), "b_dec": (h,),
            "w_out": (h, d), "b_out": (d,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, "
                                 f"expected {shape}")

    @property
    def input_dim(self) -> int:
        return self.w_enc.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w_enc.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.w_mu.shape[1]

    _PARAM_NAMES = ("w_enc", "b_enc", "w_mu", "b_mu", "w_logvar", "b_logvar",
                    "w_dec", "b_dec", "w_out", "b_out")

    def parameters(self) -> list:
        return [getattr(self, name) for name in self._PARAM_NAMES]

    def copy(self) -> "VaeModel":
        return replace(self, **{n: getattr(self, n).copy() for n in self._PARAM_NAMES})


@dataclass
class LatentFrame:
    mean: np.ndarray
    logvar: np.ndarray
    sample: np.ndarray | None = None


@dataclass
class RdReport:
    rate: float  # mean KL(q(z|x) || N(0, I)), nats
    distortion: float  # mean negative reconstruction log-likelihood, nats
    neg_elbo_beta: float  # rate + beta * distortion
    beta: float


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    beta: float | None = None  # overrides the model's beta when set


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(dims: tuple[int, int, int], beta: float = 1.0, seed: int = 0) -> VaeModel:
    """Scaled-uniform initialization, deterministic per seed."""
    d, h, lat = dims
    if min(d, h, lat) < 1:
        raise ValueError("all dimensions must be at least 1")
    rng = np.random.default_rng(seed)
    return VaeModel(
        w_enc=_glorot(rng, d, h), b_enc=np.zeros(h),
        w_mu=_glorot(rng, h, lat), b_mu=np.zeros(lat),
        w_logvar=_glorot(rng, h, lat), b_logvar=np.zeros(lat),
        w_dec=_glorot(rng, lat, h), b_dec=np.zeros(h),
        w_out=_glorot(rng, h, d), b_out=np.zeros(d),
        beta=beta,
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def encode_batch(model: VaeModel, frames: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[1] != model.input_dim:
        raise ValueError(f"frame length {frames.shape[1]} != input_dim {model.input_dim}")
    hidden = _sigmoid(frames @ model.w_enc + model.b_enc)
    mu = hidden @ model.w_mu + model.b_mu
    logvar = np.clip(hidden @ model.w_logvar + model.b_logvar,
                     -LOGVAR_CLAMP, LOGVAR_CLAMP)
    return mu, logvar


def encode(model: VaeModel, frame) -> LatentFrame:
    mu, logvar = encode_batch(model, frame)
    return LatentFrame(mean=mu[0], logvar=logvar[0])


def reparameterize(latent: LatentFrame, rng: np.random.Generator) -> LatentFrame:
    eps = rng.standard_normal(latent.mean.shape)
    sample = latent.mean + np.exp(0.5 * latent.logvar) * eps
    return LatentFrame(mean=latent.mean, logvar=latent.logvar, sample=sample)


def decode_logits(model: VaeModel, z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if z.shape[1] != model.latent_dim:
        raise ValueError(f"latent length {z.shape[1]} != latent_dim {model.latent_dim}")
    hidden = _sigmoid(z @ model.w_dec + model.b_dec)
    return hidden @ model.w_out + model.b_out


def decode(model: VaeModel, z) -> np.ndarray:
    """Per-cell Bernoulli probabilities, strictly inside (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    probs = _sigmoid(decode_logits(model, z))
    return probs[0] if z.ndim == 1 else probs


def binarize(probs: np.ndarray, rng: np.random.Generator | None = None,
             stochastic: bool = False) -> np.ndarray:
    """Threshold at 0.5 with ties to 0, or Bernoulli-sample when stochastic."""
    if stochastic:
        if rng is None:
            raise ValueError("stochastic binarization needs an rng")
        return (rng.random(probs.shape) < probs).astype(np.float64)
    return (probs > 0.5).astype(np.float64)


def _kl_terms(mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    # closed-form KL(N(mu, sigma^2) || N(0, 1)) summed over components
    return 0.5 * np.sum(mu**2 + np.exp(logvar) - 1.0 - logvar, axis=1)


def _bce_logits(logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
    # numerically stable sum of Bernoulli negative log-likelihoods per row
    return np.sum(np.logaddexp(0.0, logits) - logits * targets, axis=1)


def _loss_and_grads(model: VaeModel, frames: np.ndarray, eps: np.ndarray):
    """Forward pass plus exact gradients of the training objective.

    The objective is distortion + beta * rate; at beta = 1 this is the
    negative ELBO. Returns (objective, rate, distortion, grads).
    """
    x = frames
    n = x.shape[0]
    beta = model.beta

    h1 = _sigmoid(x @ model.w_enc + model.b_enc)
    mu = h1 @ model.w_mu + model.b_mu
    logvar_raw = h1 @ model.w_logvar + model.b_logvar
    logvar = np.clip(logvar_raw, -LOGVAR_CLAMP, LOGVAR_CLAMP)
    clip_mask = (np.abs(logvar_raw) < LOGVAR_CLAMP).astype(np.float64)
    std = np.exp(0.5 * logvar)
    z = mu + std * eps
    h2 = _sigmoid(z @ model.w_dec + model.b_dec)
    logits = h2 @ model.w_out + model.b_out
    y = _sigmoid(logits)

    rate = float(np.mean(_kl_terms(mu, logvar)))
    distortion = float(np.mean(_bce_logits(logits, x)))
    objective = distortion + beta * rate

    d_logits = (y - x) / n
    g_w_out = h2.T @ d_logits
    g_b_out = d_logits.sum(axis=0)
    d_h2 = d_logits @ model.w_out.T
    d_pre2 = d_h2 * h2 * (1.0 - h2)
    g_w_dec = z.T @ d_pre2
    g_b_dec = d_pre2.sum(axis=0)
    d_z = d_pre2 @ model.w_dec.T

    d_mu = d_z + beta * mu / n
    d_logvar = (d_z * eps * 0.5 * std
                + beta * 0.5 * (np.exp(logvar) - 1.0) / n) * clip_mask
    g_w_mu = h1.T @ d_mu
    g_b_mu = d_mu.sum(axis=0)
    g_w_logvar = h1.T @ d_logvar
    g_b_logvar = d_logvar.sum(axis=0)

    d_h1 = d_mu @ model.w_mu.T + d_logvar @ model.w_logvar.T
    d_pre1 = d_h1 * h1 * (1.0 - h1)
    g_w_enc = x.T @ d_pre1
    g_b_enc = d_pre1.sum(axis=0)

    grads = [g_w_enc, g_b_enc, g_w_mu, g_b_mu, g_w_logvar, g_b_logvar,
             g_w_dec, g_b_dec, g_w_out, g_b_out]
    return objective, rate, distortion, grads


def loss(model: VaeModel, frames, rng: np.random.Generator | None = None,
         eps: np.ndarray | None = None) -> RdReport:
    """Rate/distortion report over a batch with one reparameterized sample each.

    The reported neg_elbo_beta is rate + beta * distortion, exactly.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[0] == 0:
        raise ValueError("empty batch")
    mu, logvar = encode_batch(model, frames)
    if eps is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        eps = rng.standard_normal(mu.shape)
    z = mu + np.exp(0.5 * logvar) * eps
    logits = decode_logits(model, z)
    rate = float(np.mean(_kl_terms(mu, logvar)))
    distortion = float(np.mean(_bce_logits(logits, frames)))
    return RdReport(rate=rate, distortion=distortion,
                    neg_elbo_beta=rate + model.beta * distortion, beta=model.beta)


def train(model: VaeModel, frames, config: TrainConfig) -> tuple[VaeModel, list[float]]:
    """SGD on the beta-weighted objective; deterministic per seed.

    Returns the trained model (the input is not modified) and the per-epoch
    objective curve.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[0] == 0:
        raise ValueError("need at least one frame")
    model = model.copy()
    if config.beta is not None:
        model.beta = config.beta
    rng = np.random.default_rng(config.seed)
    n = frames.shape[0]
    batch = max(1, min(config.batch_size, n))
    curve = []
    params = model.parameters()
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_total = 0.0
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            eps = rng.standard_normal((idx.size, model.latent_dim))
            objective, _, _, grads = _loss_and_grads(model, frames[idx], eps)
            if not np.isfinite(objective):
                raise TrainingDivergedError(
                    f"non-finite objective {objective!r} during training")
            for p, g in zip(params, grads):
                p -= config.learning_rate * g
            epoch_total += objective * idx.size
        curve.append(epoch_total / n)
    return model, curve


def sample_prior(model: VaeModel, n: int, rng: np.random.Generator,
                 stochastic: bool = False) -> np.ndarray:
    """Decode n frames from standard-normal latent draws and binarize."""
    z = rng.standard_normal((n, model.latent_dim))
    if n == 0:
        return np.zeros((0, model.input_dim))
    return binarize(decode(model, z), rng=rng, stochastic=stochastic)


def marginal_latent_stats(model: VaeModel, frames) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate-posterior mean and variance per latent component.

    Variance combines the spread of posterior means with the average posterior
    variance (law of total variance).
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[0] == 0:
        raise ValueError("empty input")
    mu, logvar = encode_batch(model, frames)
    mean = mu.mean(axis=0)
    variance = mu.var(axis=0) + np.exp(logvar).mean(axis=0)
    return mean, variance


def _diag_gauss_logpdf(z: np.ndarray, mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    diff = z - mu
    return -0.5 * np.sum(logvar + _LOG_2PI + diff**2 * np.exp(-logvar), axis=-1)


def estimate_mutual_information(model: VaeModel, frames, rng: np.random.Generator,
                                samples_per_frame: int = 64,
                                return_stderr: bool = False):
    """Monte-Carlo estimate of the encoder mutual information.

    The latent marginal is approximated by the uniform mixture of the
    per-frame posteriors over the batch.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    n = frames.shape[0]
    if n < 2:
        raise ValueError("need at least two frames")
    mu, logvar = encode_batch(model, frames)
    eps = rng.standard_normal((n, samples_per_frame, mu.shape[1]))
    z = mu[:, None, :] + np.exp(0.5 * logvar)[:, None, :] * eps  # (n, s, L)

    log_cond = _diag_gauss_logpdf(z, mu[:, None, :], logvar[:, None, :])  # (n, s)
    # mixture density: evaluate every sample under every posterior
    log_all = _diag_gauss_logpdf(z[:, :, None, :], mu[None, None, :, :],
                                 logvar[None, None, :, :])  # (n, s, n)
    m = log_all.max(axis=-1)
    log_mix = m + np.log(np.exp(log_all - m[..., None]).sum(axis=-1)) - np.log(n)

    values = log_cond - log_mix
    estimate = float(values.mean())
    if return_stderr:
        stderr = float(values.std(ddof=1) / np.sqrt(values.size))
        return estimate, stderr
    return estimate
