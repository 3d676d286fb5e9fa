"""Versioned model bundle persistence.

A bundle is a JSON document holding the network dimensions, beta, the weight
arrays in row-major order, the per-component aggregate-posterior statistics of
the training corpus, and the pitch range. Floats are written with Python's
shortest exact representation, so save/load round-trips bit-identically.
Unknown format versions are rejected on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .vae import VaeModel

FORMAT_VERSION = 1


@dataclass
class ModelBundle:
    model: VaeModel
    stats_mean: np.ndarray  # aggregate-posterior mean per latent component
    stats_var: np.ndarray  # aggregate-posterior variance per latent component
    pitch_lo: int
    pitch_hi: int

    def __post_init__(self):
        self.stats_mean = np.asarray(self.stats_mean, dtype=np.float64)
        self.stats_var = np.asarray(self.stats_var, dtype=np.float64)
        if self.stats_mean.shape != (self.model.latent_dim,) \
                or self.stats_var.shape != (self.model.latent_dim,):
            raise ValueError("stats length must equal the model's latent dimension")


def save_bundle(bundle: ModelBundle, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "dims": [bundle.model.input_dim, bundle.model.hidden_dim,
                 bundle.model.latent_dim],
        "beta": bundle.model.beta,
        "pitch_range": [bundle.pitch_lo, bundle.pitch_hi],
        "stats_mean": bundle.stats_mean.tolist(),
        "stats_var": bundle.stats_var.tolist(),
        "weights": {name: getattr(bundle.model, name).tolist()
                    for name in VaeModel._PARAM_NAMES},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_bundle(path) -> ModelBundle:
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format version {version!r}")
    weights = {name: np.asarray(doc["weights"][name], dtype=np.float64)
               for name in VaeModel._PARAM_NAMES}
    model = VaeModel(beta=doc["beta"], **weights)
    lo, hi = doc["pitch_range"]
    return ModelBundle(model=model,
                       stats_mean=np.asarray(doc["stats_mean"]),
                       stats_var=np.asarray(doc["stats_var"]),
                       pitch_lo=int(lo), pitch_hi=int(hi))
