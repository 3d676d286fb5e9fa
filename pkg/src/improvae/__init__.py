"""Bar-level VAE over piano rolls, a bit-rate-limited latent channel, and
variable-Markov-oracle analysis of music information dynamics."""

from improvae._kernels import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
