"""Maximum ratio transmission and the additive quantization noise model.

A b-bit DAC is modelled as the statistically equivalent linear map
x_q = alpha*x + n_q with alpha = 1 - rho and Gaussian n_q whose covariance is
alpha*(1-alpha)*diag(W W^H); no actual uniform quantizer is simulated, since
both the analysis and the Monte Carlo live in this linearized regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Distortion factor rho for low bit depths (exact values; the closed formula
#: below takes over for b > 5).
RHO_TABLE = {1: 0.3646, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}


def rho_of_bits(b) -> float:
    """Distortion factor of a b-bit DAC; 0 for ideal (infinite-resolution)."""
    if b == math.inf:
        return 0.0
    if not float(b).is_integer() or b < 1:
        raise ValueError(f"DAC resolution must be a positive integer or infinite; got {b!r}")
    b = int(b)
    if b <= 5:
        return RHO_TABLE[b]
    return (math.sqrt(3.0) * math.pi / 2.0) * 2.0 ** (-2 * b)


@dataclass(frozen=True)
class DacModel:
    """Linearized DAC: gain alpha = 1 - rho plus uncorrelated Gaussian noise."""

    bits: float
    rho: float
    alpha: float

    @classmethod
    def for_bits(cls, b) -> "DacModel":
        rho = rho_of_bits(b)
        return cls(bits=b, rho=rho, alpha=1.0 - rho)


@dataclass(frozen=True)
class Precoder:
    """MRT precoding matrix W (M x K, unit total power) and the trace
    normalizer T_r = Tr(F^H F) it was built with."""

    W: np.ndarray
    trace_norm: float


def mrt_precoder(F: np.ndarray) -> Precoder:
    """W = F^H / sqrt(Tr(F^H F)); column k is proportional to f_k."""
    trace_norm = float(np.sum(np.abs(F) ** 2))
    if trace_norm == 0.0:
        raise ValueError("degenerate channel: F is identically zero, MRT undefined")
    return Precoder(W=F.conj().T / np.sqrt(trace_norm), trace_norm=trace_norm)


def quantization_noise_covariance(precoder: Precoder | np.ndarray, dac: DacModel) -> np.ndarray:
    """Diagonal of the quantization-noise covariance alpha*(1-alpha)*diag(W W^H),
    returned as a length-M real vector."""
    W = precoder.W if isinstance(precoder, Precoder) else np.asarray(precoder)
    return dac.alpha * (1.0 - dac.alpha) * np.sum(np.abs(W) ** 2, axis=1)


def apply_aqnm(x: np.ndarray, dac: DacModel, noise_diag: np.ndarray,
               rng: np.random.Generator) -> np.ndarray:
    """Quantize a transmit vector: alpha*x plus one draw of the Gaussian
    quantization noise with the given diagonal covariance."""
    noise_diag = np.asarray(noise_diag, dtype=float)
    if np.any(noise_diag < 0):
        raise ValueError("invalid covariance: quantization noise diagonal has negative entries")
    if dac.alpha == 1.0:
        return np.asarray(x, dtype=complex).copy()
    scale = np.sqrt(noise_diag / 2.0)
    n_q = scale * rng.standard_normal(noise_diag.shape) \
        + 1j * scale * rng.standard_normal(noise_diag.shape)
    return dac.alpha * np.asarray(x, dtype=complex) + n_q
