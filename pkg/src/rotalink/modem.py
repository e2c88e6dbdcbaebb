"""16-QAM baseband modem over a symbol-level AWGN channel.

Unit-average-energy constellation on the {+-1, +-3}/sqrt(10) grid with
per-axis Gray labeling: the first two bits of a nibble select I, the last
two select Q, via 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3. Demapping is
hard-decision nearest point (ties resolved to the lowest constellation
index), with no coding, pulse shaping, or synchronization: the radios are
idealized endpoints and the channel carries only the link-budget SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BITS_PER_SYMBOL",
    "CONSTELLATION",
    "ConstellationFrame",
    "map_bits",
    "apply_awgn",
    "demap_symbols",
    "evm_rms",
    "snr_from_evm",
    "bit_error_rate",
    "qam16_ber_analytic",
]

BITS_PER_SYMBOL = 4

# Per-axis Gray map, indexed by the 2-bit label value: 00 01 10 11.
_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0]) / math.sqrt(10.0)

# CONSTELLATION[k] for label k = b3 b2 b1 b0: I from b3 b2, Q from b1 b0.
CONSTELLATION = np.array(
    [_LEVELS[k >> 2] + 1j * _LEVELS[k & 3] for k in range(16)], dtype=complex)

_BIT_SHIFTS = np.array([3, 2, 1, 0])


@dataclass(frozen=True)
class ConstellationFrame:
    """Transmitted/received symbols with the channel SNR and quality metrics."""

    tx_symbols: np.ndarray
    rx_symbols: np.ndarray
    snr_db_applied: float
    evm_rms: float
    ber: float
    seed: int

    def __post_init__(self) -> None:
        if len(self.tx_symbols) != len(self.rx_symbols):
            raise ValueError("tx_symbols and rx_symbols must have equal length")
        if self.evm_rms < 0:
            raise ValueError(f"evm_rms must be >= 0, got {self.evm_rms}")
        if not 0.0 <= self.ber <= 1.0:
            raise ValueError(f"ber must be in [0, 1], got {self.ber}")


def map_bits(bits) -> np.ndarray:
    """Gray-map a bit sequence (length divisible by 4) onto 16-QAM symbols."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size % BITS_PER_SYMBOL != 0:
        raise ValueError(
            f"bit count must be a positive multiple of {BITS_PER_SYMBOL}, got {arr.size}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    nibbles = arr.astype(np.int64).reshape(-1, BITS_PER_SYMBOL)
    index = (nibbles << _BIT_SHIFTS).sum(axis=1)
    return CONSTELLATION[index]


def apply_awgn(symbols, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise at the given SNR.

    Noise power per symbol is 10^(-snr_db/10) against the unit-energy
    constellation; snr_db = +inf is the noise-off sentinel.
    """
    arr = np.asarray(symbols, dtype=complex)
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    if snr_db == math.inf:
        return arr.copy()
    sigma = math.sqrt(10.0 ** (-snr_db / 10.0) / 2.0)
    z = rng.standard_normal((arr.size, 2))
    return arr + sigma * (z[:, 0] + 1j * z[:, 1])


def demap_symbols(rx) -> np.ndarray:
    """Hard-decision demap: nearest constellation point, inverse Gray labels.

    The grid is separable, so the nearest point is the pair of per-axis
    nearest levels; equidistant ties go to the lowest constellation index
    (lowest I label, then lowest Q label), so a symbol at the origin demaps
    to 0101.
    """
    arr = np.asarray(rx, dtype=complex).ravel()
    i_label = np.argmin((arr.real[:, None] - _LEVELS[None, :]) ** 2, axis=1)
    q_label = np.argmin((arr.imag[:, None] - _LEVELS[None, :]) ** 2, axis=1)
    index = (i_label << 2) | q_label
    return ((index[:, None] >> _BIT_SHIFTS) & 1).astype(np.uint8).ravel()


def evm_rms(tx, rx) -> float:
    """RMS error vector magnitude normalized by the RMS signal amplitude."""
    tx_arr = np.asarray(tx, dtype=complex)
    rx_arr = np.asarray(rx, dtype=complex)
    if tx_arr.size == 0:
        raise ValueError("evm_rms of empty sequences")
    if tx_arr.shape != rx_arr.shape:
        raise ValueError(f"length mismatch: {tx_arr.shape} vs {rx_arr.shape}")
    signal_power = float(np.mean(np.abs(tx_arr) ** 2))
    if signal_power == 0:
        raise ValueError("reference sequence has zero power")
    error_power = float(np.mean(np.abs(rx_arr - tx_arr) ** 2))
    return math.sqrt(error_power / signal_power)


def snr_from_evm(evm: float) -> float:
    """SNR estimate -20*log10(evm) implied by an RMS EVM."""
    if not evm > 0:
        raise ValueError(f"evm must be > 0, got {evm}")
    return -20.0 * math.log10(evm)


def bit_error_rate(tx_bits, rx_bits) -> float:
    a = np.asarray(tx_bits)
    b = np.asarray(rx_bits)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("bit_error_rate of empty sequences")
    return float(np.count_nonzero(a != b)) / a.size


def qam16_ber_analytic(esn0_db: float) -> float:
    """Exact hard-decision BER of Gray 16-QAM on AWGN at a given Es/N0."""
    gamma = 10.0 ** (esn0_db / 10.0)
    q = lambda x: 0.5 * math.erfc(x / math.sqrt(2.0))
    root = math.sqrt(gamma / 5.0)
    return 0.75 * q(root) + 0.5 * q(3.0 * root) - 0.25 * q(5.0 * root)
