"""Bosonic bath description: dispersion, coupling spectrum, thermal weights.

Units: hbar = k_B = 1 throughout.  Modes have linear dispersion
``omega = v * |k|`` and carry a coupling weight ``g2 = |g(omega)|^2`` times the
quadrature weight of the frequency grid.  Mode sets are always generated in
inversion-symmetric pairs (every stored wave vector appears together with its
negative, the weight split evenly): the closed-form coherence factors in
:mod:`regdeph.core` are exact only for inversion-symmetric mode sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "PowerLawCoupling",
    "GaussianPeakCoupling",
    "BathSpectrum",
    "SpectralMoments",
    "thermal_occupation",
    "coth_half",
    "discretize_spectrum",
    "gaussian_peak_modes",
    "spectral_moments",
]


def thermal_occupation(omega: float, temperature: float) -> float:
    """Mean occupation number of a mode at frequency ``omega``.

    Returns ``1 / (exp(omega/T) - 1)``, and exactly 0 at ``T = 0``.
    """
    omega = float(omega)
    if omega <= 0:
        raise ValueError(f"mode frequency must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    return 1.0 / np.expm1(omega / temperature)


def coth_half(omega, temperature: float):
    """coth(omega / 2T) elementwise, with the exact T = 0 limit of 1."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.ones_like(omega)
    return 1.0 / np.tanh(omega / (2.0 * temperature))


@dataclass(frozen=True)
class PowerLawCoupling:
    """Coupling weight ``|g(omega)|^2 = A * omega**p * exp(-omega/cutoff)``.

    The default exponent ``p = 1`` (ohmic) keeps the zero-frequency end of the
    damping sum integrable even at finite temperature.
    """

    amplitude: float = 1.0
    exponent: float = 1.0
    cutoff: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0 or self.cutoff <= 0:
            raise ValueError("amplitude must be >= 0 and cutoff > 0")

    def g2(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.amplitude * omega**self.exponent * np.exp(-omega / self.cutoff)


@dataclass(frozen=True)
class GaussianPeakCoupling:
    """Coupling whose dephasing weight ``g2/omega^2`` is a Gaussian peak.

    ``|g(omega)|^2 = A * omega^2 * exp(-(omega-center)^2 / (2 width^2))``, so the
    normalized weight entering phase-damping sums is the Gaussian itself.  Used
    for narrow-band (peaked-spectrum) registers.
    """

    center: float
    width: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.center <= 0 or self.width <= 0 or self.amplitude < 0:
            raise ValueError("center and width must be > 0, amplitude >= 0")

    def g2(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.amplitude * omega**2 * np.exp(-((omega - self.center) ** 2) / (2.0 * self.width**2))


def _direction_set(dimensionality: int, n_directions: int) -> np.ndarray:
    """Unit propagation directions, always closed under inversion.

    1-D: the +x / -x pair.  3-D: a fixed Fibonacci-sphere set of
    ``n_directions/2`` points together with their antipodes.
    """
    if dimensionality == 1:
        return np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    if dimensionality != 3:
        raise ValueError(f"dimensionality must be 1 or 3, got {dimensionality}")
    half = max(1, n_directions // 2)
    idx = np.arange(half)
    z = 1.0 - (2.0 * idx + 1.0) / (2.0 * half)
    r = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
    theta = idx * np.pi * (3.0 - np.sqrt(5.0))
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    return np.vstack([pts, -pts])


@dataclass(frozen=True)
class BathSpectrum:
    """Discretized bath: per-mode wave vectors, frequencies and coupling weights.

    Immutable after construction.  ``qubit_splitting`` records the bare level
    spacing of the register qubits; it drops out of the dephasing dynamics and
    is carried as inert metadata only.
    """

    omega: np.ndarray
    k: np.ndarray
    g2: np.ndarray
    v: float
    temperature: float = 0.0
    dimensionality: int = 1
    coupling: PowerLawCoupling | GaussianPeakCoupling | None = None
    qubit_splitting: float = 0.0

    def __post_init__(self):
        omega = np.ascontiguousarray(np.asarray(self.omega, dtype=float))
        k = np.ascontiguousarray(np.asarray(self.k, dtype=float))
        g2 = np.ascontiguousarray(np.asarray(self.g2, dtype=float))
        if omega.ndim != 1 or k.shape != (omega.size, 3) or g2.shape != omega.shape:
            raise ValueError("inconsistent mode array shapes")
        if omega.size == 0:
            raise ValueError("bath needs at least one mode")
        if np.any(omega <= 0):
            raise ValueError("all mode frequencies must be positive (k = 0 excluded)")
        if np.any(g2 < 0):
            raise ValueError("coupling weights must be >= 0")
        if self.v <= 0:
            raise ValueError(f"propagation velocity must be positive, got {self.v}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        knorm = self.v * np.linalg.norm(k, axis=1)
        if not np.allclose(knorm, omega, rtol=1e-10, atol=0.0):
            raise ValueError("dispersion violated: omega != v*|k| for some mode")
        for name, arr in (("omega", omega), ("k", k), ("g2", g2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return self.omega.size

    def with_temperature(self, temperature: float) -> "BathSpectrum":
        return replace(self, temperature=temperature)

    def occupation(self) -> np.ndarray:
        """Mean thermal occupation of every mode."""
        if self.temperature == 0:
            return np.zeros_like(self.omega)
        return 1.0 / np.expm1(self.omega / self.temperature)

    def modes_csv_rows(self):
        """Yield (omega, g2, kx, ky, kz) rows for CSV export."""
        for w, g, (kx, ky, kz) in zip(self.omega, self.g2, self.k):
            yield w, g, kx, ky, kz


def _assemble(freqs, weights, coupling, v, temperature, dimensionality, n_directions, qubit_splitting):
    dirs = _direction_set(dimensionality, n_directions)
    n_dir = len(dirs)
    omega = np.repeat(freqs, n_dir)
    g2 = np.repeat(weights / n_dir, n_dir)
    k = (np.repeat(freqs, n_dir)[:, None] / v) * np.tile(dirs, (len(freqs), 1))
    return BathSpectrum(
        omega=omega, k=k, g2=g2, v=v, temperature=temperature,
        dimensionality=dimensionality, coupling=coupling, qubit_splitting=qubit_splitting,
    )


def discretize_spectrum(
    coupling,
    v: float,
    dimensionality: int = 1,
    n_freq: int = 1024,
    omega_max: float = 10.0,
    temperature: float = 0.0,
    n_directions: int = 12,
    qubit_splitting: float = 0.0,
) -> BathSpectrum:
    """Build a mode set from a coupling form on a uniform frequency grid.

    ``n_freq`` frequencies are placed at ``j * omega_max / n_freq`` for
    ``j = 1..n_freq`` (the zero-frequency point is excluded); each carries
    quadrature weight ``g2(omega) * omega_max / n_freq``, split evenly over the
    direction set of its shell.  Doubling ``n_freq`` refines the grid toward
    the continuum spectral sums.
    """
    if n_freq < 1:
        raise ValueError(f"n_freq must be >= 1, got {n_freq}")
    if omega_max <= 0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    step = omega_max / n_freq
    freqs = step * np.arange(1, n_freq + 1)
    weights = coupling.g2(freqs) * step
    return _assemble(freqs, weights, coupling, v, temperature, dimensionality,
                     n_directions, qubit_splitting)


def gaussian_peak_modes(
    center: float,
    width: float,
    v: float,
    dimensionality: int = 1,
    n_freq: int = 201,
    n_sigma: float = 6.0,
    amplitude: float = 1.0,
    temperature: float = 0.0,
    n_directions: int = 12,
    qubit_splitting: float = 0.0,
) -> BathSpectrum:
    """Named preset: a narrow Gaussian dephasing weight centered at ``center``.

    The grid spans ``center +- n_sigma*width`` (clipped to positive
    frequencies) so the peak is fully resolved without wasting modes on the
    empty tails.
    """
    coupling = GaussianPeakCoupling(center=center, width=width, amplitude=amplitude)
    lo = max(center - n_sigma * width, 1e-12 * center)
    hi = center + n_sigma * width
    freqs = np.linspace(lo, hi, n_freq)
    step = (hi - lo) / max(n_freq - 1, 1) if n_freq > 1 else width
    weights = coupling.g2(freqs) * step
    return _assemble(freqs, weights, coupling, v, temperature, dimensionality,
                     n_directions, qubit_splitting)


@dataclass(frozen=True)
class SpectralMoments:
    """Mean and width of the two normalized dephasing weights.

    Channel 1 weights each mode by ``g2 * coth(omega/2T) / omega^2`` (the
    damping channel); channel 2 by ``g2 / omega^2`` (the phase channel).
    """

    mean1: float
    width1: float
    mean2: float
    width2: float

    def __post_init__(self):
        if self.mean1 <= 0 or self.mean2 <= 0:
            raise ValueError("spectral means must be positive")
        if self.width1 < 0 or self.width2 < 0:
            raise ValueError("spectral widths must be >= 0")


def _weighted_mean_std(omega, weights):
    total = weights.sum()
    if total <= 0:
        raise ValueError("weights sum to zero: no normalizable distribution")
    h = weights / total
    mean = float(np.sum(h * omega))
    var = float(np.sum(h * (omega - mean) ** 2))
    return mean, np.sqrt(max(var, 0.0))


def spectral_moments(bath: BathSpectrum, t_ref: float | None = None) -> SpectralMoments:
    """Mean and standard deviation of the mode frequency under each weight.

    By default the time-dependent modulation of the damping channel is
    dropped, so the moments characterize the bath alone; pass ``t_ref`` to
    weight channel 1 by ``1 - cos(omega * t_ref)`` as well.
    """
    w1 = bath.g2 * coth_half(bath.omega, bath.temperature) / bath.omega**2
    if t_ref is not None:
        w1 = w1 * (1.0 - np.cos(bath.omega * t_ref))
    w2 = bath.g2 / bath.omega**2
    mean1, width1 = _weighted_mean_std(bath.omega, w1)
    mean2, width2 = _weighted_mean_std(bath.omega, w2)
    return SpectralMoments(mean1=mean1, width1=width1, mean2=mean2, width2=width2)
