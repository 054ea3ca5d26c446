"""Exact reduced dynamics of a dephasing register.

Every coherence element between two computational basis labels evolves by a
closed-form factor ``exp(-eta + i*phi)``: ``eta`` is a nonnegative damping
exponent and ``phi`` a bath-induced (Lamb) phase.  Both are sums over bath
modes weighted by lattice structure factors of the two labels.  Populations
are untouched — this is pure dephasing.

The phase formula assumes the bath's mode set is closed under ``k -> -k``
(guaranteed by the builders in :mod:`regdeph.bath`); for a lone unpaired wave
vector an additional cross term, odd in ``k``, would survive in multi-qubit
coherences.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .bath import BathSpectrum, coth_half

__all__ = [
    "BasisLabel",
    "RegisterState",
    "DecoherenceFactors",
    "spin_structure_factor",
    "damping_weight",
    "phase_weight",
    "damping_exponent",
    "lamb_phase",
    "label_phase",
    "pair_factors",
    "evolve",
    "fidelity",
    "fidelity_curve",
    "factor_curves",
]

NORM_TOL = 1e-12


@dataclass(frozen=True)
class BasisLabel:
    """A computational basis label: one +1/-1 eigenvalue per qubit."""

    spins: tuple[int, ...]

    def __post_init__(self):
        spins = tuple(int(s) for s in self.spins)
        if len(spins) == 0:
            raise ValueError("label must have at least one qubit")
        if any(s not in (-1, 1) for s in spins):
            raise ValueError(f"label entries must be +1 or -1, got {spins}")
        object.__setattr__(self, "spins", spins)

    @classmethod
    def from_string(cls, text: str) -> "BasisLabel":
        """Parse a label written as a string of '+' and '-' characters."""
        table = {"+": 1, "-": -1}
        try:
            return cls(tuple(table[ch] for ch in text.strip()))
        except KeyError:
            raise ValueError(f"label string may contain only '+' and '-': {text!r}") from None

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.spins)

    def __len__(self) -> int:
        return len(self.spins)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.spins, dtype=float)

    def flipped(self) -> "BasisLabel":
        return BasisLabel(tuple(-s for s in self.spins))


class RegisterState:
    """Pure register state: complex amplitudes over basis labels.

    Stored sparsely over the labels actually present.  The amplitudes must be
    normalized; construction rejects states whose squared norm deviates from 1
    by more than ``NORM_TOL``.
    """

    def __init__(self, amplitudes: Mapping[BasisLabel, complex]):
        amps = {k: complex(v) for k, v in amplitudes.items() if v != 0}
        if not amps:
            raise ValueError("state needs at least one nonzero amplitude")
        sizes = {len(label) for label in amps}
        if len(sizes) != 1:
            raise ValueError(f"labels of mixed lengths: {sorted(sizes)}")
        norm2 = sum(abs(c) ** 2 for c in amps.values())
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm2!r}")
        self._amps = amps
        self._n = sizes.pop()

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def amplitudes(self) -> dict[BasisLabel, complex]:
        return dict(self._amps)

    def labels(self) -> list[BasisLabel]:
        return list(self._amps)

    def items(self):
        return self._amps.items()

    def __eq__(self, other):
        return isinstance(other, RegisterState) and self._amps == other._amps

    @classmethod
    def from_unnormalized(cls, amplitudes: Mapping[BasisLabel, complex]) -> "RegisterState":
        norm = np.sqrt(sum(abs(c) ** 2 for c in amplitudes.values()))
        if norm == 0:
            raise ValueError("state needs at least one nonzero amplitude")
        return cls({k: v / norm for k, v in amplitudes.items()})

    @classmethod
    def basis_state(cls, label: BasisLabel) -> "RegisterState":
        return cls({label: 1.0})

    @classmethod
    def cat(cls, n_qubits: int) -> "RegisterState":
        """(|++..+> + |--..->)/sqrt(2)."""
        up = BasisLabel((1,) * n_qubits)
        return cls.from_unnormalized({up: 1.0, up.flipped(): 1.0})

    @classmethod
    def single_flip(cls, n_qubits: int, site: int = 0) -> "RegisterState":
        """(|++..+> + |..-..>)/sqrt(2): one coherent flip at ``site``."""
        spins = [1] * n_qubits
        up = BasisLabel(tuple(spins))
        spins[site] = -1
        return cls.from_unnormalized({up: 1.0, BasisLabel(tuple(spins)): 1.0})


def _as_positions(positions) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValueError(f"positions must have shape (L, 3), got {pos.shape}")
    return pos


def _check_lengths(label: BasisLabel, positions: np.ndarray):
    if len(label) != positions.shape[0]:
        raise ValueError(
            f"label length {len(label)} does not match {positions.shape[0]} positions")


def spin_structure_factor(label: BasisLabel, k_vecs, positions) -> np.ndarray:
    """``sum_l s_l * exp(i k . r_l)`` for each wave vector, shape (M,)."""
    pos = _as_positions(positions)
    _check_lengths(label, pos)
    k = np.atleast_2d(np.asarray(k_vecs, dtype=float))
    phases = pos @ k.T  # (L, M)
    return label.as_array() @ np.exp(1j * phases)


def damping_weight(i: BasisLabel, j: BasisLabel, k_vec, positions) -> float:
    """Squared modulus of the spin-difference structure factor at one wave vector."""
    pos = _as_positions(positions)
    _check_lengths(i, pos)
    _check_lengths(j, pos)
    diff = i.as_array() - j.as_array()
    phase = pos @ np.asarray(k_vec, dtype=float)
    return float(abs(diff @ np.exp(1j * phase)) ** 2)


def phase_weight(i: BasisLabel, j: BasisLabel, k_vec, positions) -> float:
    """Difference of the two labels' squared structure factors (may be negative)."""
    si = spin_structure_factor(i, [k_vec], positions)[0]
    sj = spin_structure_factor(j, [k_vec], positions)[0]
    return float(abs(si) ** 2 - abs(sj) ** 2)


def _damping_kernel(bath: BathSpectrum, t: float) -> np.ndarray:
    """Per-mode damping weight g2 * coth(w/2T) * (1 - cos wt) / w^2."""
    w = bath.omega
    return bath.g2 * coth_half(w, bath.temperature) * 2.0 * np.sin(0.5 * w * t) ** 2 / w**2


def _phase_kernel(bath: BathSpectrum, t: float) -> np.ndarray:
    """Per-mode phase weight g2 * (wt - sin wt) / w^2."""
    w = bath.omega
    return bath.g2 * (w * t - np.sin(w * t)) / w**2


def damping_exponent(i: BasisLabel, j: BasisLabel, t: float, bath: BathSpectrum,
                     positions) -> float:
    """Damping exponent of the coherence between labels ``i`` and ``j`` at time ``t``.

    Nonnegative; zero at ``t = 0`` and whenever ``i == j``.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    pos = _as_positions(positions)
    _check_lengths(i, pos)
    _check_lengths(j, pos)
    diff = i.as_array() - j.as_array()
    if not diff.any():
        return 0.0
    s = diff @ np.exp(1j * (pos @ bath.k.T))
    return float(np.sum(_damping_kernel(bath, t) * np.abs(s) ** 2))


def lamb_phase(i: BasisLabel, j: BasisLabel, t: float, bath: BathSpectrum,
               positions) -> float:
    """Bath-induced coherent phase on the (i, j) coherence at time ``t``.

    Grows roughly linearly in time once ``omega*t >> 1``; identically zero for
    sign-symmetric label pairs.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    si = spin_structure_factor(i, bath.k, positions)
    sj = spin_structure_factor(j, bath.k, positions)
    lam2 = np.abs(si) ** 2 - np.abs(sj) ** 2
    return float(np.sum(_phase_kernel(bath, t) * lam2))


def label_phase(i: BasisLabel, t: float, bath: BathSpectrum, positions) -> float:
    """Scalar evolution phase of basis label ``i`` alone.

    Differences of label phases reproduce the pairwise Lamb phase:
    ``label_phase(i) - label_phase(j) == lamb_phase(i, j)``.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    s = spin_structure_factor(i, bath.k, positions)
    return float(np.sum(_phase_kernel(bath, t) * np.abs(s) ** 2))


@dataclass(frozen=True)
class DecoherenceFactors:
    """Damping exponents and phases for every ordered pair of a label set."""

    t: float
    factors: dict[tuple[BasisLabel, BasisLabel], tuple[float, float]]

    def eta(self, i: BasisLabel, j: BasisLabel) -> float:
        return self.factors[(i, j)][0]

    def phi(self, i: BasisLabel, j: BasisLabel) -> float:
        return self.factors[(i, j)][1]


def pair_factors(labels: Iterable[BasisLabel], t: float, bath: BathSpectrum,
                 positions) -> DecoherenceFactors:
    """Damping/phase factors for all ordered pairs drawn from ``labels``."""
    labels = list(labels)
    pos = _as_positions(positions)
    for lab in labels:
        _check_lengths(lab, pos)
    spins = np.array([lab.as_array() for lab in labels])
    s = spins @ np.exp(1j * (pos @ bath.k.T))  # (n_labels, M)
    kern_eta = _damping_kernel(bath, t)
    kern_phi = _phase_kernel(bath, t)
    mod2 = np.abs(s) ** 2
    factors: dict[tuple[BasisLabel, BasisLabel], tuple[float, float]] = {}
    for a, la in enumerate(labels):
        for b, lb in enumerate(labels):
            if a == b:
                factors[(la, lb)] = (0.0, 0.0)
                continue
            eta = float(np.sum(kern_eta * np.abs(s[a] - s[b]) ** 2))
            phi = float(np.sum(kern_phi * (mod2[a] - mod2[b])))
            factors[(la, lb)] = (eta, phi)
    return DecoherenceFactors(t=t, factors=factors)


def evolve(state: RegisterState, t: float, bath: BathSpectrum,
           positions) -> dict[tuple[BasisLabel, BasisLabel], complex]:
    """Reduced register density at time ``t``, sparsely over the state's support.

    Entry ``(i, j)`` is ``c_i * conj(c_j) * exp(-eta_ij + i*phi_ij)``; diagonal
    entries never change.
    """
    if not isinstance(state, RegisterState):
        raise TypeError("evolve expects a RegisterState (normalization enforced)")
    labels = state.labels()
    fac = pair_factors(labels, t, bath, positions)
    amps = state.amplitudes
    density: dict[tuple[BasisLabel, BasisLabel], complex] = {}
    for i in labels:
        for j in labels:
            eta, phi = fac.factors[(i, j)]
            density[(i, j)] = amps[i] * np.conj(amps[j]) * np.exp(-eta + 1j * phi)
    return density


def fidelity(state: RegisterState, t: float, bath: BathSpectrum, positions) -> float:
    """Overlap of the evolved register density with the initial pure state.

    Equals 1 at ``t = 0`` and for any single basis label; the pairwise phase
    antisymmetry makes the sum real.
    """
    labels = state.labels()
    fac = pair_factors(labels, t, bath, positions)
    amps = state.amplitudes
    total = 0.0
    for i in labels:
        pi = abs(amps[i]) ** 2
        for j in labels:
            eta, phi = fac.factors[(i, j)]
            total += pi * abs(amps[j]) ** 2 * np.exp(-eta) * np.cos(phi)
    return float(total)


def factor_curves(i: BasisLabel, j: BasisLabel, times, bath: BathSpectrum,
                  positions) -> tuple[np.ndarray, np.ndarray]:
    """Damping exponent and phase of one coherence over a whole time grid."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    pos = _as_positions(positions)
    si = spin_structure_factor(i, bath.k, pos)
    sj = spin_structure_factor(j, bath.k, pos)
    lam1 = np.abs(si - sj) ** 2
    lam2 = np.abs(si) ** 2 - np.abs(sj) ** 2
    w = bath.omega
    base_eta = bath.g2 * coth_half(w, bath.temperature) / w**2 * lam1
    base_phi = bath.g2 / w**2 * lam2
    wt = np.outer(times, w)
    eta = (2.0 * np.sin(0.5 * wt) ** 2) @ base_eta
    phi = (wt - np.sin(wt)) @ base_phi
    return eta, phi


def fidelity_curve(state: RegisterState, times, bath: BathSpectrum,
                   positions) -> np.ndarray:
    """State fidelity over a whole time grid (vectorized over pairs and times)."""
    times = np.asarray(times, dtype=float)
    labels = state.labels()
    amps = state.amplitudes
    total = np.zeros_like(times)
    for a, i in enumerate(labels):
        for j in labels[a:]:
            pij = abs(amps[i]) ** 2 * abs(amps[j]) ** 2
            if i == j:
                total += pij
                continue
            eta, phi = factor_curves(i, j, times, bath, positions)
            total += 2.0 * pij * np.exp(-eta) * np.cos(phi)
    return total
