"""Subdecoherent pairing encodings and their residual-decoherence check.

Both encodings trade one logical qubit for a pair of physical qubits whose
spins are arranged so that the pair's contribution to the bath structure
factor cancels — exactly for a perfectly collective bath (adjacent pairing),
or at the dominant wavenumber for a peaked bath (modulated pairing at
distance ``m``).  This is decoherence avoidance, not error correction: a
decoded pair mismatch is reported, never repaired.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bath import BathSpectrum
from .core import BasisLabel, RegisterState, pair_factors
from .geometry import RegisterGeometry

__all__ = [
    "PairingPlan",
    "DecodeResult",
    "SubdecoherenceResidual",
    "encode_adjacent",
    "decode_adjacent",
    "find_pairing",
    "encode_modulated",
    "decode_modulated",
    "subdecoherence_residual",
]


@dataclass(frozen=True)
class PairingPlan:
    """A pairing distance ``m`` with its parity integer ``n`` and commensuration residual.

    ``residual`` is ``|m * kbar * d / pi - n|``; at zero the pair separation is
    an exact half-wavelength multiple of the dominant mode.  ``pairs`` lists
    the disjoint (site, partner) cover when a register size was supplied.
    """

    m: int
    n: int
    residual: float
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.m < 1 or self.n < 0 or self.residual < 0:
            raise ValueError("need m >= 1, n >= 0, residual >= 0")

    def physical_pairs(self, n_logical: int) -> tuple[tuple[int, int], ...]:
        """Disjoint (site, site+m) cover of ``2*n_logical`` sites, in blocks of 2m."""
        return _block_pairs(self.m, n_logical)


def _block_pairs(m: int, n_logical: int) -> tuple[tuple[int, int], ...]:
    if n_logical % m != 0:
        raise ValueError(
            f"register of {n_logical} logical qubits cannot be covered by "
            f"disjoint blocks of pairing distance m={m}")
    pairs = []
    for block in range(n_logical // m):
        base = 2 * m * block
        for r in range(m):
            pairs.append((base + r, base + r + m))
    return tuple(pairs)


def find_pairing(kbar: float, d: float, m_max: int = 10, eps_tol: float = 0.1,
                 n_logical: int | None = None) -> PairingPlan | None:
    """Search for the smallest pairing distance commensurate with ``kbar``.

    Scans ``m = 1..m_max`` for an integer ``n`` with
    ``|m*kbar*d/pi - n| <= eps_tol`` and returns the first hit (for fixed
    ``m`` the nearest integer is optimal).  Returns ``None`` when no pairing
    exists within tolerance — callers must handle that outcome explicitly.
    """
    if kbar <= 0 or d <= 0:
        raise ValueError("kbar and d must be positive")
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    if eps_tol <= 0:
        raise ValueError(f"eps_tol must be positive, got {eps_tol}")
    ratio = kbar * d / np.pi
    for m in range(1, m_max + 1):
        n = int(round(m * ratio))
        eps = abs(m * ratio - n)
        if eps <= eps_tol:
            pairs = _block_pairs(m, n_logical) if n_logical is not None else ()
            return PairingPlan(m=m, n=n, residual=eps, pairs=pairs)
    return None


def _encode_label(label: BasisLabel, pairs, partner_sign) -> BasisLabel:
    n_logical = len(label)
    spins = [0] * (2 * n_logical)
    for q, (site, partner) in enumerate(pairs):
        s = label.spins[q]
        spins[site] = s
        spins[partner] = partner_sign * s
    return BasisLabel(tuple(spins))


def _encode(obj, pairs, partner_sign):
    if isinstance(obj, BasisLabel):
        if len(obj) != len(pairs):
            raise ValueError(f"label of {len(obj)} qubits does not match {len(pairs)} pairs")
        return _encode_label(obj, pairs, partner_sign)
    if isinstance(obj, RegisterState):
        if obj.n_qubits != len(pairs):
            raise ValueError(f"state of {obj.n_qubits} qubits does not match {len(pairs)} pairs")
        return RegisterState({_encode_label(lab, pairs, partner_sign): amp
                              for lab, amp in obj.items()})
    raise TypeError(f"cannot encode {type(obj).__name__}")


def encode_adjacent(logical):
    """Map each logical spin ``s`` to the adjacent physical pair ``(s, -s)``.

    Logical qubit ``q`` occupies physical sites ``2q`` and ``2q+1``.  Accepts a
    basis label or a register state; superpositions map linearly with
    amplitudes unchanged.
    """
    n = len(logical) if isinstance(logical, BasisLabel) else logical.n_qubits
    pairs = tuple((2 * q, 2 * q + 1) for q in range(n))
    return _encode(logical, pairs, -1)


def encode_modulated(logical, plan: PairingPlan):
    """Map logical spin ``s`` at pair ``(l, l+m)`` to ``(s, s * (-1)**(n+1))``.

    With even parity ``n`` this reproduces the adjacent-pair sign pattern; odd
    parity aligns the partner spin instead, compensating the sign the dominant
    mode accumulates over the ``m``-site separation.
    """
    n_logical = len(logical) if isinstance(logical, BasisLabel) else logical.n_qubits
    pairs = plan.pairs if len(plan.pairs) == n_logical else plan.physical_pairs(n_logical)
    sign = (-1) ** (plan.n + 1)
    return _encode(logical, pairs, sign)


@dataclass(frozen=True)
class DecodeResult:
    """Logical label read from the first pair members, plus any pair mismatches."""

    logical: BasisLabel
    mismatched_pairs: tuple[int, ...]

    @property
    def clean(self) -> bool:
        return not self.mismatched_pairs


def _decode(physical: BasisLabel, pairs, partner_sign) -> DecodeResult:
    if len(physical) != 2 * len(pairs):
        raise ValueError(f"physical label of {len(physical)} qubits does not match "
                         f"{len(pairs)} pairs")
    logical = []
    bad = []
    for q, (site, partner) in enumerate(pairs):
        s = physical.spins[site]
        logical.append(s)
        if physical.spins[partner] != partner_sign * s:
            bad.append(q)
    return DecodeResult(logical=BasisLabel(tuple(logical)), mismatched_pairs=tuple(bad))


def decode_adjacent(physical: BasisLabel) -> DecodeResult:
    """Left inverse of :func:`encode_adjacent`; mismatches are reported, not fixed."""
    if len(physical) % 2 != 0:
        raise ValueError("physical register must have an even number of qubits")
    n = len(physical) // 2
    pairs = tuple((2 * q, 2 * q + 1) for q in range(n))
    return _decode(physical, pairs, -1)


def decode_modulated(physical: BasisLabel, plan: PairingPlan) -> DecodeResult:
    """Left inverse of :func:`encode_modulated`; mismatches are reported, not fixed."""
    if len(physical) % 2 != 0:
        raise ValueError("physical register must have an even number of qubits")
    pairs = plan.physical_pairs(len(physical) // 2)
    return _decode(physical, pairs, (-1) ** (plan.n + 1))


@dataclass(frozen=True)
class SubdecoherenceResidual:
    """Worst damping exponent and phase over the encoded coherence pairs."""

    max_eta: float
    max_abs_phi: float


def subdecoherence_residual(code, geometry: RegisterGeometry, bath: BathSpectrum,
                            t: float, states: Iterable) -> SubdecoherenceResidual:
    """Residual decoherence of encoded states under a concrete bath.

    ``code`` is either the string ``"adjacent"`` or a :class:`PairingPlan`;
    every basis label in the support of ``states`` (labels or register states,
    logical) is encoded onto the physical register described by ``geometry``,
    and the damping/phase factors are maximized over all ordered pairs of the
    resulting physical labels.
    """
    if code == "adjacent":
        encoder = encode_adjacent
    elif isinstance(code, PairingPlan):
        def encoder(obj):
            return encode_modulated(obj, code)
    else:
        raise ValueError(f"unknown code {code!r}: expected 'adjacent' or a PairingPlan")

    encoded: list[BasisLabel] = []
    seen = set()
    for obj in states:
        labels = [obj] if isinstance(obj, BasisLabel) else obj.labels()
        for lab in labels:
            phys = encoder(lab)
            if phys not in seen:
                seen.add(phys)
                encoded.append(phys)
    if not encoded:
        raise ValueError("state set is empty")
    if len(encoded[0]) != geometry.n_qubits:
        raise ValueError(
            f"encoded labels need {len(encoded[0])} physical qubits but the "
            f"geometry has {geometry.n_qubits}")
    factors = pair_factors(encoded, t, bath, geometry.positions)
    max_eta = 0.0
    max_phi = 0.0
    for (i, j), (eta, phi) in factors.factors.items():
        if i is j:
            continue
        max_eta = max(max_eta, eta)
        max_phi = max(max_phi, abs(phi))
    return SubdecoherenceResidual(max_eta=max_eta, max_abs_phi=max_phi)
