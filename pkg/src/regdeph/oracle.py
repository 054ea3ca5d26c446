"""Brute-force verification of the closed-form dynamics on small systems.

The joint register+bath state is kept as an explicit amplitude tensor over a
truncated number-state space per mode.  Because the coupling is diagonal in
the register basis and different modes commute at equal times, the propagator
factorizes into independent blocks per (register label, mode); each block is
integrated by a second-order midpoint split-step scheme built directly from
the time-dependent interaction Hamiltonian — no damping/phase formulas from
:mod:`regdeph.core` enter anywhere in the integration path.

Desk scale only: the state space is exponential in the register size.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .bath import BathSpectrum
from .core import BasisLabel, RegisterState

__all__ = [
    "TruncationLeakageError",
    "TruncatedBathState",
    "ThermalDensity",
    "OracleInstance",
    "InstanceCheck",
    "register_basis",
    "joint_state",
    "trotter_evolve",
    "closed_form_unitary_apply",
    "reduced_density",
    "state_norm",
    "mode_leakage",
    "thermal_reduced_density",
    "default_truncation",
    "random_instances",
    "check_instance",
    "default_suite",
]

LEAKAGE_TOL = 1e-6


class TruncationLeakageError(RuntimeError):
    """Raised when probability piles up in the top retained number state."""

    def __init__(self, leakage: float):
        super().__init__(
            f"truncation insufficient: top-level occupation probability {leakage:.3e} "
            f"exceeds {LEAKAGE_TOL:.0e}")
        self.leakage = leakage


def register_basis(n_qubits: int) -> tuple[BasisLabel, ...]:
    """All 2^L basis labels, in a fixed lexicographic (+1 before -1) order."""
    return tuple(BasisLabel(s) for s in itertools.product((1, -1), repeat=n_qubits))


def _sector_couplings(bath: BathSpectrum, positions, labels) -> np.ndarray:
    """Drive coefficient of every (register label, mode) block, shape (S, M).

    The per-mode coupling magnitude is ``sqrt(g2)`` with phase convention
    ``exp(-i k . r_l)`` at qubit ``l``; each label contributes its spin sum.
    """
    pos = np.asarray(positions, dtype=float)
    spins = np.array([lab.as_array() for lab in labels])
    phases = np.exp(-1j * (pos @ bath.k.T))  # (L, M)
    return np.sqrt(bath.g2)[None, :] * (spins @ phases)


def default_truncation(bath: BathSpectrum, positions, t: float,
                       alpha_max: float = 0.0, n_qubits: int | None = None) -> int:
    """Truncation dimension heuristic: mean scale plus a wide safety band.

    Uses the largest displacement any register label can induce by time ``t``
    plus the largest initial coherent amplitude; the leakage monitor remains
    the hard check.
    """
    if n_qubits is None:
        n_qubits = np.asarray(positions).shape[0]
    labels = register_basis(n_qubits)
    b = _sector_couplings(bath, positions, labels)
    disp = 2.0 * np.abs(b) / bath.omega[None, :]
    a = float(np.max(disp)) + float(alpha_max)
    return int(np.ceil(a * a + 6.0 * a)) + 10


@dataclass
class TruncatedBathState:
    """Joint register+bath amplitudes on a truncated number basis.

    ``tensor`` has one leading register axis (length ``2^L``, ordered as
    :func:`register_basis`) followed by one axis per mode of length
    ``n_max + 1``.
    """

    bath: BathSpectrum
    positions: np.ndarray
    labels: tuple[BasisLabel, ...]
    tensor: np.ndarray

    @property
    def n_max(self) -> int:
        return self.tensor.shape[1] - 1

    def copy(self) -> "TruncatedBathState":
        return TruncatedBathState(self.bath, self.positions, self.labels, self.tensor.copy())


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent-state column, renormalized on the retained levels."""
    n = np.arange(dim)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, dim)))])
    if alpha == 0:
        vec = np.zeros(dim, complex)
        vec[0] = 1.0
        return vec
    logs = n * np.log(np.abs(alpha)) - 0.5 * log_fact - 0.5 * np.abs(alpha) ** 2
    vec = np.exp(logs) * np.exp(1j * n * np.angle(alpha))
    return vec / np.linalg.norm(vec)


def joint_state(state: RegisterState, bath: BathSpectrum, positions,
                n_max: int | None = None, alphas=None, t_hint: float = 0.0) -> TruncatedBathState:
    """Assemble the joint tensor: register amplitudes times a product bath state.

    ``alphas`` gives one coherent amplitude per mode (default: vacuum).
    """
    positions = np.asarray(positions, dtype=float)
    labels = register_basis(state.n_qubits)
    if alphas is None:
        alphas = np.zeros(bath.n_modes, complex)
    alphas = np.asarray(alphas, dtype=complex)
    if alphas.shape != (bath.n_modes,):
        raise ValueError("need one coherent amplitude per mode")
    if n_max is None:
        n_max = default_truncation(bath, positions, t_hint,
                                   alpha_max=float(np.max(np.abs(alphas))),
                                   n_qubits=state.n_qubits)
    dim = n_max + 1
    bath_state = coherent_vector(alphas[0], dim)
    for alpha in alphas[1:]:
        bath_state = np.tensordot(bath_state, coherent_vector(alpha, dim), axes=0)
    tensor = np.zeros((len(labels),) + (dim,) * bath.n_modes, complex)
    amps = state.amplitudes
    for idx, lab in enumerate(labels):
        if lab in amps:
            tensor[idx] = amps[lab] * bath_state
    return TruncatedBathState(bath, positions, labels, tensor)


def _block_propagators(bath: BathSpectrum, positions, labels, t: float,
                       steps: int, dim: int) -> np.ndarray:
    """Accumulated midpoint split-step propagators, shape (S, M, dim, dim).

    Each step applies ``exp(-i dt H_k(t_mid))`` where the drive phase at the
    midpoint is folded in through number-operator rotations, so only one
    matrix exponential per block is ever needed.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    b = _sector_couplings(bath, positions, labels)  # (S, M)
    n_lab, n_modes = b.shape
    dt = t / steps
    n = np.arange(dim)
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)  # annihilation operator

    flat_b = b.reshape(-1)
    omega = np.tile(bath.omega, n_lab)
    base = np.empty((flat_b.size, dim, dim), complex)
    for idx, bc in enumerate(flat_b):
        h0 = bc * lower + np.conj(bc) * lower.T.conj()
        base[idx] = expm(-1j * dt * h0)

    if t == 0:
        eye = np.broadcast_to(np.eye(dim, dtype=complex), base.shape).copy()
        return eye.reshape(n_lab, n_modes, dim, dim)

    # rotating phases: r_mid at first midpoint, advanced by one dt per step
    r = np.exp(1j * np.outer(omega, n) * (0.5 * dt))
    r_inc = np.exp(1j * np.outer(omega, n) * dt)
    acc = np.broadcast_to(np.eye(dim, dtype=complex), base.shape).copy()
    for _ in range(steps):
        acc = np.conj(r)[:, :, None] * acc
        acc = base @ acc
        acc = r[:, :, None] * acc
        r = r * r_inc
    return acc.reshape(n_lab, n_modes, dim, dim)


def _apply_blocks(state: TruncatedBathState, blocks: np.ndarray) -> TruncatedBathState:
    """Apply one (dim x dim) matrix per (label, mode) along the right tensor axis."""
    out = state.tensor.copy()
    n_modes = state.bath.n_modes
    for s in range(len(state.labels)):
        block = out[s]
        for m in range(n_modes):
            moved = np.moveaxis(block, m, 0)
            shape = moved.shape
            moved = blocks[s, m] @ moved.reshape(shape[0], -1)
            block = np.moveaxis(moved.reshape(shape), 0, m)
        out[s] = block
    return TruncatedBathState(state.bath, state.positions, state.labels, out)


def state_norm(state: TruncatedBathState) -> float:
    return float(np.linalg.norm(state.tensor))


def mode_leakage(state: TruncatedBathState) -> float:
    """Largest total probability found in the top retained level of any mode."""
    worst = 0.0
    for m in range(state.bath.n_modes):
        top = np.take(state.tensor, state.tensor.shape[1 + m] - 1, axis=1 + m)
        worst = max(worst, float(np.sum(np.abs(top) ** 2)))
    return worst


def _check_leakage(state: TruncatedBathState):
    leak = mode_leakage(state)
    if leak > LEAKAGE_TOL:
        raise TruncationLeakageError(leak)


def trotter_evolve(state: TruncatedBathState, t: float, steps: int) -> TruncatedBathState:
    """Integrate the joint state to time ``t`` with ``steps`` midpoint sub-steps."""
    dim = state.tensor.shape[1]
    blocks = _block_propagators(state.bath, state.positions, state.labels, t, steps, dim)
    out = _apply_blocks(state, blocks)
    _check_leakage(out)
    return out


def closed_form_unitary_apply(state: TruncatedBathState, t: float,
                              include_phase: bool = True) -> TruncatedBathState:
    """Apply the analytic propagator: per-block displacement plus a scalar phase.

    With ``include_phase=False`` the scalar (label-dependent) phase is dropped;
    this ablation is expected to disagree with :func:`trotter_evolve` whenever
    the phase matters.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    bath = state.bath
    dim = state.tensor.shape[1]
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)
    b = _sector_couplings(bath, state.positions, state.labels)  # (S, M)
    blocks = np.empty((b.shape[0], b.shape[1], dim, dim), complex)
    phases = np.zeros(b.shape[0])
    for s in range(b.shape[0]):
        for m in range(b.shape[1]):
            w = bath.omega[m]
            z = np.conj(b[s, m]) * (1.0 - np.exp(1j * w * t)) / w
            blocks[s, m] = expm(z * lower.T.conj() - np.conj(z) * lower)
        phases[s] = np.sum(np.abs(b[s]) ** 2 * (bath.omega * t - np.sin(bath.omega * t))
                           / bath.omega**2)
    out = _apply_blocks(state, blocks)
    if include_phase:
        shape = (-1,) + (1,) * bath.n_modes
        out.tensor *= np.exp(1j * phases).reshape(shape)
    _check_leakage(out)
    return out


def reduced_density(state: TruncatedBathState) -> dict[tuple[BasisLabel, BasisLabel], complex]:
    """Trace out all modes: dense register density over the full label basis."""
    flat = state.tensor.reshape(len(state.labels), -1)
    rho = flat @ flat.T.conj()
    out: dict[tuple[BasisLabel, BasisLabel], complex] = {}
    for a, la in enumerate(state.labels):
        for b, lb in enumerate(state.labels):
            out[(la, lb)] = complex(rho[a, b])
    return out


@dataclass
class ThermalDensity:
    """Monte Carlo reduced density with per-entry statistical error bars."""

    entries: dict[tuple[BasisLabel, BasisLabel], complex]
    stderr: dict[tuple[BasisLabel, BasisLabel], float]
    n_samples: int


def thermal_reduced_density(state: RegisterState, t: float, bath: BathSpectrum,
                            positions, n_samples: int = 1000, seed: int = 0,
                            steps: int = 2048, n_max: int | None = None) -> ThermalDensity:
    """Reduced register density against a thermal bath, by coherent-state sampling.

    The thermal state of each mode is a Gaussian mixture of coherent states
    with variance equal to the mean occupation; each sample draws one
    amplitude per mode, integrates the joint dynamics and traces out the bath.
    At ``T = 0`` the mixture degenerates to the vacuum and a single
    deterministic sample is used.
    """
    positions = np.asarray(positions, dtype=float)
    occupations = bath.occupation()
    if bath.temperature == 0:
        n_samples = 1
        alphas = np.zeros((1, bath.n_modes), complex)
    else:
        if n_samples < 2:
            raise ValueError("thermal sampling needs n_samples >= 2")
        rng = np.random.default_rng(seed)
        scale = np.sqrt(occupations / 2.0)
        alphas = (rng.normal(size=(n_samples, bath.n_modes))
                  + 1j * rng.normal(size=(n_samples, bath.n_modes))) * scale[None, :]

    labels = state.labels()
    amps = state.amplitudes
    if n_max is None:
        n_max = default_truncation(bath, positions, t,
                                   alpha_max=float(np.max(np.abs(alphas))),
                                   n_qubits=state.n_qubits)
    dim = n_max + 1
    blocks = _block_propagators(bath, positions, labels, t, steps, dim)

    # evolve all sampled coherent columns at once, one matrix per (label, mode)
    evolved = np.empty((len(labels), bath.n_modes, dim, n_samples), complex)
    worst_leak = 0.0
    for m in range(bath.n_modes):
        cols = np.stack([coherent_vector(a, dim) for a in alphas[:, m]], axis=1)
        for s in range(len(labels)):
            out = blocks[s, m] @ cols
            evolved[s, m] = out
            worst_leak = max(worst_leak, float(np.max(np.abs(out[-1, :]) ** 2)))
    if worst_leak > LEAKAGE_TOL:
        raise TruncationLeakageError(worst_leak)

    entries: dict[tuple[BasisLabel, BasisLabel], complex] = {}
    stderr: dict[tuple[BasisLabel, BasisLabel], float] = {}
    for a, la in enumerate(labels):
        for b, lb in enumerate(labels):
            overlap = np.ones(n_samples, complex)
            for m in range(bath.n_modes):
                overlap *= np.sum(np.conj(evolved[b, m]) * evolved[a, m], axis=0)
            samples = amps[la] * np.conj(amps[lb]) * overlap
            mean = complex(np.mean(samples))
            entries[(la, lb)] = mean
            if n_samples > 1:
                var = float(np.var(samples.real, ddof=1) + np.var(samples.imag, ddof=1))
                stderr[(la, lb)] = float(np.sqrt(var / n_samples))
            else:
                stderr[(la, lb)] = 0.0
    return ThermalDensity(entries=entries, stderr=stderr, n_samples=n_samples)


# ---------------------------------------------------------------------------
# validation suite: brute force against the closed-form module
# ---------------------------------------------------------------------------

@dataclass
class OracleInstance:
    """One small register+bath system for cross-validation."""

    name: str
    state: RegisterState
    bath: BathSpectrum
    positions: np.ndarray
    t: float
    steps: int = 3000
    n_samples: int = 10_000
    seed: int = 0


@dataclass
class InstanceCheck:
    """Outcome of one cross-validation: worst deviation against its tolerance."""

    name: str
    deviation: float
    tolerance: float
    kind: str  # "absolute" (T=0) or "stderr-units" (thermal)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _paired_bath(freqs, shell_g2, temperature=0.0, axis=(1.0, 0.0, 0.0)) -> BathSpectrum:
    """Bath with every frequency shell emitted as a +/-k pair along ``axis``."""
    axis = np.asarray(axis, dtype=float)
    omega, g2, k = [], [], []
    for w, g in zip(freqs, shell_g2):
        for sign in (1.0, -1.0):
            omega.append(w)
            g2.append(g / 2.0)
            k.append(sign * w * axis)
    return BathSpectrum(omega=np.array(omega), k=np.array(k), g2=np.array(g2),
                        v=1.0, temperature=temperature)


def _random_state(rng, n_qubits: int) -> RegisterState:
    labels = list(register_basis(n_qubits))
    n_support = int(rng.integers(2, min(4, len(labels)) + 1))
    chosen = rng.choice(len(labels), size=n_support, replace=False)
    amps = {labels[idx]: complex(rng.normal(), rng.normal()) for idx in chosen}
    return RegisterState.from_unnormalized(amps)


def random_instances(n_instances: int, seed: int = 7,
                     temperature: float = 0.0,
                     n_samples: int = 10_000) -> list[OracleInstance]:
    """Random small instances whose mode sets keep the closed form exact.

    Multi-qubit baths use inversion-symmetric frequency shells; single-mode
    instances are restricted to one qubit or to a collective wave vector
    (perpendicular to the register axis), where no unpaired cross term exists.
    """
    rng = np.random.default_rng(seed)
    instances = []
    for idx in range(n_instances):
        n_qubits = int(rng.integers(1, 4))
        d = float(rng.uniform(0.6, 1.6))
        positions = np.zeros((n_qubits, 3))
        positions[:, 0] = d * np.arange(n_qubits)
        positions[:, 0] += rng.normal(0.0, 0.05 * d, size=n_qubits)
        t = float(rng.uniform(1.0, 5.0))
        style = idx % 3
        if style == 0 and n_qubits == 1:
            w = float(rng.uniform(0.6, 1.8))
            bath = BathSpectrum(omega=np.array([w]), k=np.array([[w, 0.0, 0.0]]),
                                g2=np.array([float(rng.uniform(0.02, 0.08))]),
                                v=1.0, temperature=temperature)
            name = f"single-mode-1q-{idx}"
        elif style == 1:
            w = float(rng.uniform(0.6, 1.8))
            bath = BathSpectrum(omega=np.array([w]), k=np.array([[0.0, w, 0.0]]),
                                g2=np.array([float(rng.uniform(0.02, 0.08))]),
                                v=1.0, temperature=temperature)
            name = f"collective-mode-{n_qubits}q-{idx}"
        else:
            n_shells = int(rng.integers(1, 3))
            freqs = rng.uniform(0.6, 1.8, size=n_shells)
            shell_g2 = rng.uniform(0.02, 0.08, size=n_shells)
            bath = _paired_bath(freqs, shell_g2, temperature=temperature)
            name = f"paired-{n_shells}shell-{n_qubits}q-{idx}"
        instances.append(OracleInstance(
            name=name, state=_random_state(rng, n_qubits), bath=bath,
            positions=positions, t=t, n_samples=n_samples, seed=int(rng.integers(2**31))))
    return instances


def check_instance(inst: OracleInstance, tolerance: float = 1e-4,
                   stderr_floor: float = 1e-9) -> InstanceCheck:
    """Compare the closed-form reduced density against the integrated oracle.

    At ``T = 0`` the comparison is absolute per entry; at ``T > 0`` deviations
    are measured in units of three Monte Carlo standard errors (with a small
    absolute floor for entries whose sampling variance vanishes).
    """
    from .core import evolve  # deferred: the dynamics here never use it

    closed = evolve(inst.state, inst.t, inst.bath, inst.positions)
    result = thermal_reduced_density(
        inst.state, inst.t, inst.bath, inst.positions,
        n_samples=inst.n_samples, seed=inst.seed, steps=inst.steps)
    if inst.bath.temperature == 0:
        dev = max(abs(closed[key] - result.entries[key]) for key in closed)
        return InstanceCheck(name=inst.name, deviation=float(dev),
                             tolerance=tolerance, kind="absolute")
    worst = 0.0
    for key, val in closed.items():
        allowed = 3.0 * result.stderr[key] + stderr_floor
        worst = max(worst, abs(val - result.entries[key]) / allowed)
    return InstanceCheck(name=inst.name, deviation=float(worst),
                         tolerance=1.0, kind="stderr-units")


def default_suite(seed: int = 7, n_cold: int = 6, n_thermal: int = 1,
                  thermal_samples: int = 4000) -> list[OracleInstance]:
    """The named validation suite run by the command-line ``validate-oracle``."""
    suite = random_instances(n_cold, seed=seed, temperature=0.0)
    suite += random_instances(n_thermal, seed=seed + 1, temperature=0.8,
                              n_samples=thermal_samples)
    return suite
