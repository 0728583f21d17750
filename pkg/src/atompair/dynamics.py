"""Single-atom master equation: construction, integration, steady states.

The density-matrix equation of the driven J=1/2 -> J=1/2 scheme at resonance
is, writing Gamma = gamma0 + gamma and labelling the levels 1..4 as in
:func:`atompair.atom_model.hg_level_scheme` (code indices 0..3),

    d rho11/dt = +i g rho21 - i g rho12 - 2 Gamma rho11
    d rho12/dt = +i g rho22 - i g rho11 -   Gamma rho12
    d rho13/dt = +i g rho23 + i g rho14 - 2 Gamma rho13
    d rho14/dt = +i g rho24 + i g rho13 -   Gamma rho14
    d rho22/dt = -i g rho21 + i g rho12 + 2 gamma0 rho11 + 2 gamma rho33
    d rho23/dt = +i g rho13 + i g rho24 -   Gamma rho23
    d rho24/dt = +i g rho14 + i g rho23
    d rho33/dt = -i g rho43 + i g rho34 - 2 Gamma rho33
    d rho34/dt = -i g rho44 + i g rho33 -   Gamma rho34
    d rho44/dt = -i g rho34 + i g rho43 + 2 gamma0 rho33 + 2 gamma rho11

with the remaining entries fixed by Hermiticity.  This is the Lindblad
equation with drive Hamiltonian H = -g(|1><2| + h.c.) + g(|3><4| + h.c.)
(the sign follows the orientation of the pi dipoles) and the four jump
operators sqrt(2 gamma0)|2><1|, sqrt(2 gamma0)|4><3|, sqrt(2 gamma)|4><1|,
sqrt(2 gamma)|2><3|.

The unique steady state for g > 0 is

    rho11 = rho33 = g^2 / (2 (2 g^2 + Gamma^2))
    rho22 = rho44 = (g^2 + Gamma^2) / (2 (2 g^2 + Gamma^2))
    rho12 = -rho34 = i g Gamma / (2 (2 g^2 + Gamma^2))

with all cross coherences (rho13, rho14, rho23, rho24) equal to zero.

Superoperators act on column-major (Fortran-order) vectorized density
matrices: vec(A rho B) = kron(B.T, A) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .atom_model import DriveDecayParams, LevelScheme, Z_HAT

__all__ = [
    "DegenerateSteadyStateError",
    "vectorize",
    "unvectorize",
    "pure_state",
    "check_density_matrix",
    "drive_hamiltonian",
    "jump_operators",
    "liouvillian_matrix",
    "build_liouvillian",
    "liouvillian_residual",
    "evolve",
    "steady_state_numeric",
    "steady_state_analytic",
    "two_level_steady_state_analytic",
    "QuantumJumpResult",
    "quantum_jump_estimate",
]


class DegenerateSteadyStateError(ValueError):
    """The Liouvillian null space has dimension > 1 (no unique steady state)."""


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-major (Fortran-order) vectorization of a square matrix."""
    return np.asarray(rho, dtype=complex).flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


def pure_state(amplitudes) -> np.ndarray:
    """Density matrix |psi><psi| of a (normalized) amplitude vector."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero state vector")
    psi = psi / norm
    return np.outer(psi, psi.conj())


def check_density_matrix(
    rho,
    dim: int | None = None,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    eig_floor: float = 1e-9,
) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity (up to tolerances).

    Returns the input as a complex ndarray; raises ValueError naming the
    violated property otherwise.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {rho.shape[0]}")
    herm_defect = np.max(np.abs(rho - rho.conj().T))
    if herm_defect > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm_defect:.3e}")
    trace_defect = abs(rho.trace() - 1.0)
    if trace_defect > trace_tol:
        raise ValueError(f"trace differs from 1 by {trace_defect:.3e}")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if min_eig < -eig_floor:
        raise ValueError(f"not positive semidefinite: min eigenvalue {min_eig:.3e}")
    return rho


def drive_hamiltonian(scheme: LevelScheme, params: DriveDecayParams) -> np.ndarray:
    """Resonant drive Hamiltonian in the rotating frame.

    Each driven transition contributes g * sign(z . dipole) (|u><l| + |l><u|);
    the relative sign between the two pi channels follows their antiparallel
    dipoles.  Driven transitions must carry dipoles parallel to z (the drive
    polarization).
    """
    dim = scheme.n_levels
    h = np.zeros((dim, dim), dtype=complex)
    for t in scheme.transitions:
        if not t.driven:
            continue
        z_component = Z_HAT @ t.dipole
        magnitude = np.linalg.norm(t.dipole)
        if magnitude == 0 or abs(abs(z_component) - magnitude) > 1e-12 * max(1.0, magnitude):
            raise ValueError(
                f"driven transition {t.upper}->{t.lower} must have a dipole parallel to z"
            )
        coupling = params.g * math.copysign(1.0, z_component.real)
        h[t.upper, t.lower] += coupling
        h[t.lower, t.upper] += coupling
    return h


def jump_operators(scheme: LevelScheme) -> list[np.ndarray]:
    """One lowering operator sqrt(rate) |lower><upper| per decay channel."""
    dim = scheme.n_levels
    ops = []
    for t in scheme.transitions:
        op = np.zeros((dim, dim), dtype=complex)
        op[t.lower, t.upper] = math.sqrt(t.decay_rate)
        ops.append(op)
    return ops


def liouvillian_matrix(hamiltonian: np.ndarray, jumps) -> np.ndarray:
    """Lindblad superoperator on column-major vectorized density matrices."""
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim)
    liou = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op in jumps:
        op = np.asarray(op, dtype=complex)
        opdop = op.conj().T @ op
        liou += np.kron(op.conj(), op)
        liou -= 0.5 * (np.kron(eye, opdop) + np.kron(opdop.T, eye))
    return liou


def build_liouvillian(scheme: LevelScheme, params: DriveDecayParams) -> np.ndarray:
    """Superoperator generating d(vec rho)/dt for one atom of the scheme."""
    return liouvillian_matrix(drive_hamiltonian(scheme, params), jump_operators(scheme))


def liouvillian_residual(liouvillian: np.ndarray, rho: np.ndarray) -> float:
    """Euclidean norm of L vec(rho); zero iff rho is stationary."""
    return float(np.linalg.norm(liouvillian @ vectorize(rho)))


def evolve(liouvillian: np.ndarray, rho0, t_final: float, dt: float) -> np.ndarray:
    """Propagate rho0 to t_final with fixed-step classical RK4.

    The generator is linear and time independent, so the usual four stages
    are computed from precomputed powers-free matrix-vector products.  A
    short final step covers any remainder of t_final that is not an integer
    multiple of dt.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    liou = np.asarray(liouvillian, dtype=complex)
    dim = int(round(math.sqrt(liou.shape[0])))
    rho0 = check_density_matrix(rho0, dim, herm_tol=1e-8, trace_tol=1e-8, eig_floor=1e-7)
    vec = vectorize(rho0)

    def rk4_step(v, h):
        k1 = liou @ v
        k2 = liou @ (v + 0.5 * h * k1)
        k3 = liou @ (v + 0.5 * h * k2)
        k4 = liou @ (v + h * k3)
        return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    n_full = int(t_final / dt)
    remainder = t_final - n_full * dt
    for _ in range(n_full):
        vec = rk4_step(vec, dt)
    if remainder > 1e-15 * max(t_final, 1.0):
        vec = rk4_step(vec, remainder)
    return unvectorize(vec, dim)


def steady_state_numeric(liouvillian: np.ndarray, *, degeneracy_tol: float = 1e-10) -> np.ndarray:
    """Steady state as the (unique) null vector of the Liouvillian.

    Uses a dense SVD; the returned matrix is Hermitized and trace
    normalized.  Raises :class:`DegenerateSteadyStateError` when the null
    space has dimension > 1, which happens for g = 0 where any population
    split of the ground manifold (and its internal coherence) is stationary.
    """
    liou = np.asarray(liouvillian, dtype=complex)
    dim = int(round(math.sqrt(liou.shape[0])))
    _, svals, vh = np.linalg.svd(liou)
    scale = svals[0] if svals[0] > 0 else 1.0
    if svals[-1] > 1e-8 * scale:
        raise ValueError("Liouvillian has no null vector (not trace preserving?)")
    if svals[-2] < degeneracy_tol * scale:
        n_null = int(np.sum(svals < degeneracy_tol * scale))
        raise DegenerateSteadyStateError(
            f"steady state is not unique: Liouvillian null space has dimension {n_null} "
            "(undriven ground-manifold populations are all stationary at g = 0)"
        )
    candidate = unvectorize(vh[-1].conj(), dim)
    trace = candidate.trace()
    if abs(trace) < 1e-12:
        raise ValueError("null vector is traceless; cannot normalize to a state")
    candidate = candidate / trace
    return 0.5 * (candidate + candidate.conj().T)


def steady_state_analytic(params: DriveDecayParams, *, corrected: bool = True) -> np.ndarray:
    """Closed-form steady state of the four-level scheme (module docstring).

    With ``corrected=False`` the ground populations use a discarded candidate
    formula, rho22 = rho44 = 1 - (3 g^2 - Gamma^2)/(2 (2 g^2 + Gamma^2)),
    which violates trace normalization (trace -> 3 as g -> 0).  It is kept
    only so the validation report can demonstrate that the trace and
    stationarity checks reject it.
    """
    if params.g <= 0:
        raise ValueError("closed-form steady state requires g > 0")
    g = params.g
    gam = params.total
    denom = 2.0 * (2.0 * g**2 + gam**2)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[2, 2] = g**2 / denom
    if corrected:
        rho[1, 1] = rho[3, 3] = (g**2 + gam**2) / denom
    else:
        rho[1, 1] = rho[3, 3] = 1.0 - (3.0 * g**2 - gam**2) / denom
    rho[0, 1] = 1j * g * gam / denom
    rho[1, 0] = rho[0, 1].conjugate()
    rho[2, 3] = -rho[0, 1]
    rho[3, 2] = rho[2, 3].conjugate()
    return rho


def two_level_steady_state_analytic(params: DriveDecayParams) -> np.ndarray:
    """Closed-form steady state of the driven two-level scheme.

    Uses the total half-rate gamma = gamma0 + gamma as the single decay
    channel's half-rate: rho_ee = g^2/(2 g^2 + gamma^2) and
    rho_eg = -i g gamma/(2 g^2 + gamma^2).
    """
    if params.g <= 0:
        raise ValueError("closed-form steady state requires g > 0")
    g = params.g
    gam = params.total
    denom = 2.0 * g**2 + gam**2
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = g**2 / denom
    rho[1, 1] = (g**2 + gam**2) / denom
    rho[0, 1] = -1j * g * gam / denom
    rho[1, 0] = rho[0, 1].conjugate()
    return rho


@dataclass(frozen=True, eq=False)
class QuantumJumpResult:
    """Trajectory-ensemble steady-state estimate with per-entry standard errors."""

    rho: np.ndarray
    stderr: np.ndarray
    n_traj: int
    n_samples: int


def _chunk_propagators(h_eff: np.ndarray, dt: float, depth: int) -> list[np.ndarray]:
    """Exact propagators for the dyadic subdivisions dt/2, ..., dt/2^depth."""
    a = -1j * h_eff
    return [expm(a * (dt / 2.0**k)) for k in range(1, depth + 1)]


def quantum_jump_estimate(
    scheme: LevelScheme,
    params: DriveDecayParams,
    n_traj: int,
    t_total: float,
    seed: int,
    *,
    dt: float | None = None,
    burn_fraction: float = 0.1,
    initial_level: int | None = None,
) -> QuantumJumpResult:
    """Steady-state estimate from a quantum-jump (Monte Carlo wave function) unraveling.

    The non-Hermitian drift H_eff = H - (i/2) sum_k L_k^dag L_k is applied
    with exact matrix exponentials on a fixed sampling grid; within a grid
    step, the jump time (where the squared norm decays through the drawn
    threshold) is located by dyadic bisection, so the estimator carries no
    integrator bias.  The first ``burn_fraction`` of each trajectory is
    discarded; the remaining grid samples of the normalized projector are
    time averaged per trajectory, and the standard error of each density
    matrix entry is taken across trajectories.

    Determinism: trajectory i consumes only its own RNG substream, spawned
    from ``SeedSequence(seed)``, so results are bit-identical for a fixed
    seed and independent of any batching or scheduling order.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if t_total <= 0:
        raise ValueError("t_total must be > 0")
    if not 0.0 <= burn_fraction < 1.0:
        raise ValueError("burn_fraction must be in [0, 1)")
    dim = scheme.n_levels
    if initial_level is None:
        initial_level = min(scheme.ground_levels)
    if not 0 <= initial_level < dim:
        raise ValueError(f"initial level {initial_level} out of range")
    if dt is None:
        dt = 0.02 / params.total

    h_eff = drive_hamiltonian(scheme, params).astype(complex)
    channels = [(t.upper, t.lower, t.decay_rate) for t in scheme.transitions]
    for upper, _, rate in channels:
        h_eff[upper, upper] += -0.5j * rate

    depth = 30
    u_levels = _chunk_propagators(h_eff, dt, depth)
    # chunk sequence dt/2, dt/4, ..., dt/2^depth, dt/2^depth sums to exactly dt
    chunk_seq = list(range(depth)) + [depth - 1]
    u_step = expm(-1j * h_eff * dt)

    n_steps = int(round(t_total / dt))
    burn_steps = int(round(burn_fraction * n_steps))
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_traj)]

    psi = np.zeros((n_traj, dim), dtype=complex)
    psi[:, initial_level] = 1.0
    thresholds = np.array([rng.random() for rng in rngs])
    acc = np.zeros((n_traj, dim, dim), dtype=complex)
    n_samples = 0

    uppers = np.array([c[0] for c in channels])
    rates = np.array([c[2] for c in channels])

    def apply_jump(state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        weights = rates * np.abs(state[uppers]) ** 2
        total = weights.sum()
        if total <= 0:
            # norm threshold hit with no decaying amplitude left; numerically
            # unreachable for gamma0+gamma > 0, kept as a guard
            return state / np.linalg.norm(state)
        pick = np.searchsorted(np.cumsum(weights) / total, rng.random(), side="right")
        pick = min(pick, len(channels) - 1)
        out = np.zeros_like(state)
        out[channels[pick][1]] = 1.0
        return out

    def locate_first_jumps(pos: np.ndarray, thresh: np.ndarray):
        """Advance each row up to (just before) its first norm crossing within dt.

        Returns the advanced states and the boolean matrix of applied chunks.
        """
        applied = np.zeros((pos.shape[0], len(chunk_seq)), dtype=bool)
        for j, level in enumerate(chunk_seq):
            trial = pos @ u_levels[level].T
            ok = np.einsum("ij,ij->i", trial, trial.conj()).real >= thresh
            if ok.any():
                pos[ok] = trial[ok]
                applied[ok, j] = True
        return pos, applied

    def finish_scalar(state, pending_chunks, thresh, rng):
        """Walk the remaining chunks of one row, handling further jumps coarsely."""
        for j in pending_chunks:
            while True:
                trial = u_levels[chunk_seq[j]] @ state
                if np.vdot(trial, trial).real >= thresh:
                    state = trial
                    break
                state = apply_jump(state, rng)
                thresh = rng.random()
        return state, thresh

    for step in range(n_steps):
        trial = psi @ u_step.T
        norms2 = np.einsum("ij,ij->i", trial, trial.conj()).real
        crossed = norms2 < thresholds
        if crossed.any():
            idx = np.flatnonzero(crossed)
            pos, applied = locate_first_jumps(psi[idx].copy(), thresholds[idx])
            # rows that still crossed after the sweep jump now; float jitter can
            # let a row complete the full step instead, which is fine as is
            jumped_rows = ~applied.all(axis=1)
            for local in np.flatnonzero(jumped_rows):
                rng = rngs[idx[local]]
                pos[local] = apply_jump(pos[local], rng)
                thresholds[idx[local]] = rng.random()
            # complete the step through every chunk that was not applied
            pending = ~applied
            before = pos.copy()
            for j in range(len(chunk_seq)):
                mask = pending[:, j]
                if mask.any():
                    pos[mask] = pos[mask] @ u_levels[chunk_seq[j]].T
            # rare second crossing inside the completion: redo those rows exactly
            end_norms2 = np.einsum("ij,ij->i", pos, pos.conj()).real
            for local in np.flatnonzero(end_norms2 < thresholds[idx]):
                traj = idx[local]
                state, thresh = finish_scalar(
                    before[local],
                    list(np.flatnonzero(pending[local])),
                    thresholds[traj],
                    rngs[traj],
                )
                pos[local] = state
                thresholds[traj] = thresh
            trial[idx] = pos
        psi = trial
        if step >= burn_steps:
            norms2 = np.einsum("ij,ij->i", psi, psi.conj()).real
            normed = psi / np.sqrt(norms2)[:, None]
            acc += np.einsum("ti,tj->tij", normed, normed.conj())
            n_samples += 1

    if n_samples == 0:
        raise ValueError("no samples collected; decrease burn_fraction or increase t_total")
    per_traj = acc / n_samples
    rho = per_traj.mean(axis=0)
    if n_traj > 1:
        stderr = per_traj.std(axis=0, ddof=1) / math.sqrt(n_traj)
    else:
        stderr = np.full((dim, dim), np.inf)
    return QuantumJumpResult(rho=rho, stderr=stderr.real, n_traj=n_traj, n_samples=n_samples)
