"""Two-level coupler + resonator dynamics in a truncated Fock space.

Builds the coupler-mediated pair-exchange Hamiltonian

    H = sum_j w_j a_j^dag a_j + (w_a/2) sigma_z
        + (i g / 2) sigma_x [(a_l - a_l^dag) - (a_m - a_m^dag)]

over the basis {qubit} x {Fock}^n_modes and propagates states unitarily.
Counter-rotating terms are kept by default; the rotating-wave form is an
optional mode that serves as the analytic oracle.  Frequencies may be given
in any consistent angular unit (hbar = 1 internally).

Hamiltonian construction is pure; one evolution is sequential, and
independent runs may execute concurrently.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .model import FLUX_QUANTUM, HBAR

NORM_TOL = 1e-9


class NormDriftError(RuntimeError):
    """State norm drifted beyond tolerance; reduce the time step."""


@dataclass(frozen=True)
class ResonatorParams:
    """Transmission-line mode feeding the coupler interface.

    Attributes:
        angular_frequency: mode frequency, rad/s.
        inductance_density: line inductance per unit length, H/m.
        effective_length: bare length plus interface segment, meters.
        interface_length: coupling segment length, meters.
        mode: harmonic index of the addressed mode (the interface current is
            derived for the second harmonic).
    """

    angular_frequency: float
    inductance_density: float
    effective_length: float
    interface_length: float
    mode: int = 2

    def __post_init__(self):
        if self.angular_frequency <= 0.0 or self.inductance_density <= 0.0:
            raise ValueError("frequency and inductance density must be positive")
        if not 0.0 <= self.interface_length < self.effective_length:
            raise ValueError("interface must be shorter than the resonator")


def _mode_current_scale(p: ResonatorParams) -> float:
    return math.sqrt(HBAR * p.angular_frequency / (p.inductance_density * p.effective_length))


def resonator_current_amplitude(p: ResonatorParams) -> float:
    """Peak-to-peak bias current the mode pushes through the interface, amperes.

    ``2*sqrt(hbar*w/(l_s*L))*sin(pi*d/L)`` for the second-harmonic mode: the
    interface sees the difference of the mode current at its two ends.
    """
    if p.mode != 2:
        raise ValueError("interface current is derived for the second-harmonic mode")
    return 2.0 * _mode_current_scale(p) * math.sin(math.pi * p.interface_length / p.effective_length)


def resonator_current_rms(p: ResonatorParams) -> float:
    """Root-mean-square mode current, ``sqrt(hbar*w/(l_s*L))/sqrt(2)``."""
    return _mode_current_scale(p) / math.sqrt(2.0)


def coupling_strength(well_phase: float, p: ResonatorParams) -> float:
    """Qubit-resonator coupling rate, rad/s.

    ``g = well_phase * Phi_0 * sqrt(hbar*w/(l_s*L)) * (d/L) / hbar``; the
    well displacement comes from the minimizer at zero bias.
    """
    return (
        well_phase
        * FLUX_QUANTUM
        * _mode_current_scale(p)
        * (p.interface_length / p.effective_length)
        / HBAR
    )


@dataclass(frozen=True)
class QuantumSystem:
    """Truncated-Fock Hamiltonian for the coupler qubit and resonator modes."""

    n_modes: int
    fock_cutoff: int
    mode_frequencies: tuple[float, ...]
    qubit_splitting: float
    coupling: float
    selected_pair: tuple[int, int]
    rwa: bool
    hamiltonian: np.ndarray = field(repr=False)
    state: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * (self.fock_cutoff + 1) ** self.n_modes


def basis_index(sys: QuantumSystem, qubit: int, occupations) -> int:
    """Flat index of |qubit; n_1 ... n_k> in the kron ordering (qubit first)."""
    if qubit not in (0, 1):
        raise ValueError("qubit level must be 0 (ground) or 1 (excited)")
    occupations = tuple(occupations)
    if len(occupations) != sys.n_modes:
        raise ValueError("one occupation per mode required")
    size = sys.fock_cutoff + 1
    idx = qubit
    for n in occupations:
        if not 0 <= n <= sys.fock_cutoff:
            raise ValueError(f"occupation {n} outside the Fock cutoff")
        idx = idx * size + n
    return idx


def basis_state(sys: QuantumSystem, qubit: int, occupations) -> np.ndarray:
    state = np.zeros(sys.dim, dtype=complex)
    state[basis_index(sys, qubit, occupations)] = 1.0
    return state


def _mode_operator(op: np.ndarray, mode: int, n_modes: int, size: int) -> np.ndarray:
    mats = [np.eye(2)] + [np.eye(size)] * n_modes
    mats[mode] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def number_operator(sys: QuantumSystem, mode: int) -> np.ndarray:
    """Photon-number operator of 1-based ``mode`` on the full space."""
    size = sys.fock_cutoff + 1
    return _mode_operator(np.diag(np.arange(size, dtype=float)), mode, sys.n_modes, size)


def qubit_z_operator(sys: QuantumSystem) -> np.ndarray:
    size = sys.fock_cutoff + 1
    return _mode_operator(np.diag([-1.0, 1.0]), 0, sys.n_modes, size)


def build_hamiltonian(
    selected_pair: tuple[int, int],
    n_modes: int = 3,
    fock_cutoff: int = 3,
    mode_frequencies=1.0,
    qubit_splitting: float = 1.0,
    coupling: float = 0.0,
    rwa: bool = False,
) -> QuantumSystem:
    """Assemble the pair-exchange Hamiltonian.

    Args:
        selected_pair: 1-based modes (l, m) exchanged through the coupler.
        mode_frequencies: scalar (shared) or one frequency per mode.
        rwa: drop counter-rotating terms (analytic-oracle mode).

    The coupling term touches only the selected pair, so the photon number of
    every other mode commutes with the Hamiltonian exactly.
    """
    l, m = selected_pair
    if not (1 <= l <= n_modes and 1 <= m <= n_modes) or l == m:
        raise ValueError(f"selected pair {selected_pair} invalid for {n_modes} modes")
    if fock_cutoff < 0:
        raise ValueError("fock cutoff must be non-negative")
    if fock_cutoff == 0 and coupling != 0.0:
        warnings.warn("fock cutoff 0 cannot host the exchanged photon", stacklevel=2)
    if np.isscalar(mode_frequencies):
        freqs = (float(mode_frequencies),) * n_modes
    else:
        freqs = tuple(float(w) for w in mode_frequencies)
        if len(freqs) != n_modes:
            raise ValueError("one frequency per mode required")

    size = fock_cutoff + 1
    lower = np.diag(np.sqrt(np.arange(1, size)), k=1)  # annihilation on one mode
    number = lower.T @ lower
    dim = 2 * size**n_modes
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n_modes):
        h += freqs[j] * _mode_operator(number, j + 1, n_modes, size)
    h += 0.5 * qubit_splitting * _mode_operator(np.diag([-1.0, 1.0]), 0, n_modes, size)

    a_l = _mode_operator(lower, l, n_modes, size)
    a_m = _mode_operator(lower, m, n_modes, size)
    if rwa:
        sig_plus = _mode_operator(np.array([[0.0, 0.0], [1.0, 0.0]]), 0, n_modes, size)
        term = 0.5j * coupling * sig_plus @ (a_l - a_m)
        h += term + term.conj().T
    else:
        sig_x = _mode_operator(np.array([[0.0, 1.0], [1.0, 0.0]]), 0, n_modes, size)
        quad = (a_l - a_l.conj().T) - (a_m - a_m.conj().T)
        h += 0.5j * coupling * sig_x @ quad

    herm_defect = np.max(np.abs(h - h.conj().T))
    if herm_defect > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise ValueError(f"assembled Hamiltonian is not Hermitian (defect {herm_defect:g})")

    ground = np.zeros(dim, dtype=complex)
    ground[0] = 1.0
    return QuantumSystem(
        n_modes=n_modes,
        fock_cutoff=fock_cutoff,
        mode_frequencies=freqs,
        qubit_splitting=float(qubit_splitting),
        coupling=float(coupling),
        selected_pair=(l, m),
        rwa=rwa,
        hamiltonian=h,
        state=ground,
    )


@dataclass(frozen=True)
class StateOccupations:
    modes: tuple[float, ...]
    sigma_z: float


def occupations(state: np.ndarray, sys: QuantumSystem) -> StateOccupations:
    """Per-mode photon expectations and the qubit z expectation."""
    size = sys.fock_cutoff + 1
    weights = np.abs(np.asarray(state)) ** 2
    weights = weights.reshape((2,) + (size,) * sys.n_modes)
    modes = []
    counts = np.arange(size, dtype=float)
    for j in range(sys.n_modes):
        marginal = weights.sum(axis=tuple(ax for ax in range(sys.n_modes + 1) if ax != j + 1))
        modes.append(float(marginal @ counts))
    sigma_z = float(weights[1].sum() - weights[0].sum())
    return StateOccupations(modes=tuple(modes), sigma_z=sigma_z)


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of one unitary evolution."""

    times: np.ndarray
    states: np.ndarray  # (n_samples, dim)
    system: QuantumSystem

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def occupations_array(self) -> np.ndarray:
        """(n_samples, n_modes) photon expectations, vectorized."""
        size = self.system.fock_cutoff + 1
        weights = np.abs(self.states) ** 2
        weights = weights.reshape((len(self.times), 2) + (size,) * self.system.n_modes)
        counts = np.arange(size, dtype=float)
        cols = []
        for j in range(self.system.n_modes):
            axes = tuple(ax for ax in range(1, self.system.n_modes + 2) if ax != j + 2)
            cols.append(weights.sum(axis=axes) @ counts)
        return np.stack(cols, axis=1)

    def sigma_z_array(self) -> np.ndarray:
        size = self.system.fock_cutoff + 1
        weights = np.abs(self.states) ** 2
        weights = weights.reshape((len(self.times), 2, size**self.system.n_modes))
        return weights[:, 1, :].sum(axis=1) - weights[:, 0, :].sum(axis=1)

    def energies(self) -> np.ndarray:
        h_psi = self.states @ self.system.hamiltonian.T
        return np.real(np.einsum("ij,ij->i", np.conj(self.states), h_psi))


def evolve(
    sys: QuantumSystem,
    t_final: float,
    dt: float,
    initial_state: np.ndarray | None = None,
    method: str = "expm",
    sample_every: int = 1,
    norm_tol: float = NORM_TOL,
) -> Trajectory:
    """Propagate a state under the system Hamiltonian.

    ``method="expm"`` applies the exact one-step propagator (unitary to
    machine precision, the default for these small spaces); ``method="rk4"``
    is a classical fourth-order integrator whose stability requires
    ``dt * ||H|| << 1``.  Norm drift beyond ``norm_tol`` aborts the run.

    In rotating-wave mode the total excitation number is conserved; this is
    checked on the sampled states.

    Raises:
        NormDriftError: accumulated norm drift exceeded ``norm_tol``.
    """
    if dt <= 0.0 or t_final < 0.0:
        raise ValueError("need dt > 0 and t_final >= 0")
    state = sys.state if initial_state is None else np.asarray(initial_state, dtype=complex)
    if state.shape != (sys.dim,):
        raise ValueError(f"state must have dimension {sys.dim}")
    n_steps = max(1, int(round(t_final / dt))) if t_final > 0 else 0
    times = [0.0]
    samples = [state.copy()]

    if method == "expm":
        propagator = expm(-1j * sys.hamiltonian * dt)

        def step(psi):
            return propagator @ psi

    elif method == "rk4":
        h = sys.hamiltonian

        def step(psi):
            k1 = -1j * (h @ psi)
            k2 = -1j * (h @ (psi + 0.5 * dt * k1))
            k3 = -1j * (h @ (psi + 0.5 * dt * k2))
            k4 = -1j * (h @ (psi + dt * k3))
            return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    else:
        raise ValueError(f"unknown method {method!r}")

    psi = state.copy()
    for n in range(1, n_steps + 1):
        psi = step(psi)
        if n % sample_every == 0 or n == n_steps:
            drift = abs(np.linalg.norm(psi) - 1.0)
            if drift > norm_tol:
                raise NormDriftError(
                    f"norm drift {drift:.3g} beyond {norm_tol:g} at t = {n * dt:.6g}; "
                    "reduce the time step"
                )
            times.append(n * dt)
            samples.append(psi.copy())

    traj = Trajectory(times=np.array(times), states=np.array(samples), system=sys)
    if sys.rwa:
        occ = traj.occupations_array().sum(axis=1) + 0.5 * (traj.sigma_z_array() + 1.0)
        if np.max(np.abs(occ - occ[0])) > 1e-9:
            raise NormDriftError("excitation number drifted in rotating-wave mode")
    return traj


@dataclass(frozen=True)
class TransferReport:
    """Photon-transfer summary scanned from a sampled trajectory."""

    peak_target_occupation: float
    time_of_peak: float
    dark_port_max_occupation: float | None
    target_mode: int
    dark_modes: tuple[int, ...]


def transfer_report(traj: Trajectory) -> TransferReport:
    """Scan a trajectory for transfer into the pair's target mode.

    The target is the second member of the selected pair; dark modes are all
    modes outside the pair (``dark_port_max_occupation`` is None for
    two-mode systems).
    """
    if len(traj.times) == 0:
        raise ValueError("trajectory is empty")
    occ = traj.occupations_array()
    target = traj.system.selected_pair[1]
    dark = tuple(j for j in range(1, traj.system.n_modes + 1) if j not in traj.system.selected_pair)
    peak_idx = int(np.argmax(occ[:, target - 1]))
    dark_max = float(np.max(occ[:, [j - 1 for j in dark]])) if dark else None
    return TransferReport(
        peak_target_occupation=float(occ[peak_idx, target - 1]),
        time_of_peak=float(traj.times[peak_idx]),
        dark_port_max_occupation=dark_max,
        target_mode=target,
        dark_modes=dark,
    )
