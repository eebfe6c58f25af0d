"""Locate and track local minima of the reduced coupler potential.

Damped Newton iterations with a backtracking line search, Hessian-based
classification of the stationary point, and a warm-started continuation sweep
over the output-current ratio.  Continuation makes each sweep inherently
sequential (every grid point starts from its neighbor's solution); run
independent sweeps concurrently instead of splitting one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import BiasCurrents, ConfigError, CouplerConfig
from .potential import (
    gradient_reduced,
    hessian_reduced,
    potential_reduced,
    reduced_to_full,
    tilt_offset,
)

GRAD_TOL = 1e-9
MAX_ITERATIONS = 200

# a located well closer than this to the origin counts as collapsed
_COLLAPSE_TOL = 1e-2


class NonConvergence(RuntimeError):
    """Newton iteration failed to reach a stationary point."""


class SaddlePoint(RuntimeError):
    """Converged stationary point is not a local minimum."""


class NoDoubleWell(RuntimeError):
    """The double-well structure is absent for this configuration."""


@dataclass(frozen=True)
class MinimumRecord:
    """A located local minimum of the reduced potential.

    ``loop_currents`` are the junction currents at the minimum in units of
    the loop critical current (set by the reduced junction), ordered by
    junction; their consecutive differences reproduce the injected port
    currents, which is the basis of the circulation check.
    """

    phi_plus: float
    phi_minus: float
    value: float
    hessian_eigenvalues: tuple[float, float]
    well_label: str
    loop_currents: tuple[float, float, float]
    gradient_norm: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.phi_plus, self.phi_minus)


@dataclass(frozen=True)
class SweepTable:
    """Minimum-tracking sweep over the output-current ratio u2/u1.

    ``u_min`` is tilt-referenced: the phase-independent part of the bias term
    is subtracted from each minimum value so that the tabulated quantity obeys
    the envelope identity ``d(u_min)/d(u2) = e1*(phi_plus + phi_minus)``
    (see :func:`sweep_slopes`).
    """

    input_current: float
    ratios: np.ndarray
    u_min: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    u3: np.ndarray

    def __len__(self) -> int:
        return len(self.ratios)

    def to_csv(self, path) -> None:
        lines = ["u2_over_u1,u_min,phi_plus_min,phi_minus_min,u3"]
        for i in range(len(self)):
            lines.append(
                ",".join(
                    f"{v:.17g}"
                    for v in (
                        self.ratios[i],
                        self.u_min[i],
                        self.phi_plus[i],
                        self.phi_minus[i],
                        self.u3[i],
                    )
                )
            )
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def _classify(x: np.ndarray, cfg: CouplerConfig, bias: BiasCurrents, start) -> MinimumRecord:
    grad = gradient_reduced(x[0], x[1], cfg, bias)
    hess = hessian_reduced(x[0], x[1], cfg, bias)
    evals = np.linalg.eigvalsh(hess)
    if evals[0] <= 1e-12:
        raise SaddlePoint(
            f"stationary point at ({x[0]:.6g}, {x[1]:.6g}) is not a minimum "
            f"(Hessian eigenvalues {evals[0]:.3g}, {evals[1]:.3g})"
        )
    if x[0] > 1e-12:
        label = "right"
    elif x[0] < -1e-12:
        label = "left"
    else:
        label = "right" if start[0] >= 0.0 else "left"
    phases = reduced_to_full(x[0], x[1], cfg)
    e = np.asarray(cfg.junction_ratios)
    currents = tuple(-(e[i] / cfg.weak_ratio) * math.sin(phases[i]) for i in range(3))
    return MinimumRecord(
        phi_plus=float(x[0]),
        phi_minus=float(x[1]),
        value=potential_reduced(x[0], x[1], cfg, bias),
        hessian_eigenvalues=(float(evals[0]), float(evals[1])),
        well_label=label,
        loop_currents=currents,
        gradient_norm=float(np.linalg.norm(grad)),
    )


def find_local_minimum(
    start,
    cfg: CouplerConfig,
    bias: BiasCurrents,
    grad_tol: float = GRAD_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> MinimumRecord:
    """Newton descent from ``start`` to a local minimum of the reduced potential.

    Args:
        start: initial ``(phi_plus, phi_minus)``, expected inside one
            2*pi x 2*pi fundamental cell.

    Raises:
        NonConvergence: gradient norm still above ``grad_tol`` after
            ``max_iterations`` Newton steps.
        SaddlePoint: converged to a stationary point with a non-positive
            Hessian direction.
    """
    x = np.array(start, dtype=float)
    if x.shape != (2,):
        raise ValueError("start must be a (phi_plus, phi_minus) pair")
    for _ in range(max_iterations):
        grad = gradient_reduced(x[0], x[1], cfg, bias)
        if np.linalg.norm(grad) < grad_tol:
            return _classify(x, cfg, bias, start)
        hess = hessian_reduced(x[0], x[1], cfg, bias)
        low = np.linalg.eigvalsh(hess)[0]
        if low < 1e-8:
            hess = hess + (1e-8 - low) * np.eye(2)
        step = np.linalg.solve(hess, -grad)
        slope = float(grad @ step)
        if slope >= 0.0 or not np.all(np.isfinite(step)):
            step = -grad
            slope = -float(grad @ grad)
        if np.linalg.norm(step) < 1e-6:
            # inside the quadratic basin the sufficient-decrease test drops
            # below float resolution; take the raw Newton step
            x = x + step
            continue
        f0 = potential_reduced(x[0], x[1], cfg, bias)
        scale = 1.0
        for _ in range(60):
            trial = x + scale * step
            if potential_reduced(trial[0], trial[1], cfg, bias) <= f0 + 1e-4 * scale * slope:
                break
            scale *= 0.5
        else:
            raise NonConvergence(f"line search stalled at ({x[0]:.6g}, {x[1]:.6g})")
        x = trial
    raise NonConvergence(
        f"no stationary point within {max_iterations} iterations from {tuple(start)}"
    )


def well_start(cfg: CouplerConfig) -> tuple[float, float]:
    """Starting guess inside the positive-phase well at zero bias.

    Uses the half-flux stationary condition cos(phi) = 1/(2*e1); continuation
    from here tolerates moderate frustration offsets.
    """
    c = 1.0 / (2.0 * cfg.weak_ratio)
    if c >= 1.0:
        raise NoDoubleWell(
            f"reduced junction ratio {cfg.weak_ratio:g} <= 1/2: wells have merged"
        )
    return (math.acos(c), 0.0)


def sweep_output_current(
    cfg: CouplerConfig,
    input_current: float,
    points: int,
    ratio_range: tuple[float, float] = (-1.0, 0.0),
) -> SweepTable:
    """Track one well while sweeping the output ratio u2/u1 over ``ratio_range``.

    Each grid point warm-starts from the previous solution (continuation), so
    the tracked branch never hops wells.  ``u3 = -u1 - u2`` at every point.

    Raises:
        NonConvergence: with the offending grid point, if tracking fails.
    """
    if points < 1:
        raise ValueError("need at least one sweep point")
    ratios = np.linspace(ratio_range[0], ratio_range[1], points)
    u_min = np.empty(points)
    phi_plus = np.empty(points)
    phi_minus = np.empty(points)
    u3 = np.empty(points)
    position = well_start(cfg)
    for i, r in enumerate(ratios):
        u2 = r * input_current
        bias = BiasCurrents((input_current, u2, -input_current - u2))
        try:
            record = find_local_minimum(position, cfg, bias)
        except (NonConvergence, SaddlePoint) as exc:
            raise NonConvergence(f"sweep failed at u2/u1 = {r:.8g}: {exc}") from exc
        position = record.position
        u_min[i] = record.value - tilt_offset(cfg, bias)
        phi_plus[i] = record.phi_plus
        phi_minus[i] = record.phi_minus
        u3[i] = bias.u[2]
    return SweepTable(
        input_current=float(input_current),
        ratios=ratios,
        u_min=u_min,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        u3=u3,
    )


def sweep_slopes(table: SweepTable) -> np.ndarray:
    """Central-difference d(u_min)/d(u2) at the interior grid points.

    The tabulated minimum is tilt-referenced, so at a tracked minimum the
    slope equals ``e1 * (phi_plus_min + phi_minus_min)`` with ``e1`` the
    reduced junction ratio (bias currents are measured in units of the
    reduced junction's critical current).  Degenerate sweeps with a constant
    table report zero slope.
    """
    if len(table) < 3:
        raise ValueError("slope needs at least three sweep rows")
    u2 = table.ratios * table.input_current
    du = u2[2:] - u2[:-2]
    df = table.u_min[2:] - table.u_min[:-2]
    slopes = np.zeros(len(table) - 2)
    moving = np.abs(du) > 0.0
    slopes[moving] = df[moving] / du[moving]
    return slopes


def zero_bias_well_phase(cfg: CouplerConfig) -> float:
    """Magnitude of the symmetric phase at the zero-bias minimum.

    This displacement sets the qubit-resonator coupling strength.  Contract
    (at half-flux frustration): equals arccos(1/(2*e1)) for a reduced
    junction, at most pi/3 with equality for equal junctions.

    Raises:
        NoDoubleWell: the off-origin well is absent (ratio <= 1/2).
    """
    if abs(cfg.frustration - 0.5) > 1e-9:
        raise ConfigError("well phase is defined at half-flux frustration")
    bias = BiasCurrents.zero(3)
    try:
        record = find_local_minimum((1.0, 0.0), cfg, bias)
    except SaddlePoint as exc:
        raise NoDoubleWell(f"no off-origin minimum: {exc}") from exc
    phase = abs(record.phi_plus)
    if phase < _COLLAPSE_TOL:
        raise NoDoubleWell(
            f"wells collapsed onto the origin for junction ratio {cfg.weak_ratio:g}"
        )
    return phase
