"""Effective potential of the multi-port coupler loop.

The loop holds one Josephson junction per attached resonator port.  In the
stiff-inductance limit the loop phase sum is pinned to ``2*pi*(m + f)``; for
three ports that constraint eliminates one phase and the potential reduces to
two coordinates

    ``phi_plus  = (phi_2 + phi_3) / 2``
    ``phi_minus = (phi_2 - phi_3) / 2``

with the port currents entering through a term linear in the phases.  The
coefficients of that linear term are produced two independent ways: a closed
form, and a solve of the loop-segment current balance; the second acts as a
correctness oracle for the first (a per-row additive constant is free gauge
whenever the bias currents sum to zero).
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import BiasCurrents, CouplerConfig

TWO_PI = 2.0 * math.pi


class DerivationMismatch(RuntimeError):
    """Closed-form and current-balance coefficient derivations disagree."""


@dataclass(frozen=True)
class CouplingCoefficients:
    """Bias coupling matrix c[j][i]: coefficient of phase j times current i.

    ``matrix`` is the canonical representative with zero diagonal;
    ``chain_matrix`` is the raw current-balance solution, which differs from
    ``matrix`` by a per-row constant (immaterial on zero-sum bias vectors).
    """

    n_ports: int
    matrix: np.ndarray
    chain_matrix: np.ndarray


def coupling_matrix(n_ports: int) -> np.ndarray:
    """Closed-form bias coefficients, row j / column i (0-based): (j - i) mod n."""
    if n_ports < 2:
        raise ValueError("coupler has at least two ports")
    j = np.arange(n_ports)[:, None]
    i = np.arange(n_ports)[None, :]
    return np.mod(j - i, n_ports).astype(float)


def kcl_segment_response(n_ports: int) -> np.ndarray:
    """Zero-mean loop-segment current per unit port current, solved from the
    current-balance chain ``x_j - x_(j-1) = u_j`` around the loop.

    Column i holds the segment currents for a unit injection at port i; the
    wrap-around equation is omitted (it is implied whenever sum(u) = 0), and
    the mean circulating component is gauged to zero.
    """
    n = n_ports
    a = np.zeros((n, n))
    for j in range(1, n):
        a[j - 1, j - 1] = -1.0
        a[j - 1, j] = 1.0
    a[n - 1, :] = 1.0
    rhs = np.zeros((n, n))
    for i in range(1, n):
        rhs[i - 1, i] = 1.0
    return np.linalg.solve(a, rhs)


def coupling_coefficients(n_ports: int) -> CouplingCoefficients:
    """Derive the bias coupling matrix and cross-check it against the
    current-balance solve.

    Raises:
        DerivationMismatch: if the two derivations differ by more than a
            per-row constant.
    """
    closed = coupling_matrix(n_ports)
    chain = -float(n_ports) * kcl_segment_response(n_ports)
    canonical = chain - np.diag(chain)[:, None]
    if not np.allclose(canonical, closed, atol=1e-9):
        raise DerivationMismatch(
            f"n={n_ports}: closed form and current-balance derivation disagree "
            "beyond per-row gauge"
        )
    return CouplingCoefficients(n_ports=n_ports, matrix=closed, chain_matrix=chain)


def potential_full(phi, cfg: CouplerConfig, bias: BiasCurrents, inductive_weight: float) -> float:
    """Full dimensionless loop potential in all junction phases.

    Sum of (i) the inductive quadratic term with the supplied weight,
    (ii) the junction cosine terms, and (iii) the bias tilt built from the
    coupling coefficients.  Used for validating the reduced form; the reduced
    form imposes the quadratic constraint exactly instead.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (cfg.n_ports,):
        raise ValueError(f"expected {cfg.n_ports} phases, got shape {phi.shape}")
    if len(bias.u) != cfg.n_ports:
        raise ValueError("bias currents and coupler port counts differ")
    e = np.asarray(cfg.junction_ratios)
    u = np.asarray(bias.u)
    defect = cfg.winding + cfg.frustration - phi.sum() / TWO_PI
    quad = inductive_weight * defect**2
    junctions = float(e @ (1.0 - np.cos(phi)))
    tilt = -(cfg.weak_ratio / cfg.n_ports) * float(phi @ coupling_matrix(cfg.n_ports) @ u)
    return quad + junctions + tilt


def _require_reduced(cfg: CouplerConfig) -> None:
    if cfg.n_ports != 3:
        raise ValueError("reduced coordinates are defined for three ports")
    if cfg.weak_index not in (None, 1):
        raise ValueError(
            "reduced form expects the reduced junction at port 1; relabel ports first"
        )


def potential_reduced(phi_plus, phi_minus, cfg: CouplerConfig, bias: BiasCurrents):
    """Three-port potential on the flux-quantization constraint surface.

    Dimensionless, in the zero-winding gauge:

        -e1*cos(2*pi*f - 2*phi_plus) - 2*cos(phi_plus)*cos(phi_minus)
        - (e1/3)*[(3*phi_plus - 2*pi*f)*(u1 - u2) + phi_minus*(2*u3 - u1 - u2)]

    Broadcasts over array-valued phases.  For winding numbers other than zero
    the value shifts by a phase-independent constant only.
    """
    _require_reduced(cfg)
    e1 = cfg.weak_ratio
    u1, u2, u3 = bias.u
    tpf = TWO_PI * cfg.frustration
    pp = np.asarray(phi_plus, dtype=float)
    pm = np.asarray(phi_minus, dtype=float)
    well = -e1 * np.cos(tpf - 2.0 * pp) - 2.0 * np.cos(pp) * np.cos(pm)
    tilt = -(e1 / 3.0) * ((3.0 * pp - tpf) * (u1 - u2) + pm * (2.0 * u3 - u1 - u2))
    out = well + tilt
    return out.item() if np.ndim(out) == 0 else out


def gradient_reduced(phi_plus: float, phi_minus: float, cfg: CouplerConfig, bias: BiasCurrents) -> np.ndarray:
    """Exact gradient of :func:`potential_reduced` (closed form)."""
    _require_reduced(cfg)
    e1 = cfg.weak_ratio
    u1, u2, u3 = bias.u
    tpf = TWO_PI * cfg.frustration
    g_plus = (
        -2.0 * e1 * math.sin(tpf - 2.0 * phi_plus)
        + 2.0 * math.sin(phi_plus) * math.cos(phi_minus)
        - e1 * (u1 - u2)
    )
    g_minus = 2.0 * math.cos(phi_plus) * math.sin(phi_minus) - (e1 / 3.0) * (2.0 * u3 - u1 - u2)
    return np.array([g_plus, g_minus])


def hessian_reduced(phi_plus: float, phi_minus: float, cfg: CouplerConfig, bias: BiasCurrents) -> np.ndarray:
    """Exact Hessian of :func:`potential_reduced`; independent of the bias,
    which enters the potential linearly."""
    _require_reduced(cfg)
    del bias  # linear in the potential, absent from second derivatives
    e1 = cfg.weak_ratio
    tpf = TWO_PI * cfg.frustration
    h_pp = 4.0 * e1 * math.cos(tpf - 2.0 * phi_plus) + 2.0 * math.cos(phi_plus) * math.cos(phi_minus)
    h_pm = -2.0 * math.sin(phi_plus) * math.sin(phi_minus)
    h_mm = 2.0 * math.cos(phi_plus) * math.cos(phi_minus)
    return np.array([[h_pp, h_pm], [h_pm, h_mm]])


def tilt_offset(cfg: CouplerConfig, bias: BiasCurrents) -> float:
    """Phase-independent part of the bias tilt in :func:`potential_reduced`.

    Subtracting this from a located minimum value makes the minimum satisfy
    the envelope identity ``d(u_min)/d(u2) = e1 * (phi_plus + phi_minus)``
    along output-current sweeps with ``u3 = -u1 - u2``, which is the
    tilt-referenced quantity tabulated by the sweep driver.
    """
    _require_reduced(cfg)
    u1, u2, _ = bias.u
    return (cfg.weak_ratio / 3.0) * TWO_PI * cfg.frustration * (u1 - u2)


def reduced_to_full(phi_plus: float, phi_minus: float, cfg: CouplerConfig) -> np.ndarray:
    """Map constraint-surface coordinates back to the three junction phases."""
    _require_reduced(cfg)
    phi_1 = TWO_PI * (cfg.winding + cfg.frustration) - 2.0 * phi_plus
    return np.array([phi_1, phi_plus + phi_minus, phi_plus - phi_minus])


def bias_current_support(n_ports: int, weak_index: int) -> frozenset[int]:
    """Ports whose currents survive in the minimum-locked bias term.

    At a potential minimum all full-strength junction phases equalize, which
    collapses the bias term onto one collective phase with per-port
    coefficients ``n - 1 - 2*((n - i + k) mod n)``.  Those coefficients are
    pairwise distinct, so after eliminating one current through the zero-sum
    constraint at least ``n - 1`` ports remain; only ``n == 3`` leaves a
    two-port (pair-selective) coupling.
    """
    if n_ports < 3:
        raise ValueError("support analysis applies to three or more ports")
    if not 1 <= weak_index <= n_ports:
        raise ValueError("weak junction index out of range")
    n, k = n_ports, weak_index
    gamma = {i: n - 1 - 2 * ((n - i + k) % n) for i in range(1, n + 1)}
    zero_ports = [i for i, g in gamma.items() if g == 0]
    if zero_ports:
        return frozenset(i for i, g in gamma.items() if g != 0)
    # no naturally dark port: eliminate the smallest-coefficient current
    drop = min(gamma, key=lambda i: (abs(gamma[i]), i))
    return frozenset(i for i, g in gamma.items() if i != drop and g != gamma[drop])
