"""Physical parameters, unit normalization, and shared configuration objects.

Everything downstream of :func:`normalize` is dimensionless: energies are
measured in units of the common dc-SQUID Josephson energy, bias currents in
units of the coupler-loop critical current (set by the reduced junction),
magnetic flux in units of the flux quantum, and phases in radians.

All types are immutable after validation and safe to share across workers.
"""

import json
import math
from dataclasses import asdict, dataclass

from scipy import constants

FLUX_QUANTUM = constants.h / (2.0 * constants.e)
HBAR = constants.hbar

# below this ratio of kinetic to geometric loop inductance, the kinetic part
# is dropped from the inductive energy scale
KINETIC_DROP_RATIO = 0.05

CURRENT_SUM_TOL = 1e-12

# junction ratios within this distance of 1 count as full-strength junctions
_WEAK_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid physical or dimensionless configuration."""


@dataclass(frozen=True)
class PhysicalParams:
    """Device parameters in SI units.

    Attributes:
        base_junction_energy: Josephson energy of the junctions forming each
            dc-SQUID, joules.
        squid_fluxes: external flux threading each dc-SQUID loop, webers; one
            entry per junction, so the length fixes the number of ports.
        loop_flux: external flux threading the coupler loop, webers
            (restricted to [0, Phi_0) so the frustration is single-valued).
        loop_self_inductance: geometric self-inductance of the loop, henries.
        kinetic_inductance: kinetic inductance of the loop, henries.
        junction_capacitances: shunt capacitance per junction, farads.
        resonator_frequency: angular frequency of the addressed resonator
            mode, rad/s.
        resonator_inductance_density: inductance per unit length of the
            transmission line, H/m.
        resonator_length: bare resonator length, meters.
        interface_length: length of the coupling interface segment, meters.
        qubit_splitting: two-level splitting of the coupler qubit (twice the
            inter-well tunneling amplitude), rad/s.
        fock_cutoff: photon-number cutoff per resonator mode.
    """

    base_junction_energy: float
    squid_fluxes: tuple[float, ...]
    loop_flux: float
    loop_self_inductance: float
    kinetic_inductance: float
    junction_capacitances: tuple[float, ...]
    resonator_frequency: float
    resonator_inductance_density: float
    resonator_length: float
    interface_length: float
    qubit_splitting: float
    fock_cutoff: int

    def __post_init__(self):
        object.__setattr__(self, "squid_fluxes", tuple(float(v) for v in self.squid_fluxes))
        object.__setattr__(
            self, "junction_capacitances", tuple(float(v) for v in self.junction_capacitances)
        )
        if self.base_junction_energy <= 0.0:
            raise ConfigError("base junction energy must be positive")
        if len(self.squid_fluxes) < 2:
            raise ConfigError("need at least two junctions / ports")
        if len(self.junction_capacitances) != len(self.squid_fluxes):
            raise ConfigError("one shunt capacitance per junction required")
        positives = {
            "loop_self_inductance": self.loop_self_inductance,
            "kinetic_inductance": self.kinetic_inductance,
            "resonator_frequency": self.resonator_frequency,
            "resonator_inductance_density": self.resonator_inductance_density,
            "resonator_length": self.resonator_length,
            "interface_length": self.interface_length,
            "qubit_splitting": self.qubit_splitting,
        }
        for name, value in positives.items():
            if value <= 0.0:
                raise ConfigError(f"{name} must be strictly positive")
        for c in self.junction_capacitances:
            if c <= 0.0:
                raise ConfigError("junction capacitances must be strictly positive")
        if not 0.0 <= self.loop_flux < FLUX_QUANTUM:
            raise ConfigError("loop flux must lie in [0, Phi_0)")
        if self.interface_length >= self.resonator_length:
            raise ConfigError("interface segment must be shorter than the resonator")
        if self.fock_cutoff < 1:
            raise ConfigError("fock cutoff must be at least 1")

    @property
    def n_ports(self) -> int:
        return len(self.squid_fluxes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CouplerConfig:
    """Dimensionless coupler loop: junction strengths, frustration, winding.

    ``weak_index`` is the 1-based port of the single reduced junction, or
    ``None`` when all junctions have equal strength.
    """

    n_ports: int
    junction_ratios: tuple[float, ...]
    frustration: float
    weak_index: int | None
    winding: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "junction_ratios", tuple(float(v) for v in self.junction_ratios)
        )
        if self.n_ports < 2:
            raise ConfigError("a coupler joins at least two ports")
        if len(self.junction_ratios) != self.n_ports:
            raise ConfigError("one junction ratio per port required")
        weak = [i + 1 for i, e in enumerate(self.junction_ratios) if e < 1.0 - _WEAK_TOL]
        for e in self.junction_ratios:
            if not 0.0 < e <= 1.0 + _WEAK_TOL:
                raise ConfigError(f"junction ratio {e} outside (0, 1]")
        if len(weak) > 1:
            raise ConfigError("at most one junction may be reduced")
        expected = weak[0] if weak else None
        if self.weak_index != expected:
            raise ConfigError(
                f"weak_index {self.weak_index} inconsistent with ratios (expected {expected})"
            )
        if not 0.0 <= self.frustration < 1.0:
            raise ConfigError("frustration must lie in [0, 1)")

    @property
    def weak_ratio(self) -> float:
        """Energy ratio of the reduced junction (1.0 when none is reduced)."""
        if self.weak_index is None:
            return 1.0
        return self.junction_ratios[self.weak_index - 1]


@dataclass(frozen=True)
class BiasCurrents:
    """Port bias currents in units of the loop critical current.

    Current conservation (input equals the summed outputs) requires the
    entries to sum to zero; the constructor enforces this.
    """

    u: tuple[float, ...]
    normalization_current: float | None = None  # amperes, bookkeeping only

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(v) for v in self.u))
        if abs(math.fsum(self.u)) > CURRENT_SUM_TOL:
            raise ConfigError(f"bias currents must sum to zero, got {math.fsum(self.u):g}")

    @classmethod
    def zero(cls, n_ports: int) -> "BiasCurrents":
        return cls((0.0,) * n_ports)

    @classmethod
    def pair_drive(cls, n_ports: int, source: int, sink: int, amplitude: float) -> "BiasCurrents":
        """Drive ``amplitude`` into 1-based port ``source`` and out of ``sink``."""
        if source == sink or not (1 <= source <= n_ports and 1 <= sink <= n_ports):
            raise ConfigError("source/sink ports must be distinct and in range")
        u = [0.0] * n_ports
        u[source - 1] = amplitude
        u[sink - 1] = -amplitude
        return cls(tuple(u))


@dataclass(frozen=True)
class DimensionlessScales:
    """Conversion factors and carried SI parameters for re-dimensionalizing."""

    energy: float  # joules per dimensionless energy unit
    current: float  # amperes per dimensionless current unit
    flux: float  # webers per dimensionless flux unit
    inductive_weight: float  # loop inductive energy over the energy unit
    kinetic_inductance_neglected: bool
    loop_self_inductance: float
    kinetic_inductance: float
    junction_capacitances: tuple[float, ...]
    resonator_frequency: float
    resonator_inductance_density: float
    resonator_length: float
    interface_length: float
    qubit_splitting: float
    fock_cutoff: int


def effective_junction_energy(junction_energy: float, squid_flux: float) -> float:
    """Flux-tuned Josephson energy of a dc-SQUID treated as one junction.

    Returns ``junction_energy * cos(pi * squid_flux / Phi_0)``; the result may
    be zero or negative near half a flux quantum, and the caller decides
    whether that is admissible.
    """
    return junction_energy * math.cos(math.pi * squid_flux / FLUX_QUANTUM)


def normalize(params: PhysicalParams) -> tuple[CouplerConfig, DimensionlessScales]:
    """Reduce SI parameters to the dimensionless coupler configuration.

    Energies are divided by the base junction energy, currents by the loop
    critical current ``2*pi*E_weak/Phi_0`` (with ``E_weak`` the reduced
    junction's effective energy), and fluxes by the flux quantum.  The kinetic
    inductance is dropped from the inductive weight when it is below
    ``KINETIC_DROP_RATIO`` of the geometric self-inductance; the scales record
    whether that happened.

    Raises:
        ConfigError: if any effective junction energy is non-positive or more
            than one junction is reduced.
    """
    ratios = tuple(effective_junction_energy(1.0, f_s) for f_s in params.squid_fluxes)
    for i, e in enumerate(ratios):
        if e <= 0.0:
            raise ConfigError(f"squid flux on junction {i + 1} suppresses it entirely (ratio {e:g})")
    weak = [i + 1 for i, e in enumerate(ratios) if e < 1.0 - _WEAK_TOL]
    if len(weak) > 1:
        raise ConfigError("more than one junction is reduced; exactly one may be")
    weak_index = weak[0] if weak else None
    weak_energy = params.base_junction_energy * (ratios[weak_index - 1] if weak_index else 1.0)
    current_scale = 2.0 * math.pi * weak_energy / FLUX_QUANTUM

    ratio_k = params.kinetic_inductance / params.loop_self_inductance
    neglected = ratio_k < KINETIC_DROP_RATIO
    loop_inductance = params.loop_self_inductance + (0.0 if neglected else params.kinetic_inductance)
    inductive_weight = FLUX_QUANTUM**2 / (2.0 * loop_inductance * params.base_junction_energy)

    cfg = CouplerConfig(
        n_ports=params.n_ports,
        junction_ratios=ratios,
        frustration=params.loop_flux / FLUX_QUANTUM,
        weak_index=weak_index,
    )
    scales = DimensionlessScales(
        energy=params.base_junction_energy,
        current=current_scale,
        flux=FLUX_QUANTUM,
        inductive_weight=inductive_weight,
        kinetic_inductance_neglected=neglected,
        loop_self_inductance=params.loop_self_inductance,
        kinetic_inductance=params.kinetic_inductance,
        junction_capacitances=params.junction_capacitances,
        resonator_frequency=params.resonator_frequency,
        resonator_inductance_density=params.resonator_inductance_density,
        resonator_length=params.resonator_length,
        interface_length=params.interface_length,
        qubit_splitting=params.qubit_splitting,
        fock_cutoff=params.fock_cutoff,
    )
    return cfg, scales


def redimensionalize(cfg: CouplerConfig, scales: DimensionlessScales) -> PhysicalParams:
    """Inverse of :func:`normalize` (identity up to floating-point roundoff)."""
    squid_fluxes = tuple(
        (FLUX_QUANTUM / math.pi) * math.acos(min(e, 1.0)) for e in cfg.junction_ratios
    )
    return PhysicalParams(
        base_junction_energy=scales.energy,
        squid_fluxes=squid_fluxes,
        loop_flux=cfg.frustration * scales.flux,
        loop_self_inductance=scales.loop_self_inductance,
        kinetic_inductance=scales.kinetic_inductance,
        junction_capacitances=scales.junction_capacitances,
        resonator_frequency=scales.resonator_frequency,
        resonator_inductance_density=scales.resonator_inductance_density,
        resonator_length=scales.resonator_length,
        interface_length=scales.interface_length,
        qubit_splitting=scales.qubit_splitting,
        fock_cutoff=scales.fock_cutoff,
    )


def default_physical_params() -> PhysicalParams:
    """Reference device: 500 nA loop critical current, junction 1 reduced to
    0.8 of the others, half-flux frustration, 25 mm resonators read out at a
    2 um interface with a 20 nA rms mode current."""
    critical_current = 500e-9
    weak_ratio = 0.8
    base_energy = FLUX_QUANTUM * critical_current / (2.0 * math.pi) / weak_ratio
    omega_r = 2.0 * math.pi * 6.0e9
    effective_length = 0.025
    interface = 2.0e-6
    rms_current = 20e-9
    # inductance density that reproduces the target rms mode current
    inductance_density = HBAR * omega_r / (effective_length * (math.sqrt(2.0) * rms_current) ** 2)
    return PhysicalParams(
        base_junction_energy=base_energy,
        squid_fluxes=((FLUX_QUANTUM / math.pi) * math.acos(weak_ratio), 0.0, 0.0),
        loop_flux=0.5 * FLUX_QUANTUM,
        loop_self_inductance=1.0e-11,
        kinetic_inductance=1.0e-13,
        junction_capacitances=(3.0e-15, 3.0e-15, 3.0e-15),
        resonator_frequency=omega_r,
        resonator_inductance_density=inductance_density,
        resonator_length=effective_length - interface,
        interface_length=interface,
        qubit_splitting=omega_r,
        fock_cutoff=3,
    )


def physical_params_from_dict(data: dict) -> PhysicalParams:
    fields = set(PhysicalParams.__dataclass_fields__)
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    missing = fields - set(data)
    if missing:
        raise ConfigError(f"missing configuration keys: {sorted(missing)}")
    kwargs = dict(data)
    kwargs["squid_fluxes"] = tuple(kwargs["squid_fluxes"])
    kwargs["junction_capacitances"] = tuple(kwargs["junction_capacitances"])
    return PhysicalParams(**kwargs)


def load_physical_params(path) -> PhysicalParams:
    """Read a JSON configuration file (keys mirror PhysicalParams, SI units)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return physical_params_from_dict(data)
