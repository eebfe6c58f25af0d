"""Kagome ribbon of qubit sites joined by three-port couplers.

Qubit sites sit on the edges of a honeycomb arrangement whose vertices carry
the couplers, so the qubit sites form a Kagome lattice: corner-sharing
triangles, interior coordination number 4.

Geometry convention (also documented in the README):

* ``rows x cols`` triangular cells; cell ``(r, c)`` owns qubit sites
  ``3*(r*cols + c) + t`` with ``t = 0`` (left corner), ``1`` (right corner),
  ``2`` (top corner).
* one *cell* coupler per cell, id ``r*cols + c``, ports ``(1, 2, 3)``
  attached to its (left, right, top) sites;
* one *bridge* coupler between consecutive rows, id
  ``rows*cols + r*cols + c`` for ``r < rows - 1``, ports ``(1, 2, 3)``
  attached to (top of ``(r, c)``, right of ``(r+1, (c-1) mod cols)``,
  left of ``(r+1, c)``).
* the column direction wraps around (a ribbon closed along the columns and
  open at the top and bottom rows), which keeps every patch connected while
  every coupler keeps exactly three ports; top- and bottom-row boundary
  sites touch a single coupler and have degree 2.

Lattices are immutable; state transitions return updated copies, so
read-only queries (adjacency, planning) are safe on shared snapshots while
transitions should be serialized through one owner.
"""

from collections import deque
from dataclasses import dataclass, replace

from .circulator import select_pair

_K_BY_PORTS = {frozenset({1, 2}): 1, frozenset({2, 3}): 2, frozenset({1, 3}): 3}


class IllegalTransition(ValueError):
    """Coupler state change outside OFF->ON or ON->OFF."""


class Unreachable(ValueError):
    """No path between the requested qubit sites."""


@dataclass(frozen=True)
class CouplerState:
    """Switch state of one coupler: OFF, or ON with a selected pair."""

    engaged: bool
    squid_index: int | None = None
    pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.engaged:
            if self.squid_index is None or self.pair is None:
                raise ValueError("engaged coupler needs a squid index and pair")
            if set(self.pair) != set(select_pair(self.squid_index)):
                raise ValueError(
                    f"pair {self.pair} inconsistent with squid index {self.squid_index}"
                )
        elif self.squid_index is not None or self.pair is not None:
            raise ValueError("idle coupler carries no pair")

    @classmethod
    def off(cls) -> "CouplerState":
        return cls(engaged=False)

    @classmethod
    def on(cls, squid_index: int, chirality: int = 1) -> "CouplerState":
        return cls(engaged=True, squid_index=squid_index, pair=select_pair(squid_index, chirality))


@dataclass(frozen=True)
class Lattice:
    rows: int
    cols: int
    coupler_ports: dict  # coupler id -> (site, site, site), ports 1..3
    site_couplers: dict  # site id -> tuple of coupler ids
    coupler_states: dict  # coupler id -> CouplerState

    @property
    def n_sites(self) -> int:
        return 3 * self.rows * self.cols

    @property
    def n_couplers(self) -> int:
        return len(self.coupler_ports)


def _site(rows: int, cols: int, r: int, c: int, corner: int) -> int:
    return 3 * (r * cols + c) + corner


def build_kagome(rows: int, cols: int) -> Lattice:
    """Open-row, wrapped-column Kagome patch with 3 qubit sites per cell.

    Single-row patches with more than one column have no bridge couplers and
    fall apart into separate triangles (degenerate; routes across cells are
    then unreachable).
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be at least 1")
    ports: dict[int, tuple[int, int, int]] = {}
    for r in range(rows):
        for c in range(cols):
            ports[r * cols + c] = (
                _site(rows, cols, r, c, 0),
                _site(rows, cols, r, c, 1),
                _site(rows, cols, r, c, 2),
            )
    base = rows * cols
    for r in range(rows - 1):
        for c in range(cols):
            ports[base + r * cols + c] = (
                _site(rows, cols, r, c, 2),
                _site(rows, cols, r + 1, (c - 1) % cols, 1),
                _site(rows, cols, r + 1, c, 0),
            )
    site_couplers: dict[int, list[int]] = {s: [] for s in range(3 * rows * cols)}
    for cid in sorted(ports):
        for s in ports[cid]:
            site_couplers[s].append(cid)
    return Lattice(
        rows=rows,
        cols=cols,
        coupler_ports=ports,
        site_couplers={s: tuple(cs) for s, cs in site_couplers.items()},
        coupler_states={cid: CouplerState.off() for cid in ports},
    )


def qubit_adjacency(lat: Lattice) -> dict[int, tuple[int, ...]]:
    """Simple undirected adjacency: two sites are neighbors iff they share a
    coupler.  Neighbor tuples are sorted for deterministic traversal."""
    neighbors: dict[int, set[int]] = {s: set() for s in range(lat.n_sites)}
    for sites in lat.coupler_ports.values():
        for a in sites:
            for b in sites:
                if a != b:
                    neighbors[a].add(b)
    return {s: tuple(sorted(ns)) for s, ns in neighbors.items()}


def set_coupler_state(lat: Lattice, coupler: int, new: CouplerState) -> Lattice:
    """Return the lattice with one coupler switched.

    Only OFF->ON and ON->OFF are legal; re-targeting an engaged coupler
    requires an explicit disengage first.
    """
    current = lat.coupler_states.get(coupler)
    if current is None:
        raise ValueError(f"unknown coupler {coupler}")
    if current.engaged == new.engaged:
        raise IllegalTransition(
            f"coupler {coupler}: only OFF->ON or ON->OFF transitions are allowed"
        )
    states = dict(lat.coupler_states)
    states[coupler] = new
    return replace(lat, coupler_states=states)


@dataclass(frozen=True)
class GateStep:
    index: int
    coupler: int
    squid_index: int
    qubits: tuple[int, int]
    action: str  # engage | gate | disengage


@dataclass(frozen=True)
class GateSchedule:
    steps: tuple[GateStep, ...]

    def gate_count(self) -> int:
        return sum(1 for s in self.steps if s.action == "gate")

    def to_json_list(self) -> list[dict]:
        return [
            {
                "step": s.index,
                "coupler": s.coupler,
                "k": s.squid_index,
                "qubits": list(s.qubits),
                "action": s.action,
            }
            for s in self.steps
        ]


def _squid_for_hop(lat: Lattice, coupler: int, a: int, b: int) -> int:
    ports = lat.coupler_ports[coupler]
    pa = ports.index(a) + 1
    pb = ports.index(b) + 1
    return _K_BY_PORTS[frozenset({pa, pb})]


def plan_route(lat: Lattice, source: int, target: int) -> GateSchedule:
    """Shortest gate chain between two qubit sites.

    Breadth-first search on the qubit adjacency; each hop becomes an
    engage/gate/disengage triple on the shared coupler, with the squid index
    chosen so the engaged pair matches the hop's two ports.  Deterministic:
    neighbors and shared couplers are visited in sorted order.

    Raises:
        Unreachable: the sites lie in different components (degenerate
            patches only).
    """
    if source == target:
        raise ValueError("source and target must differ")
    for q in (source, target):
        if not 0 <= q < lat.n_sites:
            raise ValueError(f"qubit site {q} outside the lattice")
    adj = qubit_adjacency(lat)
    parent: dict[int, int | None] = {source: None}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        if cur == target:
            break
        for nb in adj[cur]:
            if nb not in parent:
                parent[nb] = cur
                queue.append(nb)
    if target not in parent:
        raise Unreachable(f"no path from site {source} to site {target}")
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()

    steps: list[GateStep] = []
    for a, b in zip(path, path[1:]):
        shared = sorted(set(lat.site_couplers[a]) & set(lat.site_couplers[b]))
        coupler = shared[0]
        k = _squid_for_hop(lat, coupler, a, b)
        for action in ("engage", "gate", "disengage"):
            steps.append(
                GateStep(
                    index=len(steps),
                    coupler=coupler,
                    squid_index=k,
                    qubits=(a, b),
                    action=action,
                )
            )
    return GateSchedule(steps=tuple(steps))


def validate_schedule(lat: Lattice, schedule: GateSchedule) -> list[str]:
    """Replay a schedule through the coupler state machine.

    Returns a list of violations (empty means the schedule is sound):
    double-booked couplers, gates on non-engaged couplers or mismatched
    pairs, engages whose qubits do not match the squid-index pairing, and
    couplers left engaged at the end.
    """
    violations: list[str] = []
    engaged: dict[int, tuple[int, frozenset[int]]] = {}
    for step in schedule.steps:
        ports = lat.coupler_ports.get(step.coupler)
        if ports is None:
            violations.append(f"step {step.index}: unknown coupler {step.coupler}")
            continue
        qubits = frozenset(step.qubits)
        if step.action == "engage":
            if step.coupler in engaged:
                violations.append(f"step {step.index}: coupler {step.coupler} double-booked")
                continue
            if not qubits <= set(ports):
                violations.append(
                    f"step {step.index}: qubits {sorted(qubits)} not attached to coupler {step.coupler}"
                )
            else:
                expected = frozenset(ports[p - 1] for p in select_pair(step.squid_index))
                if qubits != expected:
                    violations.append(
                        f"step {step.index}: pair/k mismatch on coupler {step.coupler} "
                        f"(k={step.squid_index} selects {sorted(expected)})"
                    )
            engaged[step.coupler] = (step.squid_index, qubits)
        elif step.action == "gate":
            if step.coupler not in engaged:
                violations.append(
                    f"step {step.index}: gate on non-engaged coupler {step.coupler}"
                )
            elif engaged[step.coupler][1] != qubits:
                violations.append(
                    f"step {step.index}: gate pair {sorted(qubits)} differs from engaged pair"
                )
        elif step.action == "disengage":
            if step.coupler not in engaged:
                violations.append(
                    f"step {step.index}: disengage on idle coupler {step.coupler}"
                )
            else:
                del engaged[step.coupler]
        else:
            violations.append(f"step {step.index}: unknown action {step.action!r}")
    for coupler in sorted(engaged):
        violations.append(f"coupler {coupler} missing disengage at end of schedule")
    return violations


def hop_transfer_demo(
    step: GateStep,
    fock_cutoff: int = 3,
    coupling: float = 0.005,
    t_final: float | None = None,
    dt: float = 0.05,
):
    """Physical-plausibility hook: run the photon-transfer dynamics for one hop.

    Gates in a schedule are abstract; this attaches the coupler's exchange
    Hamiltonian to a single engaged hop and returns the transfer report for a
    photon injected at the hop's source port.
    """
    import math

    from .qdynamics import basis_state, build_hamiltonian, evolve, transfer_report

    pair = select_pair(step.squid_index)
    system = build_hamiltonian(pair, n_modes=3, fock_cutoff=fock_cutoff, coupling=coupling)
    occupations = [0, 0, 0]
    occupations[pair[0] - 1] = 1
    horizon = t_final if t_final is not None else 1.1 * math.sqrt(2.0) * math.pi / coupling
    trajectory = evolve(
        system, horizon, dt, initial_state=basis_state(system, 0, tuple(occupations))
    )
    return transfer_report(trajectory)


def adjacency_json(lat: Lattice) -> dict:
    """Adjacency-list export of the qubit graph plus the coupler port map."""
    adj = qubit_adjacency(lat)
    return {
        "rows": lat.rows,
        "cols": lat.cols,
        "sites": lat.n_sites,
        "adjacency": {str(s): list(ns) for s, ns in adj.items()},
        "coupler_ports": {str(c): list(ports) for c, ports in sorted(lat.coupler_ports.items())},
    }
