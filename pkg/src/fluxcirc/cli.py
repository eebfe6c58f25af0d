"""Command-line front end emitting reproducible CSV/JSON artifacts.

Subcommands: potential-grid, fig3-sweep, circulator-report, coeffs, evolve,
route.  Every run writes a ``<command>.manifest.json`` next to its outputs
with the resolved parameters and output list.  Data files are byte-identical
across runs for identical configs and seeds: '.' decimals, LF line endings,
17-significant-digit floats, sorted JSON keys.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure,
4 I/O failure.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .circulator import (
    ViolatedCirculation,
    pair_selectivity,
    robustness_scan,
    verify_circulation,
)
from .lattice import adjacency_json, build_kagome, plan_route, validate_schedule
from .minimizer import (
    NoDoubleWell,
    NonConvergence,
    SaddlePoint,
    sweep_output_current,
    zero_bias_well_phase,
)
from .model import (
    BiasCurrents,
    ConfigError,
    default_physical_params,
    load_physical_params,
    normalize,
)
from .potential import DerivationMismatch, coupling_coefficients, potential_reduced
from .qdynamics import (
    NormDriftError,
    ResonatorParams,
    basis_state,
    build_hamiltonian,
    coupling_strength,
    evolve,
)

_NUMERICAL_ERRORS = (
    NonConvergence,
    SaddlePoint,
    NoDoubleWell,
    ViolatedCirculation,
    NormDriftError,
    DerivationMismatch,
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_config(args):
    if args.config:
        return load_physical_params(args.config), args.config
    return default_physical_params(), None


def _manifest(args, command: str, config_path, parameters: dict, outputs: list[str], t0: float) -> None:
    payload = {
        "command": command,
        "config_path": config_path,
        "parameters": parameters,
        "outputs": sorted(outputs),
        "seed": args.seed,
        "toolkit_version": __version__,
        "wall_time_s": time.perf_counter() - t0,
    }
    _write_json(os.path.join(args.out, f"{command}.manifest.json"), payload)


def _coupler_parameters(cfg) -> dict:
    return {
        "n_ports": cfg.n_ports,
        "junction_ratios": list(cfg.junction_ratios),
        "frustration": cfg.frustration,
        "weak_index": cfg.weak_index,
        "winding": cfg.winding,
    }


def cmd_potential_grid(args) -> int:
    t0 = time.perf_counter()
    params, config_path = _load_config(args)
    cfg, _ = normalize(params)
    if args.resolution < 2:
        raise ConfigError("resolution must be at least 2 per axis")
    bias = BiasCurrents(tuple(args.bias))
    axis = np.linspace(-math.pi, math.pi, args.resolution)
    pp, pm = np.meshgrid(axis, axis, indexing="ij")
    values = potential_reduced(pp, pm, cfg, bias)
    lines = ["phi_plus,phi_minus,u_eff"]
    for i in range(args.resolution):
        for j in range(args.resolution):
            lines.append(f"{_fmt(pp[i, j])},{_fmt(pm[i, j])},{_fmt(values[i, j])}")
    out_csv = os.path.join(args.out, "potential_grid.csv")
    _write_text(out_csv, "\n".join(lines) + "\n")
    _manifest(
        args,
        "potential-grid",
        config_path,
        {
            "coupler": _coupler_parameters(cfg),
            "bias": list(bias.u),
            "resolution": args.resolution,
            "phi_range": [-math.pi, math.pi],
        },
        [out_csv],
        t0,
    )
    print(out_csv)
    return 0


def cmd_fig3_sweep(args) -> int:
    t0 = time.perf_counter()
    params, config_path = _load_config(args)
    cfg, _ = normalize(params)
    table = sweep_output_current(cfg, args.u1, args.points)
    out_csv = os.path.join(args.out, "sweep.csv")
    table.to_csv(out_csv)
    _manifest(
        args,
        "fig3-sweep",
        config_path,
        {
            "coupler": _coupler_parameters(cfg),
            "input_current": args.u1,
            "points": args.points,
            "ratio_range": [-1.0, 0.0],
        },
        [out_csv],
        t0,
    )
    print(out_csv)
    return 0


def cmd_circulator_report(args) -> int:
    t0 = time.perf_counter()
    params, config_path = _load_config(args)
    cfg, _ = normalize(params)
    report = verify_circulation(cfg, args.u_in, args.chirality)
    scan = robustness_scan(
        cfg, (args.f_min, args.f_max), args.f_steps, input_current=args.u_in, chirality=args.chirality
    )
    payload = {
        "circulation": report.to_json_dict(),
        "robustness": [
            {
                "frustration": p.frustration,
                "phi_minus_min": p.phi_minus_min,
                "residual": p.dark_residual,
                "envelope_slope": p.envelope_slope,
                "ok": p.ok,
                "note": p.note,
            }
            for p in scan.points
        ],
        "robustness_all_ok": scan.all_ok,
    }
    out_json = os.path.join(args.out, "circulator_report.json")
    _write_json(out_json, payload)
    _manifest(
        args,
        "circulator-report",
        config_path,
        {
            "coupler": _coupler_parameters(cfg),
            "input_current": args.u_in,
            "chirality": args.chirality,
            "f_range": [args.f_min, args.f_max],
            "f_steps": args.f_steps,
        },
        [out_json],
        t0,
    )
    print(out_json)
    return 0


def cmd_coeffs(args) -> int:
    t0 = time.perf_counter()
    coeffs = coupling_coefficients(args.n)
    payload = {
        "n_ports": args.n,
        "matrix": coeffs.matrix.astype(int).tolist(),
        "chain_matrix": coeffs.chain_matrix.tolist(),
    }
    if args.k is not None:
        sel = pair_selectivity(args.n, args.k)
        payload["weak_index"] = args.k
        payload["selective"] = sel.selective
        payload["current_support_size"] = sel.current_support_size
        payload["support"] = sorted(sel.support)
    out_json = os.path.join(args.out, "coeffs.json")
    _write_json(out_json, payload)
    _manifest(args, "coeffs", None, {"n": args.n, "k": args.k}, [out_json], t0)
    print(out_json)
    return 0


def cmd_evolve(args) -> int:
    t0 = time.perf_counter()
    params, config_path = _load_config(args)
    cfg, scales = normalize(params)
    if args.g_over_omega is not None:
        g_ratio = args.g_over_omega
    else:
        resonator = ResonatorParams(
            angular_frequency=scales.resonator_frequency,
            inductance_density=scales.resonator_inductance_density,
            effective_length=scales.resonator_length + scales.interface_length,
            interface_length=scales.interface_length,
        )
        g_ratio = coupling_strength(zero_bias_well_phase(cfg), resonator) / scales.resonator_frequency
    omega_a = args.omega_a_over_omega
    if omega_a is None:
        omega_a = scales.qubit_splitting / scales.resonator_frequency
    sys_q = build_hamiltonian(
        selected_pair=tuple(args.pair),
        n_modes=args.modes,
        fock_cutoff=args.fock_cutoff,
        mode_frequencies=1.0,
        qubit_splitting=omega_a,
        coupling=g_ratio,
        rwa=args.rwa,
    )
    t_final = args.t_final
    if t_final is None:
        t_final = 1.1 * math.sqrt(2.0) * math.pi / g_ratio
    occupations0 = [0] * args.modes
    occupations0[args.pair[0] - 1] = 1
    initial = basis_state(sys_q, 0, occupations0)
    traj = evolve(sys_q, t_final, args.dt, initial_state=initial, sample_every=args.sample_every)
    occ = traj.occupations_array()
    sz = traj.sigma_z_array()
    norms = traj.norms()
    lines = ["t,n1,n2,n3,sigma_z,norm"]
    for i, t in enumerate(traj.times):
        n_cols = [occ[i, j] if j < args.modes else 0.0 for j in range(3)]
        lines.append(
            ",".join(_fmt(v) for v in (t, n_cols[0], n_cols[1], n_cols[2], sz[i], norms[i]))
        )
    out_csv = os.path.join(args.out, "trajectory.csv")
    _write_text(out_csv, "\n".join(lines) + "\n")
    _manifest(
        args,
        "evolve",
        config_path,
        {
            "coupler": _coupler_parameters(cfg),
            "pair": list(args.pair),
            "modes": args.modes,
            "fock_cutoff": args.fock_cutoff,
            "g_over_omega": g_ratio,
            "omega_a_over_omega": omega_a,
            "t_final": t_final,
            "dt": args.dt,
            "sample_every": args.sample_every,
            "rwa": args.rwa,
        },
        [out_csv],
        t0,
    )
    print(out_csv)
    return 0


def cmd_route(args) -> int:
    t0 = time.perf_counter()
    lat = build_kagome(args.rows, args.cols)
    schedule = plan_route(lat, args.source, args.target)
    violations = validate_schedule(lat, schedule)
    payload = {
        "rows": args.rows,
        "cols": args.cols,
        "from": args.source,
        "to": args.target,
        "gate_count": schedule.gate_count(),
        "schedule": schedule.to_json_list(),
        "violations": violations,
    }
    out_json = os.path.join(args.out, "route.json")
    _write_json(out_json, payload)
    outputs = [out_json]
    if args.write_lattice:
        lattice_json = os.path.join(args.out, "lattice.json")
        _write_json(lattice_json, adjacency_json(lat))
        outputs.append(lattice_json)
    _manifest(
        args,
        "route",
        None,
        {"rows": args.rows, "cols": args.cols, "from": args.source, "to": args.target},
        outputs,
        t0,
    )
    print(out_json)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxcirc",
        description="Flux-qubit three-port circulator: potential maps, sweeps, "
        "circulation checks, photon-transfer runs, and lattice routing.",
    )
    parser.add_argument("--config", help="JSON file with SI device parameters")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential-grid", help="reduced potential on a [-pi, pi]^2 grid")
    p.add_argument("--resolution", type=int, default=201, help="grid points per axis")
    p.add_argument(
        "--bias",
        type=float,
        nargs=3,
        default=[0.025, -0.025, 0.0],
        metavar=("U1", "U2", "U3"),
        help="port bias currents (units of the loop critical current)",
    )
    p.set_defaults(func=cmd_potential_grid)

    p = sub.add_parser("fig3-sweep", help="track the well while sweeping u2/u1 over [-1, 0]")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--u1", type=float, default=0.025, help="input bias current")
    p.set_defaults(func=cmd_fig3_sweep)

    p = sub.add_parser("circulator-report", help="verify routing and scan frustration offsets")
    p.add_argument("--u-in", type=float, default=3e-5, dest="u_in")
    p.add_argument("--chirality", type=int, choices=(1, -1), default=1)
    p.add_argument("--f-min", type=float, default=0.48)
    p.add_argument("--f-max", type=float, default=0.52)
    p.add_argument("--f-steps", type=int, default=21)
    p.set_defaults(func=cmd_circulator_report)

    p = sub.add_parser("coeffs", help="bias coupling coefficients and pair selectivity")
    p.add_argument("--n", type=int, required=True, help="number of ports")
    p.add_argument("--k", type=int, default=None, help="weak junction index (optional)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("evolve", help="photon transfer through the coupler")
    p.add_argument("--pair", type=int, nargs=2, default=[1, 2], metavar=("L", "M"))
    p.add_argument("--modes", type=int, default=3)
    p.add_argument("--fock-cutoff", type=int, default=3, dest="fock_cutoff")
    p.add_argument(
        "--g-over-omega",
        type=float,
        default=None,
        dest="g_over_omega",
        help="coupling/mode frequency; derived from the config when omitted",
    )
    p.add_argument(
        "--omega-a-over-omega",
        type=float,
        default=None,
        dest="omega_a_over_omega",
        help="qubit splitting/mode frequency; from the config when omitted",
    )
    p.add_argument("--t-final", type=float, default=None, dest="t_final")
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--sample-every", type=int, default=1, dest="sample_every")
    p.add_argument("--rwa", action="store_true", help="drop counter-rotating terms")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("route", help="plan a gate chain between two qubit sites")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--from", type=int, required=True, dest="source")
    p.add_argument("--to", type=int, required=True, dest="target")
    p.add_argument("--write-lattice", action="store_true", dest="write_lattice")
    p.set_defaults(func=cmd_route)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"fluxcirc: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"fluxcirc: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fluxcirc: i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
