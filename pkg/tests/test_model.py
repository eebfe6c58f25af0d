import math

import pytest
from scipy.optimize import brentq

from fluxcirc.model import (
    FLUX_QUANTUM,
    BiasCurrents,
    ConfigError,
    CouplerConfig,
    PhysicalParams,
    default_physical_params,
    effective_junction_energy,
    load_physical_params,
    normalize,
    physical_params_from_dict,
    redimensionalize,
)


def test_effective_energy_zero_flux():
    assert effective_junction_energy(2.5e-22, 0.0) == 2.5e-22


def test_effective_energy_half_quantum():
    e = effective_junction_energy(1.0, FLUX_QUANTUM / 2.0)
    assert abs(e) < 1e-12


def test_effective_energy_inverted_for_ratio():
    # flux that reduces the junction to 0.8, found by an independent root
    # solve in units of the flux quantum
    y = brentq(lambda v: math.cos(math.pi * v) - 0.8, 0.0, 0.5, xtol=1e-15)
    assert abs(y - 0.2048) < 1e-3
    assert abs(effective_junction_energy(1.0, y * FLUX_QUANTUM) - 0.8) < 1e-9


def test_normalize_reference_device():
    cfg, scales = normalize(default_physical_params())
    assert cfg.n_ports == 3
    assert abs(cfg.junction_ratios[0] - 0.8) < 1e-12
    assert cfg.junction_ratios[1] == 1.0 and cfg.junction_ratios[2] == 1.0
    assert cfg.frustration == 0.5
    assert cfg.weak_index == 1
    assert abs(scales.current - 500e-9) < 1e-18  # loop critical current anchor


def test_normalize_all_squids_open():
    p = default_physical_params()
    p = physical_params_from_dict({**p.to_dict(), "squid_fluxes": [0.0, 0.0, 0.0]})
    cfg, _ = normalize(p)
    assert cfg.junction_ratios == (1.0, 1.0, 1.0)
    assert cfg.weak_index is None
    assert cfg.weak_ratio == 1.0


def test_kinetic_inductance_flag():
    p = default_physical_params()
    assert p.kinetic_inductance / p.loop_self_inductance == pytest.approx(0.01)
    _, scales = normalize(p)
    assert scales.kinetic_inductance_neglected

    heavy = physical_params_from_dict({**p.to_dict(), "kinetic_inductance": 2e-12})
    _, scales2 = normalize(heavy)
    assert not scales2.kinetic_inductance_neglected
    assert scales2.inductive_weight < scales.inductive_weight


def test_normalize_rejects_suppressed_junction():
    p = default_physical_params()
    bad = {**p.to_dict(), "squid_fluxes": [0.6 * FLUX_QUANTUM, 0.0, 0.0]}
    with pytest.raises(ConfigError):
        normalize(physical_params_from_dict(bad))


def test_normalize_rejects_two_weak_junctions():
    p = default_physical_params()
    f1 = p.squid_fluxes[0]
    bad = {**p.to_dict(), "squid_fluxes": [f1, f1, 0.0]}
    with pytest.raises(ConfigError):
        normalize(physical_params_from_dict(bad))


def test_round_trip_identity():
    p = default_physical_params()
    cfg, scales = normalize(p)
    back = redimensionalize(cfg, scales)
    for name in PhysicalParams.__dataclass_fields__:
        a, b = getattr(p, name), getattr(back, name)
        if isinstance(a, tuple):
            for x, y in zip(a, b):
                assert abs(x - y) <= 1e-12 * max(1.0, abs(x))
        else:
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_round_trip_identity_dimensionless_side():
    cfg, scales = normalize(default_physical_params())
    cfg2, scales2 = normalize(redimensionalize(cfg, scales))
    assert cfg2.weak_index == cfg.weak_index
    assert cfg2.frustration == pytest.approx(cfg.frustration, rel=1e-12)
    for a, b in zip(cfg.junction_ratios, cfg2.junction_ratios):
        assert a == pytest.approx(b, rel=1e-12)
    assert scales2.current == pytest.approx(scales.current, rel=1e-12)
    assert scales2.inductive_weight == pytest.approx(scales.inductive_weight, rel=1e-12)


def test_bias_currents_conservation():
    BiasCurrents((3e-5, -3e-5, 0.0))
    BiasCurrents((0.0, 0.0, 0.0))
    with pytest.raises(ConfigError):
        BiasCurrents((1e-3, -1e-3, 1e-6))
    with pytest.raises(ConfigError):
        BiasCurrents((1e-11, 0.0, 0.0))


def test_bias_pair_drive():
    b = BiasCurrents.pair_drive(3, 2, 3, 0.05)
    assert b.u == (0.0, 0.05, -0.05)
    with pytest.raises(ConfigError):
        BiasCurrents.pair_drive(3, 2, 2, 0.05)


def test_physical_params_validation():
    p = default_physical_params().to_dict()
    with pytest.raises(ConfigError):
        physical_params_from_dict({**p, "loop_self_inductance": 0.0})
    with pytest.raises(ConfigError):
        physical_params_from_dict({**p, "interface_length": 1.0})
    with pytest.raises(ConfigError):
        physical_params_from_dict({**p, "fock_cutoff": 0})
    with pytest.raises(ConfigError):
        physical_params_from_dict({**p, "loop_flux": 1.5 * FLUX_QUANTUM})


def test_coupler_config_validation():
    with pytest.raises(ConfigError):
        CouplerConfig(3, (0.8, 0.9, 1.0), 0.5, 1)  # two reduced junctions
    with pytest.raises(ConfigError):
        CouplerConfig(3, (0.8, 1.0, 1.0), 0.5, 2)  # weak index points elsewhere
    with pytest.raises(ConfigError):
        CouplerConfig(3, (1.0, 1.0, 1.0), 1.2, None)  # frustration out of range
    with pytest.raises(ConfigError):
        CouplerConfig(1, (1.0,), 0.5, None)


def test_json_loading(tmp_path):
    import json

    p = default_physical_params()
    path = tmp_path / "dev.json"
    path.write_text(json.dumps(p.to_dict()))
    loaded = load_physical_params(path)
    assert loaded == p
    bad = tmp_path / "bad.json"
    bad.write_text("{\"base_junction_energy\": 1}")
    with pytest.raises(ConfigError):
        load_physical_params(bad)


def test_repo_default_config_matches_builtin():
    import pathlib

    path = pathlib.Path(__file__).resolve().parents[1] / "configs" / "defaults.json"
    assert load_physical_params(path) == default_physical_params()
