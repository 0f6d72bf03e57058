import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_network
from rotary_pcr.errors import (
    CalibrationError,
    ConfigurationError,
    SingularSystemError,
    StepSizeError,
)
from rotary_pcr.thermal import (
    AMBIENT,
    BOUNDARY,
    CHAMBER,
    HeatSource,
    LinearModel,
    PlantConfig,
    Propagator,
    ThermalLink,
    ThermalNetwork,
    ThermalNode,
    bind_chamber,
    build_platform_network,
    build_zone_network,
    calibrate_zone,
    copper_plate_capacity,
    integrate,
    plate_id,
    steady_state,
    step,
)

REPORTED_POWERS = (4.51, 1.35, 3.74)


def single_pole(c=1.0, g=1.0, t0=100.0, ambient=25.0, power_node=False):
    nodes = (ThermalNode("x", t0, c), ThermalNode(AMBIENT, ambient, kind=BOUNDARY))
    links = (ThermalLink("x", AMBIENT, g),)
    sources = (HeatSource("x"),) if power_node else ()
    return ThermalNetwork(nodes, links, sources, ambient)


# ---------------------------------------------------------------------------
# platform assembly
# ---------------------------------------------------------------------------

def test_default_platform_structure():
    net = build_platform_network()
    internal = [n for n in net.nodes if n.kind == "internal"]
    boundary = [n for n in net.nodes if n.kind == BOUNDARY]
    assert len(internal) == 8
    assert sum(n.id.startswith("heater_") for n in internal) == 3
    assert sum(n.id.startswith("plate_") for n in internal) == 3
    assert {n.id for n in internal} >= {"chamber", "sample"}
    assert [n.id for n in boundary] == [AMBIENT]
    assert len(net.sources) == 3


def test_zero_plate_thickness_rejected():
    with pytest.raises(ConfigurationError):
        build_platform_network(PlantConfig(plate_thickness_mm=0.0))


def test_negative_conductance_rejected():
    with pytest.raises(ConfigurationError):
        build_platform_network(PlantConfig(contact_conductance=-1.0))


def test_copper_plate_capacity():
    # 30 x 20 x 2 mm copper: 1.2e-6 m^3 * 8960 kg/m^3 * 385 J/(kg K)
    assert copper_plate_capacity(30, 20, 2) == pytest.approx(4.13952, rel=1e-12)
    assert PlantConfig().plate_capacity() == pytest.approx(4.14, abs=0.005)


def test_chamber_rebinding_moves_the_contact_link():
    cfg = PlantConfig()
    net = build_platform_network(cfg, zone=0)
    for zone, other in ((1, plate_id(1)), (2, plate_id(2)), (None, AMBIENT)):
        moved = bind_chamber(net, zone, cfg)
        contacts = [l for l in moved.links if l.touches(CHAMBER) and not l.touches("sample")]
        assert len(contacts) == 1 and contacts[0].touches(other)


def test_network_validation():
    a = ThermalNode("a", 25.0, 1.0)
    with pytest.raises(ConfigurationError):
        ThermalNetwork((a, a))
    with pytest.raises(ConfigurationError):
        ThermalNetwork((a,), (ThermalLink("a", "missing", 1.0),))
    with pytest.raises(ConfigurationError):
        ThermalLink("a", "a", 1.0)
    with pytest.raises(ConfigurationError):
        ThermalNode("b", 25.0, 0.0)
    with pytest.raises(ConfigurationError):
        HeatSource("a", -1.0)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def test_equilibrium_is_a_fixed_point():
    net = build_platform_network()
    after = step(net, [0.0, 0.0, 0.0], 0.01)
    assert after.temperatures == net.temperatures


def test_single_pole_decay_matches_closed_form():
    net = single_pole()
    for _ in range(1000):
        net = step(net, None, 0.001)
    # 25 + 75 exp(-1)
    assert net.node("x").temperature == pytest.approx(52.590958087858176, abs=1e-4)


def test_boundary_nodes_never_move():
    net = build_platform_network()
    for _ in range(50):
        net = step(net, REPORTED_POWERS, 0.01)
    assert net.node(AMBIENT).temperature == 25.0


def test_step_size_guard():
    net = single_pole(c=1.0, g=1.0)
    step(net, None, 0.1)  # exactly at the bound
    with pytest.raises(StepSizeError):
        step(net, None, 0.1001)
    with pytest.raises(StepSizeError):
        step(net, None, 0.0)


def test_propagator_equals_repeated_rk4_steps(rng):
    net, powers = random_network(rng, 5)
    net = net.with_temperatures({f"n{i}": 25 + 10 * i for i in range(5)})
    dt = 0.5 * LinearModel(net).stability_limit()
    manual = net
    for _ in range(40):
        manual = step(manual, powers, dt)
    fast = integrate(net, powers, dt, 40)
    for nid in net.internal_ids:
        assert fast.node(nid).temperature == pytest.approx(manual.node(nid).temperature, abs=1e-10)


def test_calibrated_plates_reach_reported_temperatures():
    net = build_platform_network()
    late = integrate(net, REPORTED_POWERS, 0.01, 20_000_000)  # 2e5 s
    for zone, target in enumerate((95.0, 55.0, 72.0)):
        assert late.node(plate_id(zone)).temperature == pytest.approx(target, abs=1e-6)


def test_energy_balance_single_step_quadrature(rng):
    net, powers = random_network(rng, 6)
    net = net.with_temperatures({f"n{i}": 30 + 5 * i for i in range(6)})
    model = LinearModel(net)
    dt = 0.5 * model.stability_limit()
    prop = Propagator(model, dt)
    T = model.state()
    stored = input_ = lost = 0.0
    for _ in range(500):
        lost += prop.loss(T, powers)
        input_ += dt * powers.sum()
        T_new = prop.advance(T, powers)
        stored += model.capacity @ (T_new - T)
        T = T_new
    assert abs(stored - (input_ - lost)) <= 1e-6 * max(input_, abs(lost))


# ---------------------------------------------------------------------------
# steady state and calibration
# ---------------------------------------------------------------------------

def test_steady_state_zero_power_is_ambient():
    ss = steady_state(build_platform_network(), [0, 0, 0])
    assert all(v == pytest.approx(25.0, abs=1e-12) for v in ss.values())


def test_steady_state_single_node():
    net = single_pole(power_node=True)
    assert steady_state(net, [70.0])["x"] == pytest.approx(95.0, abs=1e-12)


def test_steady_state_full_platform_with_reported_powers():
    ss = steady_state(build_platform_network(), REPORTED_POWERS)
    for zone, target in enumerate((95.0, 55.0, 72.0)):
        assert ss[plate_id(zone)] == pytest.approx(target, abs=1e-9)


def test_disconnected_node_is_singular():
    nodes = (ThermalNode("a", 25, 1.0), ThermalNode("b", 25, 1.0),
             ThermalNode(AMBIENT, 25, kind=BOUNDARY))
    net = ThermalNetwork(nodes, (ThermalLink("a", AMBIENT, 1.0), ThermalLink("b", AMBIENT, 0.0)))
    with pytest.raises(SingularSystemError):
        steady_state(net)


@pytest.mark.parametrize(
    "power, temp, expected",
    [(4.51, 95.0, 0.06443), (1.35, 55.0, 0.04500), (3.74, 72.0, 0.07957)],
)
def test_calibrate_zone_values(power, temp, expected):
    assert calibrate_zone(power, temp, 25.0) == pytest.approx(expected, abs=5e-6)


@pytest.mark.parametrize("power, temp", [(0.0, 95.0), (4.51, 25.0), (4.51, 20.0)])
def test_calibrate_zone_rejects_infeasible(power, temp):
    with pytest.raises(CalibrationError):
        calibrate_zone(power, temp, 25.0)


@pytest.mark.parametrize("zone", [0, 1, 2])
def test_calibration_round_trip(zone):
    power, temp = REPORTED_POWERS[zone], (95.0, 55.0, 72.0)[zone]
    net = build_zone_network(PlantConfig(), zone)
    assert steady_state(net, [power])[plate_id(zone)] == pytest.approx(temp, abs=1e-9)


# ---------------------------------------------------------------------------
# properties over random networks
# ---------------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 8))
def test_steady_state_matches_long_horizon(seed, n):
    net, powers = random_network(np.random.default_rng(seed), n)
    dt = 0.5 * LinearModel(net).stability_limit()
    late = integrate(net, powers, dt, int(math.ceil(1e5 / dt)))
    ss = steady_state(net, powers)
    for nid in net.internal_ids:
        assert late.node(nid).temperature == pytest.approx(ss[nid], abs=0.01)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 8))
def test_monotone_boundedness(seed, n):
    net, powers = random_network(np.random.default_rng(seed), n)
    model = LinearModel(net)
    dt = 0.5 * model.stability_limit()
    prop = Propagator(model, dt)
    ceiling = max(steady_state(net, powers).values())
    T = model.state()
    for _ in range(2000):
        T = prop.advance(T, powers)
        assert T.min() >= 25.0 - 1e-9
        assert T.max() <= ceiling + 1e-9
