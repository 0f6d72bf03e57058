"""Lumped-parameter (RC network) thermal model of the rotary platform.

Every body is a node with one temperature. Internal nodes carry a heat
capacity ``C`` (J/K); boundary nodes are held at a fixed temperature.
Links are thermal conductances ``G`` (W/K) and heat sources inject power
into internal nodes.  Node temperatures obey

    C_i dT_i/dt = sum_j G_ij (T_j - T_i) + P_i

which is integrated with the classical 4-stage Runge-Kutta scheme.

The platform network has, per zone, a thin-film heater node feeding a
copper plate node that leaks to ambient through the heat-resistance plate.
The silicon chamber node touches exactly one plate at a time and holds the
sample node (sample plus the mineral-oil overlay).  The 0.2 um thermal
oxide on the chamber is thermally negligible and is not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import constants
from .errors import (
    CalibrationError,
    ConfigurationError,
    SingularSystemError,
    StepSizeError,
)

INTERNAL = "internal"
BOUNDARY = "boundary"

AMBIENT = "ambient"
CHAMBER = "chamber"
SAMPLE = "sample"

# fraction of the stiffest node time constant allowed as a step
STABILITY_FACTOR = 0.1


@dataclass(frozen=True)
class ThermalNode:
    id: str
    temperature: float
    heat_capacity: float | None = None
    kind: str = INTERNAL

    def __post_init__(self):
        if self.kind not in (INTERNAL, BOUNDARY):
            raise ConfigurationError(f"node {self.id!r}: unknown kind {self.kind!r}")
        if self.kind == INTERNAL:
            if self.heat_capacity is None or not self.heat_capacity > 0:
                raise ConfigurationError(
                    f"node {self.id!r}: heat capacity must be > 0, got {self.heat_capacity}"
                )
        if not math.isfinite(self.temperature):
            raise ConfigurationError(f"node {self.id!r}: non-finite temperature")


@dataclass(frozen=True)
class ThermalLink:
    node_a: str
    node_b: str
    conductance: float

    def __post_init__(self):
        if self.node_a == self.node_b:
            raise ConfigurationError(f"link {self.node_a!r} connects a node to itself")
        if not self.conductance >= 0:
            raise ConfigurationError(
                f"link {self.node_a}-{self.node_b}: conductance must be >= 0"
            )

    def touches(self, node_id):
        return node_id in (self.node_a, self.node_b)


@dataclass(frozen=True)
class HeatSource:
    node: str
    power: float = 0.0

    def __post_init__(self):
        if not self.power >= 0:
            raise ConfigurationError(f"source on {self.node!r}: power must be >= 0")


@dataclass(frozen=True)
class ThermalNetwork:
    """Immutable plant state: nodes, links, heat sources and ambient.

    ``sources`` fix the ordering of heater power vectors passed to
    :func:`step` and :func:`steady_state`.
    """

    nodes: tuple[ThermalNode, ...]
    links: tuple[ThermalLink, ...] = ()
    sources: tuple[HeatSource, ...] = ()
    ambient: float = 25.0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "sources", tuple(self.sources))
        index = {}
        for node in self.nodes:
            if node.id in index:
                raise ConfigurationError(f"duplicate node id {node.id!r}")
            index[node.id] = node
        object.__setattr__(self, "_index", index)
        for link in self.links:
            for end in (link.node_a, link.node_b):
                if end not in index:
                    raise ConfigurationError(f"link references unknown node {end!r}")
        for src in self.sources:
            if src.node not in index:
                raise ConfigurationError(f"source references unknown node {src.node!r}")
            if index[src.node].kind != INTERNAL:
                raise ConfigurationError(f"source on boundary node {src.node!r}")

    def node(self, node_id):
        return self._index[node_id]

    @property
    def internal_ids(self):
        return tuple(n.id for n in self.nodes if n.kind == INTERNAL)

    @property
    def temperatures(self):
        return {n.id: n.temperature for n in self.nodes}

    def with_temperatures(self, temps: Mapping[str, float]):
        nodes = tuple(
            replace(n, temperature=float(temps[n.id]))
            if n.kind == INTERNAL and n.id in temps
            else n
            for n in self.nodes
        )
        return replace(self, nodes=nodes)

    def with_links(self, links):
        return replace(self, links=tuple(links))


class LinearModel:
    """Matrix form of a network: ``dT/dt = A T + B p + c``.

    Only internal nodes are states; boundary temperatures enter through
    ``c``.  ``loss_weights`` and ``loss_offset`` give the net heat flow out
    through boundary links as ``loss_weights @ T - loss_offset``.
    """

    def __init__(self, network: ThermalNetwork):
        ids = network.internal_ids
        pos = {nid: i for i, nid in enumerate(ids)}
        n = len(ids)
        cap = np.array([network.node(i).heat_capacity for i in ids], dtype=float)
        lap = np.zeros((n, n))
        boundary_flow = np.zeros(n)
        boundary_g = np.zeros(n)
        for link in network.links:
            g = link.conductance
            a, b = link.node_a, link.node_b
            if a in pos and b in pos:
                i, j = pos[a], pos[b]
                lap[i, i] += g
                lap[j, j] += g
                lap[i, j] -= g
                lap[j, i] -= g
            elif a in pos or b in pos:
                inner, outer = (a, b) if a in pos else (b, a)
                i = pos[inner]
                lap[i, i] += g
                boundary_g[i] += g
                boundary_flow[i] += g * network.node(outer).temperature
        src = np.zeros((n, len(network.sources)))
        for k, s in enumerate(network.sources):
            src[pos[s.node], k] = 1.0

        self.ids = ids
        self.index = pos
        self.capacity = cap
        self.laplacian = lap
        self.source_matrix = src
        self.boundary_flow = boundary_flow
        self.loss_weights = boundary_g
        self.loss_offset = float(boundary_flow.sum())
        self.A = -lap / cap[:, None]
        self.B = src / cap[:, None]
        self.c = boundary_flow / cap
        self.network = network

    def state(self, network=None):
        net = network or self.network
        return np.array([net.node(i).temperature for i in self.ids], dtype=float)

    def stability_limit(self):
        """Largest admissible step: 0.1 * min(C_i / sum_j G_ij)."""
        total_g = np.diag(self.laplacian)
        with np.errstate(divide="ignore"):
            tau = np.where(total_g > 0, self.capacity / total_g, np.inf)
        return STABILITY_FACTOR * float(tau.min()) if tau.size else math.inf

    def check_step(self, dt):
        if not dt > 0:
            raise StepSizeError(f"dt must be > 0, got {dt}")
        limit = self.stability_limit()
        if dt > limit:
            raise StepSizeError(
                f"dt = {dt:g} s exceeds the stability bound {limit:g} s of the stiffest node"
            )

    def derivative(self, temps, powers):
        return self.A @ temps + self.B @ powers + self.c


class Propagator:
    """One RK4 step of a :class:`LinearModel` written as matrices.

    Because the model is linear with inputs held over the step, the four
    stages collapse to ``T' = M T + D p + e``.  ``stage_mean`` gives the
    RK4-weighted mean stage temperature, used to integrate the boundary
    heat loss with the integrator's own quadrature.
    """

    def __init__(self, model: LinearModel, dt: float, check=True):
        if check:
            model.check_step(dt)
        n = len(model.ids)
        eye = np.eye(n)
        A, h = model.A, dt
        # each stage is (coefficient on T, coefficient on the input u = B p + c)
        x1 = (eye, np.zeros((n, n)))
        k1 = (A @ x1[0], A @ x1[1] + eye)
        x2 = (x1[0] + 0.5 * h * k1[0], x1[1] + 0.5 * h * k1[1])
        k2 = (A @ x2[0], A @ x2[1] + eye)
        x3 = (x1[0] + 0.5 * h * k2[0], x1[1] + 0.5 * h * k2[1])
        k3 = (A @ x3[0], A @ x3[1] + eye)
        x4 = (x1[0] + h * k3[0], x1[1] + h * k3[1])
        k4 = (A @ x4[0], A @ x4[1] + eye)
        M = eye + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        U = h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        Q = (x1[0] + 2 * x2[0] + 2 * x3[0] + x4[0]) / 6.0
        R = (x1[1] + 2 * x2[1] + 2 * x3[1] + x4[1]) / 6.0

        self.model = model
        self.dt = dt
        self.M = M
        self.D = U @ model.B
        self.e = U @ model.c
        # boundary loss over one step = loss_T @ T + loss_p @ p + loss_0
        self.loss_T = h * (model.loss_weights @ Q)
        self.loss_p = h * (model.loss_weights @ R @ model.B)
        self.loss_0 = h * (model.loss_weights @ R @ model.c - model.loss_offset)

    def advance(self, temps, powers):
        return self.M @ temps + self.D @ powers + self.e

    def loss(self, temps, powers):
        return float(self.loss_T @ temps + self.loss_p @ powers + self.loss_0)

    def advance_many(self, temps, powers, n_steps):
        """Apply the same step ``n_steps`` times (by repeated squaring)."""
        n = len(temps)
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = self.M
        aug[:n, n] = self.D @ powers + self.e
        aug[n, n] = 1.0
        power = np.linalg.matrix_power(aug, int(n_steps))
        return power[:n, :n] @ temps + power[:n, n]


def _powers(network, heater_powers):
    if heater_powers is None:
        p = np.array([s.power for s in network.sources], dtype=float)
    else:
        p = np.asarray(heater_powers, dtype=float).reshape(-1)
    if p.shape != (len(network.sources),):
        raise ConfigurationError(
            f"expected {len(network.sources)} heater powers, got {p.size}"
        )
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ConfigurationError("heater powers must be finite and >= 0")
    return p


def step(network: ThermalNetwork, heater_powers: Sequence[float] | None, dt: float):
    """Advance all internal nodes by one classical RK4 step.

    Boundary nodes are left untouched.  Raises :class:`StepSizeError` when
    ``dt`` is not positive or exceeds ``0.1 * min(C_i / sum G_i)``.
    """
    model = LinearModel(network)
    model.check_step(dt)
    p = _powers(network, heater_powers)
    T = model.state()
    k1 = model.derivative(T, p)
    k2 = model.derivative(T + 0.5 * dt * k1, p)
    k3 = model.derivative(T + 0.5 * dt * k2, p)
    k4 = model.derivative(T + dt * k3, p)
    T_new = T + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return network.with_temperatures(dict(zip(model.ids, T_new)))


def integrate(network, heater_powers, dt, n_steps):
    """Run ``n_steps`` RK4 steps at constant power; returns the new network."""
    model = LinearModel(network)
    prop = Propagator(model, dt)
    p = _powers(network, heater_powers)
    T = prop.advance_many(model.state(), p, n_steps)
    return network.with_temperatures(dict(zip(model.ids, T)))


def _check_grounded(network):
    """Every internal node must reach a boundary node over G > 0 links."""
    adj = {n.id: set() for n in network.nodes}
    for link in network.links:
        if link.conductance > 0:
            adj[link.node_a].add(link.node_b)
            adj[link.node_b].add(link.node_a)
    seen = {n.id for n in network.nodes if n.kind == BOUNDARY}
    frontier = list(seen)
    while frontier:
        for nb in adj[frontier.pop()]:
            if nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    floating = [i for i in network.internal_ids if i not in seen]
    if floating:
        raise SingularSystemError(
            f"nodes {floating} have no conductive path to a boundary node"
        )


def steady_state(network: ThermalNetwork, heater_powers=None):
    """Temperatures with zero net heat flow at every internal node.

    Returns a dict keyed by node id, boundary nodes included.
    """
    _check_grounded(network)
    model = LinearModel(network)
    p = _powers(network, heater_powers)
    rhs = model.boundary_flow + model.source_matrix @ p
    try:
        T = np.linalg.solve(model.laplacian, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    temps = network.temperatures
    temps.update(zip(model.ids, (float(t) for t in T)))
    return temps


def calibrate_zone(power, steady_temp, ambient=25.0):
    """Loss conductance ``power / (steady_temp - ambient)`` of one zone."""
    if not power > 0:
        raise CalibrationError(f"calibration power must be > 0, got {power}")
    if not steady_temp > ambient:
        raise CalibrationError(
            f"steady temperature {steady_temp} must exceed ambient {ambient}"
        )
    return power / (steady_temp - ambient)


# ---------------------------------------------------------------------------
# Platform assembly
# ---------------------------------------------------------------------------


def heater_id(zone):
    return f"heater_{constants.ZONE_LABELS[zone]}"


def plate_id(zone):
    return f"plate_{constants.ZONE_LABELS[zone]}"


def copper_plate_capacity(length_mm, width_mm, thickness_mm):
    volume = length_mm * width_mm * thickness_mm * 1e-9
    return volume * constants.COPPER_DENSITY * constants.COPPER_SPECIFIC_HEAT


def sample_heat_capacity(volume_ul, oil_mass_ratio=1.0):
    """Heat capacity of the aqueous sample plus its mineral-oil overlay."""
    mass = volume_ul * 1e-9 * constants.WATER_DENSITY
    return mass * (
        constants.WATER_SPECIFIC_HEAT + oil_mass_ratio * constants.MINERAL_OIL_SPECIFIC_HEAT
    )


def _default_chamber_capacity():
    from .geometry import EtchSpec, chip_heat_capacity

    return chip_heat_capacity(EtchSpec())


@dataclass(frozen=True)
class PlantConfig:
    """Parameters of the three-zone heater plant.

    ``loss_conductances`` overrides calibration; otherwise each zone's loss
    is calibrated from ``calibration_powers`` and ``calibration_temps``.
    """

    ambient: float = 25.0
    plate_length_mm: float = 30.0
    plate_width_mm: float = 20.0
    plate_thickness_mm: float = 2.0
    calibration_powers: tuple[float, float, float] = (4.51, 1.35, 3.74)
    calibration_temps: tuple[float, float, float] = (95.0, 55.0, 72.0)
    loss_conductances: tuple[float, float, float] | None = None
    heater_capacity: float = 0.05
    heater_plate_conductance: float = 0.4
    contact_conductance: float = 0.04
    sample_conductance: float = 0.03
    gap_conductance: float = 3e-4
    inter_plate_conductance: float = 0.0
    chamber_capacity: float = field(default_factory=_default_chamber_capacity)
    sample_capacity: float = field(default_factory=lambda: sample_heat_capacity(1.0))

    def zone_losses(self):
        if self.loss_conductances is not None:
            return tuple(float(g) for g in self.loss_conductances)
        return tuple(
            calibrate_zone(p, t, self.ambient)
            for p, t in zip(self.calibration_powers, self.calibration_temps)
        )

    def plate_capacity(self):
        return copper_plate_capacity(
            self.plate_length_mm, self.plate_width_mm, self.plate_thickness_mm
        )

    def validate(self):
        for name in ("plate_length_mm", "plate_width_mm", "plate_thickness_mm",
                     "heater_capacity", "chamber_capacity", "sample_capacity"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("heater_plate_conductance", "contact_conductance",
                     "sample_conductance", "gap_conductance", "inter_plate_conductance"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        try:
            losses = self.zone_losses()
        except CalibrationError as exc:
            raise ConfigurationError(str(exc)) from exc
        if len(losses) != 3 or any(not g >= 0 for g in losses):
            raise ConfigurationError(f"need three non-negative loss conductances, got {losses}")
        return self


def _zone_parts(cfg, zone, loss):
    ta = cfg.ambient
    nodes = [
        ThermalNode(heater_id(zone), ta, cfg.heater_capacity),
        ThermalNode(plate_id(zone), ta, cfg.plate_capacity()),
    ]
    links = [
        ThermalLink(heater_id(zone), plate_id(zone), cfg.heater_plate_conductance),
        ThermalLink(plate_id(zone), AMBIENT, loss),
    ]
    return nodes, links, HeatSource(heater_id(zone))


def build_zone_network(plant_config: PlantConfig, zone: int):
    """A single heater/plate zone with its loss path, for tuning and calibration."""
    cfg = plant_config.validate()
    nodes, links, src = _zone_parts(cfg, zone, cfg.zone_losses()[zone])
    nodes.append(ThermalNode(AMBIENT, cfg.ambient, kind=BOUNDARY))
    return ThermalNetwork(tuple(nodes), tuple(links), (src,), cfg.ambient)


def build_platform_network(plant_config: PlantConfig | None = None, zone=0):
    """Assemble the full platform with the chamber resting on ``zone``.

    ``zone=None`` puts the chamber over a dead arc, coupled only to ambient.
    """
    cfg = (plant_config or PlantConfig()).validate()
    nodes, links, sources = [], [], []
    for z, loss in enumerate(cfg.zone_losses()):
        zn, zl, src = _zone_parts(cfg, z, loss)
        nodes += zn
        links += zl
        sources.append(src)
    if cfg.inter_plate_conductance > 0:
        for z in range(3):
            links.append(
                ThermalLink(plate_id(z), plate_id((z + 1) % 3), cfg.inter_plate_conductance)
            )
    nodes += [
        ThermalNode(CHAMBER, cfg.ambient, cfg.chamber_capacity),
        ThermalNode(SAMPLE, cfg.ambient, cfg.sample_capacity),
        ThermalNode(AMBIENT, cfg.ambient, kind=BOUNDARY),
    ]
    links.append(ThermalLink(CHAMBER, SAMPLE, cfg.sample_conductance))
    net = ThermalNetwork(tuple(nodes), tuple(links), tuple(sources), cfg.ambient)
    return bind_chamber(net, zone, cfg)


def bind_chamber(network: ThermalNetwork, zone, plant_config: PlantConfig):
    """Rebind the chamber contact link to the plate of ``zone`` (or ambient)."""
    kept = [
        l for l in network.links
        if not l.touches(CHAMBER) or l.touches(SAMPLE)
    ]
    if zone is None:
        kept.append(ThermalLink(CHAMBER, AMBIENT, plant_config.gap_conductance))
    else:
        kept.append(ThermalLink(CHAMBER, plate_id(zone), plant_config.contact_conductance))
    return network.with_links(kept)
