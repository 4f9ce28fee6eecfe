"""Run orchestration: setup, the tick loop, stop conditions and seeding.

Random numbers come from one stream per run, derived from the master seed
and the run's (cell, repetition) position by :func:`derive_rng`. Setup draws
the hypothesis, the evidence values, the graph (small-world only) and the
initial evidence, in that order. Each tick then draws, in order, an optional
agent permutation, a ``(N, 2)`` block for the inquiry phase and a ``(N, 3)``
block for the sharing phase; row ``a`` of each block belongs to agent ``a``.
Drawing fixed-size blocks keeps the stream aligned no matter which agents act,
so the compiled kernel and the Python path consume identical numbers.
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .agents import (
    SHARE_RULES,
    AgentState,
    BeliefModel,
    DispositionConfig,
    collect_evidence,
    compute_posterior,
    new_agent,
    receive_share,
    select_share,
    should_inquire,
    should_share,
    conviction_bounds,
)
from .bayesnet import ROW_TOLERANCE, NetworkDefinition, ZeroProbabilityEvidence, load_network, make_roles, preset, PRESETS
from .socialnet import Graph, TopologyConfig, generate, neighbors
from .telemetry import RunResult, TickRecord, make_tick_record, transmission_rows
from .world import SAMPLING_MODES, WorldState, build_world

try:
    from . import _tick as _kernel
except ImportError:  # pragma: no cover - depends on the build
    _kernel = None

log = logging.getLogger(__name__)

DEFAULT_TICK_CAP = 1_000_000
SCHEDULES = ("ascending", "shuffle")
_RULE_CODES = {"random": 0, "impact": 1, "recent": 2}


def default_backend() -> str:
    """``compiled`` when the kernel is importable, unless ``ARGNET_BACKEND=python``."""
    if os.environ.get("ARGNET_BACKEND", "").lower() == "python" or _kernel is None:
        return "python"
    return "compiled"


def kernel_available() -> bool:
    return _kernel is not None


class SimulationError(RuntimeError):
    """A run hit a zero-probability evidence combination."""

    def __init__(self, agent_id: int, evidence: dict, tick: int):
        self.agent_id = agent_id
        self.evidence = evidence
        self.tick = tick
        super().__init__(
            f"agent {agent_id} holds an evidence set of probability zero at tick {tick}: {evidence}"
        )


@dataclass(frozen=True)
class SimConfig:
    """All global parameters of a run. Field names mirror the CLI flags."""

    causal_structure: str = "big-net"
    hypothesis_node: str | None = None
    evidence_nodes: tuple[str, ...] | None = None
    hypothesis_probability: float = 0.5
    number_of_agents: int = 50
    social_network: str = "complete"
    k: int = 2
    rewiring_probability: float = 0.2
    share: str = "random"
    chattiness: float = 0.5
    curiosity: float = 0.0
    conviction_threshold: float = 0.0
    initial_draws: int = 1
    max_draws: int = 1
    recency_top_probability: float = 0.9
    max_ticks: int = 25
    stop_at_max_ticks: bool = True
    stop_at_full_information: bool = False
    tick_cap: int = DEFAULT_TICK_CAP
    seed: int = 0
    evidence_sampling: str = "marginal"
    schedule: str = "ascending"
    row_tolerance: float = ROW_TOLERANCE
    verbose: bool = False

    def __post_init__(self):
        if self.evidence_nodes is not None and not isinstance(self.evidence_nodes, tuple):
            object.__setattr__(self, "evidence_nodes", tuple(self.evidence_nodes))
        if self.number_of_agents < 1:
            raise ValueError("number-of-agents must be at least 1")
        if not 0.0 <= self.hypothesis_probability <= 1.0:
            raise ValueError("hypothesis-probability must be in [0, 1]")
        if self.max_ticks < 0:
            raise ValueError("max-ticks must be non-negative")
        if self.tick_cap < 0:
            raise ValueError("tick-cap must be non-negative")
        if self.initial_draws < 0 or self.initial_draws > self.max_draws:
            raise ValueError("initial-draws must be between 0 and max-draws")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.share not in SHARE_RULES:
            raise ValueError(f"unknown share rule {self.share!r}; choose from {SHARE_RULES}")
        if self.evidence_sampling not in SAMPLING_MODES:
            raise ValueError(f"unknown evidence sampling {self.evidence_sampling!r}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; choose from {SCHEDULES}")
        if (self.hypothesis_node is None) != (self.evidence_nodes is None):
            raise ValueError("custom roles need both a hypothesis node and evidence nodes")
        self.disposition()
        self.topology().validate(self.number_of_agents)

    def disposition(self) -> DispositionConfig:
        return DispositionConfig(
            chattiness=self.chattiness,
            curiosity=self.curiosity,
            conviction_threshold=self.conviction_threshold,
            share_rule=self.share,
            max_draws=self.max_draws,
            recency_top_probability=self.recency_top_probability,
        )

    def topology(self) -> TopologyConfig:
        return TopologyConfig(self.social_network, self.k, self.rewiring_probability)

    def to_dict(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            out[key.replace("_", "-")] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> SimConfig:
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ValueError(f"unknown configuration key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    def with_changes(self, **changes) -> SimConfig:
        return replace(self, **changes)


_network_cache: dict[tuple, NetworkDefinition] = {}
_network_lock = threading.Lock()


def resolve_network(config: SimConfig) -> NetworkDefinition:
    """Load the configured network once per process and apply custom roles.

    Caching matters beyond speed: inference results are memoized per network
    object, so runs sharing a network share the cache.
    """
    source = config.causal_structure
    if source not in PRESETS:
        source = str(Path(source).resolve())
    key = (source, config.row_tolerance, config.hypothesis_node, config.evidence_nodes)
    with _network_lock:
        net = _network_cache.get(key)
        if net is None:
            net = preset(source) if source in PRESETS else load_network(source, config.row_tolerance)
            if config.hypothesis_node is not None:
                net = net.with_roles(make_roles(net, config.hypothesis_node, list(config.evidence_nodes)))
            if net.roles is None:
                raise ValueError(
                    f"network {net.name!r} has no hypothesis/evidence roles; "
                    "pass a hypothesis node and evidence nodes"
                )
            _network_cache[key] = net
    return net


def derive_rng(master_seed: int, cell: int = 0, repetition: int = 0) -> np.random.Generator:
    """Independent stream for one run: PCG64 seeded by ``SeedSequence(master, spawn_key=(cell, rep))``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(cell, repetition))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Reuse:
    """Components carried over from a previous simulation."""

    world: WorldState | None = None
    model: BeliefModel | None = None
    graph: Graph | None = None
    initial_evidence: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def from_simulation(cls, sim: Simulation, world: bool, graph: bool, initial_evidence: bool) -> Reuse:
        return cls(
            world=sim.world if world else None,
            model=sim.model if world else None,
            graph=sim.graph if graph else None,
            initial_evidence=sim.initial_evidence if initial_evidence else None,
        )

    @property
    def empty(self) -> bool:
        return self.world is None and self.graph is None and self.initial_evidence is None


class _Packed:
    """Array form of the agent population used by the compiled kernel."""

    def __init__(self, agents: list[AgentState], world: WorldState):
        n_agents, n = len(agents), world.n
        self.masks = np.zeros(n_agents, dtype=np.int64)
        self.draws = np.zeros(n_agents, dtype=np.int64)
        self.stamps = np.zeros((n_agents, n), dtype=np.int64)
        self.beliefs = np.zeros(n_agents, dtype=np.float64)
        top = 0
        for a, agent in enumerate(agents):
            for i, v in agent.known.items():
                if v != world.evidence_list[i]:
                    raise ValueError(f"agent {a} holds a value for evidence {i} that contradicts the world")
                self.masks[a] |= 1 << i
            for pos, i in enumerate(agent.recency_list, start=1):
                self.stamps[a, i] = pos
            top = max(top, len(agent.recency_list))
            self.draws[a] = agent.draws_used
            self.beliefs[a] = agent.belief
        self.counter = np.array([top], dtype=np.int64)

    def unpack(self, model: BeliefModel) -> list[AgentState]:
        agents = []
        world = model.world
        for a in range(len(self.masks)):
            m = int(self.masks[a])
            bits = [i for i in range(world.n) if m >> i & 1]
            agents.append(
                AgentState(
                    id=a,
                    initial_belief=model.initial_belief,
                    belief=float(self.beliefs[a]),
                    known={i: world.evidence_list[i] for i in bits},
                    update_list={i: float(model.updates[i]) for i in bits},
                    recency_list=sorted(bits, key=lambda i: self.stamps[a, i]),
                    draws_used=int(self.draws[a]),
                )
            )
        return agents


class _Slots:
    """Feeds one agent's pre-drawn uniforms to the agent operations."""

    __slots__ = ("_row", "_pos")

    def __init__(self, row: np.ndarray):
        self._row = row
        self._pos = 0

    def random(self) -> float:
        value = float(self._row[self._pos])
        self._pos += 1
        return value


class Simulation:
    """Mutable state of one run.

    With the compiled backend the agent population lives in arrays between
    ticks; :attr:`agents` materializes :class:`AgentState` objects on demand,
    and edits to them are packed back before the next tick.
    """

    def __init__(self, config: SimConfig, network: NetworkDefinition, world: WorldState, model: BeliefModel,
                 graph: Graph, rng: np.random.Generator, stream: tuple[int, int], backend: str):
        self.config = config
        self.network = network
        self.world = world
        self.model = model
        self.graph = graph
        self.rng = rng
        self.stream = stream
        self.disposition = config.disposition()
        self.tick = 0
        self.records: list[TickRecord] = []
        self.transmissions = []
        self.initial_evidence: tuple[tuple[int, ...], ...] = ()
        self.evidence_names = list(world.roles.evidence_nodes)
        self.lower, self.upper = conviction_bounds(model.initial_belief, config.conviction_threshold)
        if backend not in ("python", "compiled"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "compiled" and (_kernel is None or model.table is None):
            backend = "python"
        self.backend = backend
        self._agents: list[AgentState] | None = None
        self._packed: _Packed | None = None
        self._stale = False
        self._csr = graph.csr()

    @property
    def run_id(self) -> str:
        cell, rep = self.stream
        return f"s{self.config.seed}-c{cell}-r{rep}"

    @property
    def agents(self) -> list[AgentState]:
        if self._agents is None:
            self._agents = self._packed.unpack(self.model)
        self._stale = self._packed is not None
        return self._agents

    def belief_vector(self) -> np.ndarray:
        if self._packed is not None and not self._stale:
            return self._packed.beliefs.copy()
        return np.array([a.belief for a in self._agents], dtype=np.float64)

    def mask_vector(self) -> np.ndarray:
        if self._packed is not None and not self._stale:
            return self._packed.masks.copy()
        return np.array([a.mask for a in self._agents], dtype=np.int64)

    def all_informed(self) -> bool:
        full = (1 << self.world.n) - 1
        return bool(np.all(self.mask_vector() == full))

    def stop_reason(self) -> str | None:
        c = self.config
        if c.stop_at_full_information and self.all_informed():
            return "full-information"
        if c.stop_at_max_ticks and self.tick >= c.max_ticks:
            return "max-ticks"
        if self.tick >= c.tick_cap:
            return "tick-cap"
        return None

    def manifest(self, stop_reason: str | None) -> dict:
        cell, rep = self.stream
        return {
            "run_id": self.run_id,
            "version": __version__,
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "cell": cell,
            "repetition": rep,
            "network": {"name": self.network.name, "nodes": len(self.network.nodes), "arcs": len(self.network.arcs)},
            "world": self.world.to_dict(),
            "initial_belief": self.model.initial_belief,
            "graph": {"agent_count": self.graph.agent_count, "edges": self.graph.edge_list()},
            "stop_reason": stop_reason,
            "ticks": self.tick,
        }

    def result(self) -> RunResult:
        reason = self.stop_reason() or "not-stopped"
        return RunResult(
            manifest=self.manifest(reason),
            ticks=list(self.records),
            transmissions=list(self.transmissions),
            optimal_posterior=self.world.optimal_posterior,
            stop_reason=reason,
        )

    def _record(self, uttered, sent, novel) -> TickRecord:
        record = make_tick_record(self.tick, self.belief_vector(), self.model.initial_belief, self.mask_vector())
        self.records.append(record)
        self.transmissions.extend(transmission_rows(self.tick, self.evidence_names, uttered, sent, novel))
        if self.config.verbose:
            log.info("tick %d: mean belief %.6f (sd %.6f)", self.tick, record.mean, record.sd)
        return record


def _zero_error(model: BeliefModel, agent_id: int, mask: int, tick: int) -> SimulationError:
    return SimulationError(agent_id, model.evidence_of_mask(mask), tick)


def setup(
    config: SimConfig,
    reuse: Reuse | None = None,
    stream: tuple[int, int] = (0, 0),
    backend: str | None = None,
) -> Simulation:
    """Initialize a run: world, graph, agents and their initial evidence."""
    reuse = reuse or Reuse()
    net = resolve_network(config)
    rng = derive_rng(config.seed, *stream)
    if reuse.world is not None:
        if reuse.world.network is not net:
            raise ValueError("reused world belongs to a different network")
        world = reuse.world
        model = reuse.model if reuse.model is not None and reuse.model.world is world else BeliefModel(world)
    else:
        world = build_world(net, config.hypothesis_probability, rng, config.evidence_sampling)
        model = BeliefModel(world)
    if config.initial_draws > world.n:
        raise ValueError(f"initial-draws {config.initial_draws} exceeds the {world.n} evidence nodes")
    if reuse.graph is not None:
        if reuse.graph.agent_count != config.number_of_agents:
            raise ValueError("reused graph has a different number of agents")
        graph = reuse.graph
    else:
        graph = generate(config.topology(), config.number_of_agents, rng)

    sim = Simulation(config, net, world, model, graph, rng, stream, backend or default_backend())
    agents = [new_agent(a, model) for a in range(config.number_of_agents)]
    drawn: list[tuple[int, ...]] = []
    for agent in agents:
        try:
            if reuse.initial_evidence is not None:
                if len(reuse.initial_evidence) != len(agents):
                    raise ValueError("reused initial evidence has a different number of agents")
                picks = tuple(reuse.initial_evidence[agent.id])
                for idx in picks:
                    if not 0 <= idx < world.n:
                        raise ValueError(f"reused initial evidence index {idx} is out of range")
                    agent.known[idx] = world.evidence_list[idx]
                    agent.draws_used += 1
                    agent.recency_list.append(idx)
                    compute_posterior(agent, idx, model)
            else:
                picks = tuple(collect_evidence(agent, world, model, rng) for _ in range(config.initial_draws))
        except ZeroProbabilityEvidence:
            raise _zero_error(model, agent.id, agent.mask, 0) from None
        drawn.append(picks)
    sim.initial_evidence = tuple(drawn)
    sim._agents = agents
    zeros = np.zeros(world.n, dtype=np.int64)
    sim._record(zeros, zeros, zeros)
    return sim


def _draw_tick(sim: Simulation):
    n_agents = sim.config.number_of_agents
    if sim.config.schedule == "shuffle":
        order = sim.rng.permutation(n_agents).astype(np.int64)
    else:
        order = np.arange(n_agents, dtype=np.int64)
    u1 = sim.rng.random((n_agents, 2))
    u2 = sim.rng.random((n_agents, 3))
    return order, u1, u2


def _step_python(sim: Simulation, order, u1, u2, uttered, sent, novel) -> None:
    if sim._agents is None:
        sim._agents = sim._packed.unpack(sim.model)
    sim._packed = None
    sim._stale = False
    agents, world, model, disp = sim._agents, sim.world, sim.model, sim.disposition
    tick = sim.tick + 1
    for a in order:
        agent = agents[a]
        slots = _Slots(u1[a])
        if should_inquire(agent, disp, world, slots):
            try:
                collect_evidence(agent, world, model, slots)
            except ZeroProbabilityEvidence:
                raise _zero_error(model, agent.id, agent.mask, tick) from None
    for a in order:
        agent = agents[a]
        slots = _Slots(u2[a])
        if not should_share(agent, disp, slots):
            continue
        idx = select_share(agent, disp, slots)
        uttered[idx] += 1
        value = world.evidence_list[idx]
        for j in neighbors(sim.graph, agent.id):
            sent[idx] += 1
            receiver = agents[j]
            try:
                if receive_share(receiver, idx, value, model):
                    novel[idx] += 1
            except ZeroProbabilityEvidence:
                raise _zero_error(model, receiver.id, receiver.mask, tick) from None


def _step_compiled(sim: Simulation, order, u1, u2, uttered, sent, novel) -> None:
    if sim._packed is None or sim._stale:
        sim._packed = _Packed(sim._agents, sim.world)
        sim._stale = False
    sim._agents = None
    p, disp, model = sim._packed, sim.disposition, sim.model
    indptr, indices = sim._csr
    status, agent_id, mask = _kernel.tick(
        p.masks, p.draws, p.stamps, p.counter, p.beliefs,
        model.table, model.updates, indptr, indices, order, u1, u2,
        sim.world.n, disp.max_draws, disp.curiosity, disp.chattiness,
        sim.lower, sim.upper, model.initial_belief, _RULE_CODES[disp.share_rule],
        disp.recency_top_probability, uttered, sent, novel,
    )
    if status != 0:
        raise _zero_error(model, int(agent_id), int(mask), sim.tick + 1)


def step(sim: Simulation) -> TickRecord:
    """Advance one tick: inquiry phase, then sharing phase, then record."""
    order, u1, u2 = _draw_tick(sim)
    n = sim.world.n
    uttered = np.zeros(n, dtype=np.int64)
    sent = np.zeros(n, dtype=np.int64)
    novel = np.zeros(n, dtype=np.int64)
    if sim.backend == "compiled":
        _step_compiled(sim, order, u1, u2, uttered, sent, novel)
    else:
        _step_python(sim, order, u1, u2, uttered, sent, novel)
    sim.tick += 1
    return sim._record(uttered, sent, novel)


def run(sim: Simulation) -> RunResult:
    """Step until a stop condition holds and return the telemetry."""
    while sim.stop_reason() is None:
        step(sim)
    return sim.result()


def run_config(config: SimConfig, reuse: Reuse | None = None, stream: tuple[int, int] = (0, 0),
               backend: str | None = None) -> tuple[Simulation, RunResult]:
    sim = setup(config, reuse, stream, backend)
    return sim, run(sim)
