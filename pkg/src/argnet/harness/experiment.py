"""Parameter-grid sweeps with repetitions, reuse switches and parallel workers.

A sweep spec is a JSON file::

    {
      "name": "size-by-topology",
      "base": {"causal-structure": "big-net", "max-ticks": 25},
      "grid": {"number-of-agents": [10, 50], "social-network": ["complete", "small-world"]},
      "repetitions": 100,
      "master-seed": 2,
      "reuse": {"world": false, "social-network": false, "initial-evidence": false},
      "parallelism": 4
    }

Cells are the cartesian product of the grid with the first key outermost.
Run ``(cell, rep)`` draws from ``derive_rng(master_seed, cell, rep)``. With a
reuse switch on, repetitions ``1..R-1`` of a cell take that component from
repetition 0 of the same cell; reused components consume no draws. Every run
is thus a pure function of ``(spec, cell, rep)`` and can be re-run alone.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from ..engine import Reuse, SimConfig, run, setup
from ..telemetry import fmt, write_csv, write_outputs

log = logging.getLogger(__name__)

SPEC_SCHEMA = {
    "type": "object",
    "required": ["base"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "base": {"type": "object"},
        "grid": {
            "type": "object",
            "additionalProperties": {"type": "array", "minItems": 1},
        },
        "repetitions": {"type": "integer", "minimum": 1},
        "master-seed": {"type": "integer", "minimum": 0},
        "reuse": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "world": {"type": "boolean"},
                "social-network": {"type": "boolean"},
                "initial-evidence": {"type": "boolean"},
            },
        },
        "parallelism": {"type": "integer", "minimum": 1},
        "output": {"type": "string"},
        "run-outputs": {"type": "boolean"},
    },
}

AGGREGATE_FIELDS = [
    "run_id",
    "cell",
    "repetition",
    "tick",
    "mean_belief",
    "sd_belief",
    "min_belief",
    "max_belief",
    "n_for",
    "n_against",
    "optimal_posterior",
    "evidence_list",
    "neutral_point",
    "stop_reason",
]


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    base: SimConfig
    grid: dict[str, list] = field(default_factory=dict)
    repetitions: int = 1
    master_seed: int = 0
    reuse_world: bool = False
    reuse_graph: bool = False
    reuse_initial_evidence: bool = False
    parallelism: int = 1
    output: str | None = None
    run_outputs: bool = True
    name: str = "sweep"

    def __post_init__(self):
        if self.repetitions < 1:
            raise SpecError("repetitions must be at least 1")
        if self.parallelism < 1:
            raise SpecError("parallelism must be at least 1")
        for key, values in self.grid.items():
            if not values:
                raise SpecError(f"grid parameter {key!r} has no values")
        self.cell_configs()  # validates every cell

    @property
    def grid_keys(self) -> list[str]:
        return list(self.grid)

    def cells(self) -> list[dict]:
        keys = self.grid_keys
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]

    def cell_configs(self) -> list[SimConfig]:
        base = self.base.to_dict()
        base["seed"] = self.master_seed
        configs = []
        for cell in self.cells():
            data = dict(base)
            data.update(cell)
            try:
                configs.append(SimConfig.from_dict(data))
            except (TypeError, ValueError) as exc:
                raise SpecError(f"invalid cell {cell}: {exc}") from exc
        return configs

    @property
    def run_count(self) -> int:
        return len(self.cells()) * self.repetitions

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "base": self.base.to_dict(),
            "grid": {k: list(v) for k, v in self.grid.items()},
            "repetitions": self.repetitions,
            "master-seed": self.master_seed,
            "reuse": {
                "world": self.reuse_world,
                "social-network": self.reuse_graph,
                "initial-evidence": self.reuse_initial_evidence,
            },
            "parallelism": self.parallelism,
            "run-outputs": self.run_outputs,
        }
        if self.output is not None:
            out["output"] = self.output
        return out

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        try:
            jsonschema.validate(data, SPEC_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise SpecError(f"spec violates schema at {where}: {exc.message}") from None
        try:
            base = SimConfig.from_dict(data["base"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"invalid base config: {exc}") from exc
        reuse = data.get("reuse", {})
        return cls(
            base=base,
            grid={k: list(v) for k, v in data.get("grid", {}).items()},
            repetitions=data.get("repetitions", 1),
            master_seed=data.get("master-seed", base.seed),
            reuse_world=reuse.get("world", False),
            reuse_graph=reuse.get("social-network", False),
            reuse_initial_evidence=reuse.get("initial-evidence", False),
            parallelism=data.get("parallelism", 1),
            output=data.get("output"),
            run_outputs=data.get("run-outputs", True),
            name=data.get("name", "sweep"),
        )

    @classmethod
    def load(cls, path: str | Path) -> ExperimentSpec:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise SpecError(f"cannot read spec {path}: {exc.strerror or exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    @property
    def reuses(self) -> bool:
        return self.reuse_world or self.reuse_graph or self.reuse_initial_evidence


@dataclass
class RunOutcome:
    cell: int
    repetition: int
    run_id: str
    rows: list[list] = field(default_factory=list)
    # (network key, mask, value bits) -> beliefs observed, for the uniqueness audit.
    beliefs_by_knowledge: dict[tuple, set[float]] = field(default_factory=dict)
    error: str | None = None


# Per-process cache of repetition-0 setups, used as the source of reused parts.
_anchor_cache: dict[tuple, object] = {}


def _anchor(spec_key: str, config: SimConfig, cell: int):
    key = (spec_key, cell)
    sim = _anchor_cache.get(key)
    if sim is None:
        sim = setup(config, stream=(cell, 0))
        if len(_anchor_cache) > 32:
            _anchor_cache.clear()
        _anchor_cache[key] = sim
    return sim


def run_cell_repetition(spec: ExperimentSpec, cell: int, rep: int, out_dir: str | None = None) -> RunOutcome:
    """Execute one run of a sweep; errors are captured, not raised."""
    config = spec.cell_configs()[cell]
    outcome = RunOutcome(cell, rep, f"s{spec.master_seed}-c{cell}-r{rep}")
    try:
        reuse = None
        if rep > 0 and spec.reuses:
            anchor = _anchor(json.dumps(spec.to_dict(), sort_keys=True), config, cell)
            reuse = Reuse.from_simulation(anchor, spec.reuse_world, spec.reuse_graph, spec.reuse_initial_evidence)
        sim = setup(config, reuse, stream=(cell, rep))
        result = run(sim)
    except Exception as exc:  # recorded per run, the sweep carries on
        outcome.error = f"{type(exc).__name__}: {exc}"
        log.debug("run %s failed\n%s", outcome.run_id, traceback.format_exc())
        return outcome
    world = sim.world
    evidence = ";".join("1" if v else "0" for v in world.evidence_list)
    world_bits = sum(1 << i for i, v in enumerate(world.evidence_list) if v)
    neutral = sim.model.initial_belief
    net_key = (config.causal_structure, config.hypothesis_node, config.evidence_nodes)
    for record in result.ticks:
        beliefs = record.beliefs
        mean = math.fsum(beliefs) / len(beliefs)
        outcome.rows.append(
            [
                outcome.run_id, cell, rep, record.tick, mean, record.sd, min(beliefs), max(beliefs),
                record.n_for, record.n_against, world.optimal_posterior, evidence, neutral, result.stop_reason,
            ]
        )
        for mask, belief in zip(record.known_masks, beliefs):
            outcome.beliefs_by_knowledge.setdefault((net_key, mask, world_bits & mask), set()).add(belief)
    if out_dir is not None and spec.run_outputs:
        write_outputs(result, Path(out_dir) / "runs" / outcome.run_id)
    return outcome


def _run_batch(spec_dict: dict, tasks: list[tuple[int, int]], out_dir: str | None) -> list[RunOutcome]:
    spec = ExperimentSpec.from_dict(spec_dict)
    return [run_cell_repetition(spec, cell, rep, out_dir) for cell, rep in tasks]


@dataclass
class SweepResult:
    spec: ExperimentSpec
    outcomes: list[RunOutcome]
    uniqueness_violations: int

    @property
    def failures(self) -> list[RunOutcome]:
        return [o for o in self.outcomes if o.error is not None]

    def aggregate_rows(self) -> list[list]:
        """Aggregate rows in (cell, repetition, tick) order with grid columns spliced in."""
        cells = self.spec.cells()
        keys = self.spec.grid_keys
        rows = []
        for o in self.outcomes:
            params = [cells[o.cell][k] for k in keys]
            for row in o.rows:
                rows.append(row[:3] + params + row[3:])
        return rows

    def header(self) -> list[str]:
        return AGGREGATE_FIELDS[:3] + self.spec.grid_keys + AGGREGATE_FIELDS[3:]


def run_sweep(spec: ExperimentSpec, out_dir: str | Path | None = None, progress=None) -> SweepResult:
    """Run every (cell, repetition) and merge results in deterministic order.

    Work is split into contiguous batches; the merge order never depends on
    which worker finishes first, so any parallelism yields identical output.
    """
    out = str(out_dir) if out_dir is not None else spec.output
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
    tasks = [(c, r) for c in range(len(spec.cells())) for r in range(spec.repetitions)]
    outcomes: list[RunOutcome] = []
    if spec.parallelism == 1 or len(tasks) == 1:
        for cell, rep in tasks:
            outcomes.append(run_cell_repetition(spec, cell, rep, out))
            if progress:
                progress(len(outcomes), len(tasks))
    else:
        spec_dict = spec.to_dict()
        size = max(1, len(tasks) // (spec.parallelism * 4))
        batches = [tasks[i : i + size] for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            futures = [pool.submit(_run_batch, spec_dict, batch, out) for batch in batches]
            for future in futures:
                outcomes.extend(future.result())
                if progress:
                    progress(len(outcomes), len(tasks))
    merged: dict[tuple, set[float]] = {}
    for o in outcomes:
        for key, beliefs in o.beliefs_by_knowledge.items():
            merged.setdefault(key, set()).update(beliefs)
    violations = sum(1 for beliefs in merged.values() if len(beliefs) > 1)
    result = SweepResult(spec, outcomes, violations)
    if out is not None:
        write_sweep_outputs(result, out)
    return result


def write_sweep_outputs(result: SweepResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    write_csv(out / "aggregate.csv", result.header(), result.aggregate_rows())
    write_csv(
        out / "failures.csv",
        ["run_id", "cell", "repetition", "error"],
        ([o.run_id, o.cell, o.repetition, o.error] for o in result.failures),
    )
    summary = {
        "spec": result.spec.to_dict(),
        "runs": len(result.outcomes),
        "failed": len(result.failures),
        "uniqueness_violations": result.uniqueness_violations,
    }
    (out / "sweep.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_aggregate(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "AGGREGATE_FIELDS",
    "ExperimentSpec",
    "RunOutcome",
    "SpecError",
    "SweepResult",
    "fmt",
    "read_aggregate",
    "run_cell_repetition",
    "run_sweep",
]
