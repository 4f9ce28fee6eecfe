"""Per-tick records and the CSV/JSON output files.

Counter semantics: ``uttered`` counts agents that selected a piece in the
sharing phase, ``sent_to`` counts deliveries (one per neighbour of each
sharer, so one agent can be counted twice in a tick), and
``received_as_novel`` counts deliveries that taught the receiver something new.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOAT_FORMAT = ".17g"


@dataclass(frozen=True)
class TickRecord:
    tick: int
    beliefs: tuple[float, ...]
    mean: float
    sd: float
    n_for: int
    n_against: int
    n_neutral: int
    known_masks: tuple[int, ...] = ()


@dataclass(frozen=True)
class TransmissionCounter:
    tick: int
    evidence_index: int
    evidence_name: str
    uttered: int
    sent_to: int
    received_as_novel: int


@dataclass
class RunResult:
    manifest: dict
    ticks: list[TickRecord]
    transmissions: list[TransmissionCounter]
    optimal_posterior: float | None
    stop_reason: str

    @property
    def run_id(self) -> str:
        return self.manifest["run_id"]

    def mean_series(self) -> list[float]:
        return [r.mean for r in self.ticks]


def make_tick_record(tick: int, beliefs: np.ndarray, initial_belief: float, masks=()) -> TickRecord:
    beliefs = np.asarray(beliefs, dtype=np.float64)
    return TickRecord(
        tick=tick,
        beliefs=tuple(float(b) for b in beliefs),
        mean=float(np.mean(beliefs)),
        sd=float(np.std(beliefs)),
        n_for=int(np.count_nonzero(beliefs > initial_belief)),
        n_against=int(np.count_nonzero(beliefs < initial_belief)),
        n_neutral=int(np.count_nonzero(beliefs == initial_belief)),
        known_masks=tuple(int(m) for m in masks),
    )


def record_tick(sim) -> TickRecord:
    """Snapshot the simulation's current beliefs into a :class:`TickRecord`."""
    return make_tick_record(sim.tick, sim.belief_vector(), sim.model.initial_belief, sim.mask_vector())


def transmission_rows(tick: int, names, uttered, sent, novel) -> list[TransmissionCounter]:
    return [
        TransmissionCounter(tick, i, name, int(uttered[i]), int(sent[i]), int(novel[i]))
        for i, name in enumerate(names)
    ]


def fmt(value) -> str:
    """Format a CSV cell; floats keep 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_outputs(result: RunResult, directory: str | Path) -> list[Path]:
    """Write beliefs.csv, transmissions.csv, summary.csv and manifest.json."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    run_id = result.run_id
    paths = [out / "beliefs.csv", out / "transmissions.csv", out / "summary.csv", out / "manifest.json"]
    write_csv(
        paths[0],
        ["run_id", "tick", "agent_id", "belief"],
        ((run_id, r.tick, a, b) for r in result.ticks for a, b in enumerate(r.beliefs)),
    )
    write_csv(
        paths[1],
        ["run_id", "tick", "evidence_name", "uttered", "sent_to", "received_as_novel"],
        ((run_id, t.tick, t.evidence_name, t.uttered, t.sent_to, t.received_as_novel) for t in result.transmissions),
    )
    write_csv(
        paths[2],
        ["run_id", "tick", "mean", "sd", "n_for", "n_against"],
        ((run_id, r.tick, r.mean, r.sd, r.n_for, r.n_against) for r in result.ticks),
    )
    try:
        paths[3].write_text(manifest_json(result.manifest), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {paths[3]}: {exc.strerror or exc}") from exc
    return paths
