"""Label sweep runs as ``for``/``against`` the hypothesis."""

from __future__ import annotations

RULES = ("initial-lean", "valence")
REQUIRED = ("run_id", "tick", "mean_belief", "optimal_posterior", "neutral_point")


def _tick0_rows(rows: list[dict]) -> dict[str, dict]:
    if rows:
        missing = [c for c in REQUIRED if c not in rows[0]]
        if missing:
            raise ValueError(f"aggregate is missing columns {missing}")
    return {r["run_id"]: r for r in rows if int(r["tick"]) == 0}


def _side(value: float, neutral: float) -> str:
    if value > neutral:
        return "for"
    if value < neutral:
        return "against"
    return "neutral"


def run_labels(rows: list[dict], rule: str) -> dict[str, str]:
    """Map run id to label; runs excluded under the rule are absent.

    ``initial-lean`` compares the tick-0 mean belief with the neutral point
    (the hypothesis marginal). ``valence`` compares the optimal posterior with
    it and drops runs that sit exactly on it or whose posterior is undefined.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; choose from {RULES}")
    labels = {}
    for run_id, row in _tick0_rows(rows).items():
        neutral = float(row["neutral_point"])
        if rule == "initial-lean":
            labels[run_id] = _side(float(row["mean_belief"]), neutral)
        else:
            if row["optimal_posterior"] in ("", None):
                continue
            side = _side(float(row["optimal_posterior"]), neutral)
            if side != "neutral":
                labels[run_id] = side
    return labels


def classify_runs(rows: list[dict], rule: str) -> list[dict]:
    """Return the aggregate rows of labeled runs with a ``label`` column added."""
    labels = run_labels(rows, rule)
    return [dict(r, label=labels[r["run_id"]]) for r in rows if r["run_id"] in labels]
