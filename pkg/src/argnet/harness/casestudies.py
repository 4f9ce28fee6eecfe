"""Built-in experiment definitions for the two case studies.

Case study 1 (shift to extremity) crosses group size with topology on Big Net
or Asia. Case study 2 (convergence vs. scattering) compares the three sharing
rules on the Vole network. Asia and Vole are loaded from files; pass the path
with ``network_path``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..engine import SimConfig
from .experiment import ExperimentSpec

CASE1_GRID = {"number-of-agents": [10, 50, 100, 500], "social-network": ["complete", "small-world"]}
CASE2_GRID = {"share": ["random", "recent", "impact"]}
CASE2_TICK_LIMIT = 500


@dataclass(frozen=True)
class CaseStudyDefinition:
    name: str
    description: str
    needs_file: str | None = None

    def spec(self, network_path: str | None = None, parallelism: int = 1) -> ExperimentSpec:
        if self.needs_file and network_path is None:
            raise ValueError(f"case study {self.name!r} needs the {self.needs_file} network file (--network)")
        return _BUILDERS[self.name](network_path, parallelism)


def _case1(structure: str, parallelism: int) -> ExperimentSpec:
    base = SimConfig(
        causal_structure=structure,
        initial_draws=1,
        max_draws=1,
        share="random",
        chattiness=0.5,
        conviction_threshold=0.5,
        curiosity=0.0,
        k=2,
        rewiring_probability=0.2,
        hypothesis_probability=0.5,
        verbose=False,
        stop_at_full_information=False,
        max_ticks=25,
        seed=2,
    )
    return ExperimentSpec(base=base, grid=dict(CASE1_GRID), repetitions=100, master_seed=2,
                          parallelism=parallelism, run_outputs=False, name="case1")


def _case2(structure: str, social_network: str, parallelism: int) -> ExperimentSpec:
    base = SimConfig(
        causal_structure=structure,
        chattiness=0.5,
        conviction_threshold=0.0,
        curiosity=0.0,
        initial_draws=1,
        max_draws=1,
        social_network=social_network,
        k=2,
        rewiring_probability=0.2,
        number_of_agents=50,
        stop_at_full_information=True,
        max_ticks=CASE2_TICK_LIMIT,
        seed=2,
    )
    return ExperimentSpec(base=base, grid=dict(CASE2_GRID), repetitions=100, master_seed=2,
                          parallelism=parallelism, run_outputs=False, name=f"case2-{social_network}")


_BUILDERS = {
    "case1-bignet": lambda path, par: _case1("big-net", par),
    "case1-asia": lambda path, par: _case1(path, par),
    "case2-vole-complete": lambda path, par: _case2(path, "complete", par),
    "case2-vole-smallworld": lambda path, par: _case2(path, "small-world", par),
}

CASE_STUDIES = {
    "case1-bignet": CaseStudyDefinition("case1-bignet", "shift to extremity on Big Net, size x topology"),
    "case1-asia": CaseStudyDefinition("case1-asia", "shift to extremity on Asia, size x topology", "asia"),
    "case2-vole-complete": CaseStudyDefinition(
        "case2-vole-complete", "sharing rules on Vole, complete network", "vole"
    ),
    "case2-vole-smallworld": CaseStudyDefinition(
        "case2-vole-smallworld", "sharing rules on Vole, small-world network", "vole"
    ),
}


def case_study(name: str, network_path: str | None = None, parallelism: int = 1) -> ExperimentSpec:
    try:
        definition = CASE_STUDIES[name]
    except KeyError:
        raise ValueError(f"unknown case study {name!r}; choose from {sorted(CASE_STUDIES)}") from None
    return definition.spec(network_path, parallelism)
