"""Run configuration: a human-readable YAML file with a documented schema.

Every output row carries the seeds and budgets of the run, so a config plus
the package version fully reproduces any number in any table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from ..errors import ConfigError
from ..zoo import GraphSpec

_DEFAULT_BUDGETS = {
    "front_cap": 5_000_000,
    "collision_horizon": 2000,
    "second_moment_n": 0,      # 0 = skip the exact second-moment series
    "khas_horizon": 0,         # 0 = skip
}


@dataclass
class RunConfig:
    graph: GraphSpec
    law_kind: str = "gaussian"
    betas: List[float] = field(default_factory=lambda: [0.0])
    ns: List[int] = field(default_factory=lambda: [32])
    replicas: int = 200
    thetas: List[float] = field(default_factory=list)
    env_seed: int = 1
    budgets: dict = field(default_factory=lambda: dict(_DEFAULT_BUDGETS))
    ci_level: float = 0.99
    output_dir: Optional[str] = None

    def validate(self) -> "RunConfig":
        if not self.betas:
            raise ConfigError("betas grid must be non-empty")
        if not self.ns or any(n < 1 for n in self.ns):
            raise ConfigError("ns grid must be non-empty positive integers")
        if self.replicas < 2:
            raise ConfigError("replicas >= 2 required")
        if any(b < 0 for b in self.betas):
            raise ConfigError("betas must be >= 0 in scans")
        if any(not 0 < t < 1 for t in self.thetas):
            raise ConfigError("thetas must lie in (0, 1)")
        if not 0.5 < self.ci_level < 1.0:
            raise ConfigError("ci_level in (0.5, 1)")
        for key in self.budgets:
            if key not in _DEFAULT_BUDGETS:
                raise ConfigError(f"unknown budget {key!r}")
        return self

    def describe(self) -> dict:
        return {
            "graph": self.graph.describe(),
            "law": self.law_kind,
            "betas": list(self.betas),
            "ns": list(self.ns),
            "replicas": self.replicas,
            "thetas": list(self.thetas),
            "env_seed": self.env_seed,
            "budgets": dict(self.budgets),
            "ci_level": self.ci_level,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if "graph" not in raw or "family" not in raw.get("graph", {}):
            raise ConfigError("config needs graph.family")
        graph = GraphSpec(raw["graph"]["family"], dict(raw["graph"].get("params", {})))
        budgets = dict(_DEFAULT_BUDGETS)
        budgets.update(raw.get("budgets", {}))
        cfg = cls(
            graph=graph,
            law_kind=raw.get("law", {}).get("kind", "gaussian")
            if isinstance(raw.get("law"), dict)
            else raw.get("law", "gaussian"),
            betas=[float(b) for b in raw.get("betas", [0.0])],
            ns=[int(n) for n in raw.get("ns", [32])],
            replicas=int(raw.get("replicas", 200)),
            thetas=[float(t) for t in raw.get("thetas", [])],
            env_seed=int(raw.get("env_seed", 1)),
            budgets=budgets,
            ci_level=float(raw.get("ci_level", 0.99)),
            output_dir=raw.get("output_dir"),
        )
        return cfg.validate()

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        import yaml

        with open(path) as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a mapping")
        return cls.from_dict(raw)
