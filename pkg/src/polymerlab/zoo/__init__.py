"""Constructors for every graph/walk pair in the laboratory."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError
from ..graph_core import RootedGraph
from .canopy import Canopy
from .explicit import ExplicitFinite
from .gasket import SierpinskiGasket
from .gw import GWTree
from .lattice import HalfLattice, Lattice
from .percolation import PercolationCluster
from .pipes import PipesLattice
from .ray_tree import DoubleExpRayTree
from .segment import ConductanceSegment
from .t2z2 import T2TimesZ2


def make_lattice(d: int, half: bool = False) -> RootedGraph:
    return HalfLattice(d) if half else Lattice(d)


def make_percolation_cluster(
    d: int, p: float, box_side: int, graph_seed: int, **kw
) -> PercolationCluster:
    return PercolationCluster(d, p, box_side, graph_seed, **kw)


def make_gw_tree(
    offspring, lam: float, graph_seed: int, survival_depth: Optional[int] = None
) -> GWTree:
    return GWTree(offspring, lam, graph_seed, survival_depth)


def make_canopy(d: int, lam: float) -> Canopy:
    return Canopy(d, lam)


def make_pipes_lattice(d: int) -> PipesLattice:
    return PipesLattice(d)


def make_double_exp_ray_tree() -> DoubleExpRayTree:
    return DoubleExpRayTree()


def make_t2_times_z2() -> T2TimesZ2:
    return T2TimesZ2()


def make_sierpinski_gasket(levels: int) -> SierpinskiGasket:
    return SierpinskiGasket(levels)


def make_conductance_segment(length: Optional[int], gamma: float) -> ConductanceSegment:
    return ConductanceSegment(length, gamma)


@dataclass
class GraphSpec:
    """Tagged record naming a graph family and its parameters (config form)."""

    family: str
    params: dict = field(default_factory=dict)

    def build(self) -> RootedGraph:
        try:
            ctor = _FAMILIES[self.family]
        except KeyError:
            raise ConfigError(
                f"unknown graph family {self.family!r}; have {sorted(_FAMILIES)}"
            ) from None
        try:
            return ctor(**self.params)
        except TypeError as exc:
            raise ConfigError(f"bad params for {self.family}: {exc}") from None

    def describe(self) -> dict:
        return {"family": self.family, **self.params}


def _gw_from_config(offspring, lam, graph_seed, survival_depth=None):
    law = {int(k): float(v) for k, v in dict(offspring).items()}
    return make_gw_tree(law, lam, graph_seed, survival_depth)


_FAMILIES = {
    "lattice": make_lattice,
    "half_lattice": lambda d: make_lattice(d, half=True),
    "percolation": make_percolation_cluster,
    "gw_tree": _gw_from_config,
    "canopy": make_canopy,
    "pipes_lattice": make_pipes_lattice,
    "double_exp_ray_tree": make_double_exp_ray_tree,
    "t2_times_z2": make_t2_times_z2,
    "sierpinski_gasket": make_sierpinski_gasket,
    "conductance_segment": make_conductance_segment,
    "explicit_finite": ExplicitFinite,
}

__all__ = [
    "Canopy",
    "ConductanceSegment",
    "DoubleExpRayTree",
    "ExplicitFinite",
    "GWTree",
    "GraphSpec",
    "HalfLattice",
    "Lattice",
    "PercolationCluster",
    "PipesLattice",
    "SierpinskiGasket",
    "T2TimesZ2",
    "make_canopy",
    "make_conductance_segment",
    "make_double_exp_ray_tree",
    "make_gw_tree",
    "make_lattice",
    "make_percolation_cluster",
    "make_pipes_lattice",
    "make_sierpinski_gasket",
    "make_t2_times_z2",
]
