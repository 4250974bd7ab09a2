"""Seeded demand and attack-set generation for the small/large test groups.

Random streams come from numpy's PCG64 seeded through a ``SeedSequence``
whose spawn key names the purpose, so demand and attack sampling for one
seed are independent of each other and reproducible on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .model import AttackScenario, Demand, ProblemInstance, Topology

DEMAND_STREAM = 0
ATTACK_STREAM = 1

# group -> (total volume Gbps, bitrate range Gbps, attacks per node)
GROUPS = {
    "small": (1000, (50, 400), 1),
    "large": (40000, (50, 500), 3),
}
MIN_JAMMING_KM = 10.0


@dataclass(frozen=True)
class GenSpec:
    group: str
    seed: int
    x_km: float
    topology: Topology

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {sorted(GROUPS)}")
        if self.x_km < MIN_JAMMING_KM:
            raise ValueError(f"X must be >= {MIN_JAMMING_KM} km")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def generate_demands(spec: GenSpec) -> List[Demand]:
    """Random demands whose bitrates sum exactly to the group's volume.

    Endpoints are uniform over ordered distinct node pairs and bitrates are
    uniform integers over the group's range; the last demand is cut down to
    land on the target volume.
    """
    n = spec.topology.num_nodes
    if n < 2:
        raise ValueError("need at least two nodes")
    volume, (lo, hi), _ = GROUPS[spec.group]
    rng = rng_for(spec.seed, DEMAND_STREAM)
    demands: List[Demand] = []
    total = 0
    while total < volume:
        src = int(rng.integers(n))
        dst = int(rng.integers(n))
        while dst == src:
            dst = int(rng.integers(n))
        rate = int(rng.integers(lo, hi + 1))
        rate = min(rate, volume - total)
        demands.append(Demand(len(demands), src, dst, float(rate)))
        total += rate
    return demands


def generate_attacks(spec: GenSpec) -> List[AttackScenario]:
    """One attack per node (small) or 3|V| random targets (large).

    Destructive range is 0 km so only the target is destroyed; jamming
    ranges are uniform on [10, X] km.
    """
    n = spec.topology.num_nodes
    _, _, per_node = GROUPS[spec.group]
    rng = rng_for(spec.seed, ATTACK_STREAM)
    if spec.group == "small":
        targets = list(range(n))
    else:
        targets = [int(t) for t in rng.integers(n, size=per_node * n)]
    ranges = rng.uniform(MIN_JAMMING_KM, spec.x_km, size=len(targets))
    return [
        AttackScenario(i, t, 0.0, float(r)) for i, (t, r) in enumerate(zip(targets, ranges))
    ]


def make_instance(
    spec: GenSpec,
    num_paths: int = 1,
    num_bunkers: int = 0,
    num_slices: Optional[int] = None,
    c_spec: float = 0.5,
    c_res: float = 0.5,
) -> ProblemInstance:
    if num_slices is None:
        num_slices = DEFAULT_SLICES[spec.group]
    return ProblemInstance(
        spec.topology,
        tuple(generate_demands(spec)),
        tuple(generate_attacks(spec)),
        num_paths=num_paths,
        num_bunkers=num_bunkers,
        num_slices=num_slices,
        c_spec=c_spec,
        c_res=c_res,
    )


# large: peak usage on the bundled networks stays near 1000 slices at |P| = 4
DEFAULT_SLICES = {"small": 320, "large": 2000}
