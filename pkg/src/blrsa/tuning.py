"""Recommended 1S-RSA candidate counts per network, policy and weights."""

from __future__ import annotations

from .vulnerability import BunkerPolicy

FALLBACK_LAMBDA = 30

_POLICY_ORDER = (
    BunkerPolicy.ADAPTIVE_AVG,
    BunkerPolicy.ADAPTIVE_MAX,
    BunkerPolicy.AVG_NEIGHBOUR,
    BunkerPolicy.MIN_NEIGHBOUR,
    BunkerPolicy.NODAL_DEGREE,
)
_TOPOLOGIES = ("pl12", "dt14", "euro16")

# c_spec -> one "PL12/DT14/Euro16" cell per policy in _POLICY_ORDER
_TABLE = {
    1.0: ("30/30/30", "30/30/30", "30/30/30", "30/30/30", "30/30/30"),
    0.9: ("30/30/25", "30/30/25", "30/30/25", "30/30/25", "30/30/25"),
    0.8: ("30/30/25", "30/30/25", "30/30/25", "30/30/25", "30/30/25"),
    0.7: ("30/30/25", "30/30/25", "30/30/25", "30/30/25", "30/30/25"),
    0.6: ("30/30/15", "30/30/25", "30/30/15", "30/30/25", "30/30/25"),
    0.5: ("30/30/5", "30/30/5", "30/30/5", "30/30/5", "30/30/15"),
    0.4: ("30/30/5", "30/30/5", "30/30/5", "30/30/5", "30/30/5"),
    0.3: ("30/30/5", "30/20/5", "30/30/5", "30/30/5", "30/25/5"),
    0.2: ("30/30/5", "30/5/5", "30/20/5", "30/5/5", "30/20/5"),
    0.1: ("30/5/5", "30/5/5", "30/5/5", "30/5/5", "30/5/5"),
    0.0: ("30/5/5", "30/5/5", "30/5/5", "30/5/5", "30/5/5"),
}

RECOMMENDED_LAMBDA = {
    (topo, policy, c_spec): int(cells[p].split("/")[t])
    for c_spec, cells in _TABLE.items()
    for p, policy in enumerate(_POLICY_ORDER)
    for t, topo in enumerate(_TOPOLOGIES)
}


def recommended_lambda(topology_name: str, policy, c_spec: float) -> int:
    """Tuned lambda for a bundled network, else :data:`FALLBACK_LAMBDA`."""
    key = (
        str(topology_name).lower(),
        BunkerPolicy.parse(policy),
        round(float(c_spec), 1),
    )
    if abs(key[2] - float(c_spec)) > 1e-9:
        return FALLBACK_LAMBDA
    return RECOMMENDED_LAMBDA.get(key, FALLBACK_LAMBDA)
