"""Shared builders for tiny deterministic test instances."""

import numpy as np

from blrsa.model import AttackScenario, Demand, Link, Node, ProblemInstance, Topology, haversine_km

KM_PER_DEG_EQ = 6371.0 * np.pi / 180.0


def equator_line(spacing_km=100.0, n=3):
    """Nodes on the equator ``spacing_km`` apart, bidirectional chain links."""
    nodes = [Node(i, f"N{i + 1}", 0.0, i * spacing_km / KM_PER_DEG_EQ) for i in range(n)]
    links = []
    for i in range(n - 1):
        links.append(Link(len(links), i, i + 1, spacing_km))
        links.append(Link(len(links), i + 1, i, spacing_km))
    return Topology(nodes, links, name=f"line{n}")


def topology_from_edges(coords, edges, name="custom"):
    """Bidirectional topology; ``edges`` are ``(u, v, km)`` or ``(u, v)`` (geodesic)."""
    nodes = [Node(i, f"N{i}", lat, lon) for i, (lat, lon) in enumerate(coords)]
    links = []
    for edge in edges:
        u, v = edge[0], edge[1]
        km = edge[2] if len(edge) > 2 else max(1.0, round(haversine_km(*coords[u], *coords[v])))
        links.append(Link(len(links), u, v, float(km)))
        links.append(Link(len(links), v, u, float(km)))
    return Topology(nodes, links, name=name)


def random_topology(rng, n):
    coords = [(float(rng.uniform(50.0, 52.0)), float(rng.uniform(17.0, 20.0))) for _ in range(n)]
    order = list(rng.permutation(n))
    edges = set()
    for k in range(1, n):
        u = int(order[k])
        v = int(order[int(rng.integers(k))])
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < 0.3:
                edges.add((u, v))
    out = []
    for u, v in sorted(edges):
        km = round(haversine_km(*coords[u], *coords[v]) * float(rng.uniform(1.0, 1.3)))
        out.append((u, v, max(1.0, float(km))))
    return topology_from_edges(coords, out, name="rand")


def random_instance(
    seed,
    nodes=(3, 6),
    demands=(1, 3),
    rates=(50, 200),
    num_slices=12,
    paths=(1, 2),
    bunkers=(0, 2),
    x_km=(50.0, 250.0),
    destructive=False,
    c_spec=None,
):
    """Random connected tiny instance within the exhaustive-search limits."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(nodes[0], nodes[1] + 1))
    topo = random_topology(rng, n)
    dem = []
    for i in range(int(rng.integers(demands[0], demands[1] + 1))):
        s, t = (int(x) for x in rng.choice(n, size=2, replace=False))
        dem.append(Demand(i, s, t, float(rng.integers(rates[0], rates[1] + 1))))
    x = float(rng.uniform(*x_km))
    att = []
    for v in range(n):
        jam = float(rng.uniform(10.0, x))
        destr = float(rng.uniform(0.0, jam)) if destructive and rng.random() < 0.3 else 0.0
        att.append(AttackScenario(v, v, destr, jam))
    if c_spec is None:
        c_spec = float(rng.choice([0.0, 0.3, 0.5, 1.0]))
    return ProblemInstance(
        topo,
        tuple(dem),
        tuple(att),
        num_paths=int(rng.integers(paths[0], paths[1] + 1)),
        num_bunkers=min(n, int(rng.integers(bunkers[0], bunkers[1] + 1))),
        num_slices=num_slices,
        c_spec=c_spec,
        c_res=1.0 - c_spec,
    )
