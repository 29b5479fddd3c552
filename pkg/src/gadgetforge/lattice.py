"""Graph rewriting to degree-3 planar form, lattice embedding with
parity-controlled sign routing, and realization as a staged Hamiltonian.

Sign rule for routed edges (matching the mediator-chain algebra): a path
with m interior mediator qubits realizes sign (-1)^m between its
endpoints. Even m uses m/2 opposite-attached mediator pairs; odd m uses
one same-attached junction (whose heavy partner sits off the path) plus
(m-1)/2 pairs. On a triangular lattice the router fixes parity with a
two-edges-of-a-triangle detour, so all interaction weights stay
non-negative; on a square lattice path parity is fixed by the
bipartition, and a sign mismatch is absorbed by negating one weak leg
(recorded in the layout).
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .gadgets import (
    XYZCoupling,
    coupling_operator,
    pair_h0,
    tilde,
    tilde_bilinear,
    tilde_sum,
    bell_psi_minus,
)
from .pauli import PauliOperator, identity
from .sw import Encoding

__all__ = [
    "InteractionGraph",
    "GraphVertex",
    "GraphEdge",
    "SparsityReport",
    "LatticeLayout",
    "RoutedEdge",
    "RealizedModel",
    "RoutingError",
    "check_spatially_sparse",
    "reduce_degree",
    "isolate_and_cross",
    "embed",
    "auto_embed",
    "realize",
    "default_delta_schedule",
    "junction_chain",
    "check_planar",
]


class RoutingError(RuntimeError):
    pass


@dataclass
class GraphVertex:
    id: int
    x: float | None = None
    y: float | None = None
    kind: str = "target"  # or "mediator"


@dataclass
class GraphEdge:
    u: int
    v: int
    sign: int = 1
    weight: float = 1.0
    role: str = "target"  # target | weak | heavy | extra
    round: int = 0

    def key(self):
        return (min(self.u, self.v), max(self.u, self.v))


@dataclass
class InteractionGraph:
    vertices: dict  # id -> GraphVertex
    edges: list  # of GraphEdge

    def __post_init__(self):
        for e in self.edges:
            if e.u == e.v:
                raise ValueError("self-loops are not allowed")
            if e.u not in self.vertices or e.v not in self.vertices:
                raise ValueError("edge endpoint missing from vertex set")

    def degree(self, vid):
        return sum(1 for e in self.edges if vid in (e.u, e.v))

    def neighbors(self, vid):
        out = []
        for e in self.edges:
            if e.u == vid:
                out.append(e.v)
            elif e.v == vid:
                out.append(e.u)
        return out

    def max_degree(self):
        return max((self.degree(v) for v in self.vertices), default=0)

    def fresh_id(self):
        return max(self.vertices) + 1 if self.vertices else 0

    def copy(self):
        return InteractionGraph(
            vertices={k: GraphVertex(v.id, v.x, v.y, v.kind) for k, v in self.vertices.items()},
            edges=[GraphEdge(e.u, e.v, e.sign, e.weight, e.role, e.round) for e in self.edges],
        )

    # -- JSON wire format ---------------------------------------------------

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        vertices = {
            int(v["id"]): GraphVertex(
                int(v["id"]), v.get("x"), v.get("y"), v.get("kind", "target")
            )
            for v in data["vertices"]
        }
        edges = [
            GraphEdge(
                int(e["u"]),
                int(e["v"]),
                int(e.get("sign", 1)),
                float(e.get("weight", 1.0)),
                e.get("role", "target"),
                int(e.get("round", 0)),
            )
            for e in data["edges"]
        ]
        return cls(vertices, edges)

    def to_json(self):
        return json.dumps(
            {
                "vertices": [
                    {"id": v.id, "x": v.x, "y": v.y, "kind": v.kind}
                    for v in sorted(self.vertices.values(), key=lambda v: v.id)
                ],
                "edges": [
                    {
                        "u": e.u,
                        "v": e.v,
                        "sign": e.sign,
                        "weight": e.weight,
                        "role": e.role,
                        "round": e.round,
                    }
                    for e in self.edges
                ],
            },
            indent=2,
            sort_keys=True,
        )


# -- spatial sparsity -----------------------------------------------------


def _segments_cross(p1, p2, p3, p4, eps=1e-12):
    """Proper interior crossing of segments p1p2 and p3p4."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return (d1 * d2 < -eps) and (d3 * d4 < -eps)


@dataclass
class SparsityReport:
    ok: bool
    degree_violations: list
    overlap_violations: list
    length_violations: list


def check_spatially_sparse(g: InteractionGraph, degree_cap, overlap_cap, length_cap):
    """Degree, straight-line crossing and edge-length checks."""
    for v in g.vertices.values():
        if v.x is None or v.y is None:
            raise ValueError(f"vertex {v.id} has no drawing coordinates")
    deg_bad = [v for v in g.vertices if g.degree(v) > degree_cap]
    pos = {v.id: (v.x, v.y) for v in g.vertices.values()}
    crossings = [0] * len(g.edges)
    cross_pairs = []
    for (i, e1), (j, e2) in itertools.combinations(enumerate(g.edges), 2):
        if {e1.u, e1.v} & {e2.u, e2.v}:
            continue
        if _segments_cross(pos[e1.u], pos[e1.v], pos[e2.u], pos[e2.v]):
            crossings[i] += 1
            crossings[j] += 1
            cross_pairs.append((e1.key(), e2.key()))
    overlap_bad = [
        (g.edges[i].key(), c) for i, c in enumerate(crossings) if c > overlap_cap
    ]
    length_bad = []
    for e in g.edges:
        ln = math.dist(pos[e.u], pos[e.v])
        if ln > length_cap:
            length_bad.append((e.key(), ln))
    return SparsityReport(
        ok=not (deg_bad or overlap_bad or length_bad),
        degree_violations=deg_bad,
        overlap_violations=overlap_bad,
        length_violations=length_bad,
    )


def check_planar(g: InteractionGraph) -> bool:
    import networkx as nx

    gx = nx.Graph()
    gx.add_nodes_from(g.vertices)
    gx.add_edges_from((e.u, e.v) for e in g.edges)
    ok, _ = nx.check_planarity(gx)
    return ok


# -- rewrite passes -------------------------------------------------------


def _subdivide_edge(g, e, rnd):
    """Replace edge e by u - m1 = m2 - v; the edge's sign rides on the
    v-side leg."""
    ux, uy = g.vertices[e.u].x, g.vertices[e.u].y
    vx, vy = g.vertices[e.v].x, g.vertices[e.v].y
    m1 = g.fresh_id()
    g.vertices[m1] = GraphVertex(
        m1, ux + (vx - ux) / 3, uy + (vy - uy) / 3, "mediator"
    )
    m2 = g.fresh_id()
    g.vertices[m2] = GraphVertex(
        m2, ux + 2 * (vx - ux) / 3, uy + 2 * (vy - uy) / 3, "mediator"
    )
    g.edges.remove(e)
    g.edges.append(GraphEdge(e.u, m1, 1, e.weight, "weak", rnd))
    g.edges.append(GraphEdge(m1, m2, 1, 1.0, "heavy", rnd))
    g.edges.append(GraphEdge(m2, e.v, e.sign, 1.0, "weak", rnd))
    return {"kind": "subdivide", "edge": e.key(), "pair": (m1, m2), "round": rnd}


def reduce_degree(g: InteractionGraph):
    """Subdivision plus fork rounds until the maximum degree is <= 3.

    Returns (rewritten graph, schedule), where the schedule is a list of
    rounds, each a list of rewrite records. Inputs already at degree <= 3
    come back unchanged with an empty schedule.
    """
    g = g.copy()
    schedule = []
    rnd = 0
    while g.max_degree() > 3:
        rnd += 1
        records = []
        high = [v for v in sorted(g.vertices) if g.degree(v) > 3]
        # isolate the offending vertices by subdividing their edges
        for v in high:
            for e in [e for e in list(g.edges) if v in (e.u, e.v) and e.role != "heavy"]:
                if e in g.edges:
                    records.append(_subdivide_edge(g, e, rnd))
        # fork: pair incoming edges at each high-degree vertex
        for v in high:
            incident = sorted(
                (e for e in g.edges if v in (e.u, e.v)), key=lambda e: e.key()
            )
            vx, vy = g.vertices[v].x, g.vertices[v].y

            def angle(e):
                o = e.u if e.v == v else e.v
                return math.atan2(g.vertices[o].y - vy, g.vertices[o].x - vx)

            incident.sort(key=angle)
            for e1, e2 in zip(incident[0::2], incident[1::2]):
                q1 = e1.u if e1.v == v else e1.v
                q2 = e2.u if e2.v == v else e2.v
                a = g.fresh_id()
                g.vertices[a] = GraphVertex(
                    a,
                    (g.vertices[q1].x + g.vertices[q2].x) / 2,
                    (g.vertices[q1].y + g.vertices[q2].y) / 2,
                    "mediator",
                )
                b = g.fresh_id()
                g.vertices[b] = GraphVertex(
                    b, (g.vertices[a].x + vx) / 2, (g.vertices[a].y + vy) / 2, "mediator"
                )
                s1, w1 = e1.sign, e1.weight
                s2, w2 = e2.sign, e2.weight
                g.edges.remove(e1)
                g.edges.remove(e2)
                g.edges.append(GraphEdge(q1, a, s1, w1, "weak", rnd))
                g.edges.append(GraphEdge(q2, a, s2, w2, "weak", rnd))
                g.edges.append(GraphEdge(v, b, 1, 1.0, "weak", rnd))
                g.edges.append(GraphEdge(a, b, 1, 1.0, "heavy", rnd))
                g.edges.append(
                    GraphEdge(q1, q2, s1 * s2, w1 * w2, "extra", rnd)
                )
                records.append(
                    {
                        "kind": "fork",
                        "vertex": v,
                        "in": (q1, q2),
                        "pair": (a, b),
                        "round": rnd,
                    }
                )
        schedule.append(records)
        if rnd > 64:
            raise RuntimeError("degree reduction failed to converge")
    return g, schedule


def _edge_crossings(g):
    pos = {v.id: (v.x, v.y) for v in g.vertices.values()}
    hits = {}
    for (i, e1), (j, e2) in itertools.combinations(enumerate(g.edges), 2):
        if {e1.u, e1.v} & {e2.u, e2.v}:
            continue
        if e1.role == "heavy" or e2.role == "heavy":
            continue
        if _segments_cross(pos[e1.u], pos[e1.v], pos[e2.u], pos[e2.v]):
            hits.setdefault(i, []).append(j)
            hits.setdefault(j, []).append(i)
    return hits


def isolate_and_cross(g: InteractionGraph, start_round=None):
    """Subdivide multiply-crossed edges, then replace each crossing with
    the planar crossing gadget. Output is planar with degree <= 3."""
    g = g.copy()
    schedule = []
    rnd = (start_round or 0)
    # isolate: no edge may participate in more than one crossing
    for _ in range(64):
        hits = _edge_crossings(g)
        busy = [i for i, js in hits.items() if len(js) > 1]
        if not busy:
            break
        rnd += 1
        records = [_subdivide_edge(g, g.edges[busy[0]], rnd)]
        schedule.append(records)
    else:
        raise RuntimeError("crossing isolation failed to converge")

    hits = _edge_crossings(g)
    seen = set()
    records = []
    rnd += 1
    for i in sorted(hits):
        if i in seen or not hits[i]:
            continue
        j = hits[i][0]
        seen |= {i, j}
        e1, e2 = g.edges[i], g.edges[j]
        pos = {v.id: (v.x, v.y) for v in g.vertices.values()}
        cx = (pos[e1.u][0] + pos[e1.v][0] + pos[e2.u][0] + pos[e2.v][0]) / 4
        cy = (pos[e1.u][1] + pos[e1.v][1] + pos[e2.u][1] + pos[e2.v][1]) / 4
        a = g.fresh_id()
        g.vertices[a] = GraphVertex(a, cx, cy + 0.1, "mediator")
        b = g.fresh_id()
        g.vertices[b] = GraphVertex(b, cx, cy - 0.1, "mediator")
        u1, v1, s1, w1 = e1.u, e1.v, e1.sign, e1.weight
        u2, v2, s2, w2 = e2.u, e2.v, e2.sign, e2.weight
        for e in (e1, e2):
            g.edges.remove(e)
        g.edges.append(GraphEdge(u1, a, s1, w1, "weak", rnd))
        g.edges.append(GraphEdge(u2, a, s2, w2, "weak", rnd))
        g.edges.append(GraphEdge(v2, b, 1, 1.0, "weak", rnd))
        g.edges.append(GraphEdge(v1, b, 1, 1.0, "weak", rnd))
        g.edges.append(GraphEdge(a, b, 1, 1.0, "heavy", rnd))
        g.edges.append(GraphEdge(u1, u2, s1 * s2, w1 * w2, "extra", rnd))
        g.edges.append(GraphEdge(v1, v2, 1, 1.0, "extra", rnd))
        g.edges.append(GraphEdge(u1, v2, -s1, w1, "extra", rnd))
        g.edges.append(GraphEdge(u2, v1, -s2, w2, "extra", rnd))
        records.append(
            {"kind": "crossing", "edges": (e1.key(), e2.key()), "pair": (a, b), "round": rnd}
        )
    if records:
        schedule.append(records)
    return g, schedule


# -- lattice embedding ------------------------------------------------------


def _site_xy(site, kind, spacing):
    i, j = site
    if kind == "square":
        return (i * spacing, j * spacing)
    return (spacing * (i + 0.5 * j), spacing * j * math.sqrt(3) / 2)


def _site_neighbors(site, kind):
    i, j = site
    if kind == "square":
        return [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
    return [
        (i + 1, j),
        (i - 1, j),
        (i, j + 1),
        (i, j - 1),
        (i + 1, j - 1),
        (i - 1, j + 1),
    ]


@dataclass
class RoutedEdge:
    edge: GraphEdge
    sites: list  # path of lattice sites, endpoints included
    junction_site: tuple | None = None
    junction_partner: tuple | None = None
    negative_leg: int | None = None  # index of the path leg carrying -1
    parity: int = 0  # number of interior mediators mod 2

    @property
    def mediators(self):
        return self.sites[1:-1]


@dataclass
class LatticeLayout:
    lattice_kind: str
    spacing: float
    site_of_vertex: dict
    routed: list  # of RoutedEdge
    occupied: set
    graph: InteractionGraph

    def site_xy(self, site):
        return _site_xy(site, self.lattice_kind, self.spacing)

    def to_json(self):
        return json.dumps(
            {
                "lattice_kind": self.lattice_kind,
                "spacing": self.spacing,
                "sites": {str(v): list(s) for v, s in sorted(self.site_of_vertex.items())},
                "paths": [
                    {
                        "edge": list(r.edge.key()),
                        "sign": r.edge.sign,
                        "sites": [list(s) for s in r.sites],
                        "junction_site": list(r.junction_site) if r.junction_site else None,
                        "junction_partner": list(r.junction_partner)
                        if r.junction_partner
                        else None,
                        "negative_leg": r.negative_leg,
                        "parity": r.parity,
                    }
                    for r in self.routed
                ],
            },
            indent=2,
            sort_keys=True,
        )


def _snap(g, kind, spacing):
    taken = {}
    for vid in sorted(g.vertices):
        v = g.vertices[vid]
        best = None
        # search a small neighborhood of the naive cell
        if kind == "square":
            ci, cj = v.x / spacing, v.y / spacing
        else:
            cj = v.y / (spacing * math.sqrt(3) / 2)
            ci = v.x / spacing - 0.5 * cj
        for di in range(-2, 3):
            for dj in range(-2, 3):
                s = (int(round(ci)) + di, int(round(cj)) + dj)
                if s in taken.values():
                    continue
                d = math.dist(_site_xy(s, kind, spacing), (v.x, v.y))
                cand = (d, s)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise RoutingError(f"no free site near vertex {vid}")
        taken[vid] = best[1]
    return taken


def _bfs_route(start, goal, kind, blocked):
    """Deterministic shortest lattice path; blocked sites are avoided."""
    if start == goal:
        return [start]
    dist = {start: 0}
    prev = {}
    queue = [(0, start)]
    while queue:
        d, site = heapq.heappop(queue)
        if site == goal:
            path = [site]
            while site in prev:
                site = prev[site]
                path.append(site)
            return path[::-1]
        if d > dist.get(site, math.inf):
            continue
        for nb in sorted(_site_neighbors(site, kind)):
            if nb != goal and nb in blocked:
                continue
            if abs(nb[0] - start[0]) > 64 or abs(nb[1] - start[1]) > 64:
                continue
            if d + 1 < dist.get(nb, math.inf):
                dist[nb] = d + 1
                prev[nb] = site
                heapq.heappush(queue, (d + 1, nb))
    return None


def _detour(path, kind, blocked):
    """Lengthen the path by one site using a triangle move (parity fix)."""
    for idx in range(len(path) - 1):
        u, v = path[idx], path[idx + 1]
        common = set(_site_neighbors(u, kind)) & set(_site_neighbors(v, kind))
        for x in sorted(common):
            if x not in blocked and x not in path:
                return path[: idx + 1] + [x] + path[idx + 1 :]
    return None


def embed(g: InteractionGraph, kind, spacing, angle_min=0.15, length_max=None):
    """Snap vertices to lattice sites and route every edge.

    Requires a straight-line drawing with bounded edge lengths and a
    minimum angle between edges sharing a vertex. Heavy edges (mediator
    pairs from earlier rewrites) must land on adjacent sites. Raises
    RoutingError when a path cannot be realized at this spacing.
    """
    if kind not in ("square", "triangular"):
        raise ValueError("lattice kind must be 'square' or 'triangular'")
    for v in g.vertices.values():
        if v.x is None or v.y is None:
            raise ValueError("embedding requires drawing coordinates")
    pos = {v.id: (v.x, v.y) for v in g.vertices.values()}
    if length_max is not None:
        for e in g.edges:
            if math.dist(pos[e.u], pos[e.v]) > length_max:
                raise ValueError(f"edge {e.key()} exceeds the length bound")
    for vid in g.vertices:
        nbrs = g.neighbors(vid)
        for n1, n2 in itertools.combinations(nbrs, 2):
            a1 = math.atan2(pos[n1][1] - pos[vid][1], pos[n1][0] - pos[vid][0])
            a2 = math.atan2(pos[n2][1] - pos[vid][1], pos[n2][0] - pos[vid][0])
            d = abs((a1 - a2 + math.pi) % (2 * math.pi) - math.pi)
            if d < angle_min:
                raise ValueError(
                    f"edges at vertex {vid} meet at angle {d:.3f} < {angle_min}"
                )

    site_of = _snap(g, kind, spacing)
    occupied = set(site_of.values())
    routed = []
    for e in sorted(g.edges, key=lambda e: (e.round, e.key())):
        su, sv = site_of[e.u], site_of[e.v]
        blocked = occupied - {su, sv}
        path = _bfs_route(su, sv, kind, blocked)
        if path is None:
            raise RoutingError(f"no route for edge {e.key()} at spacing {spacing}")
        if e.role == "heavy":
            if len(path) != 2:
                raise RoutingError(
                    f"heavy pair {e.key()} not adjacent at spacing {spacing}"
                )
            routed.append(RoutedEdge(e, path))
            continue
        desired = e.sign
        if e.role in ("weak", "extra"):
            desired = 1 if e.sign >= 0 else -1
        # target edges must pass through at least one mediator
        if len(path) == 2 and e.role == "target":
            longer = _detour(path, kind, blocked | occupied - {su, sv})
            if longer is None:
                raise RoutingError(f"cannot mediate adjacent targets {e.key()}")
            path = longer
        m = len(path) - 2
        natural = -1 if m % 2 else 1
        negative_leg = None
        junction_site = junction_partner = None
        if natural != desired:
            if kind == "triangular":
                longer = _detour(path, kind, blocked | occupied)
                if longer is None:
                    raise RoutingError(f"no parity detour for edge {e.key()}")
                path = longer
                m = len(path) - 2
            else:
                negative_leg = 0
        if m % 2 == 1:
            # a junction mediator with an off-path heavy partner
            placed = False
            for j in range(1, m + 1, 2):
                site = path[j]
                for nb in sorted(_site_neighbors(site, kind)):
                    if nb not in occupied and nb not in path:
                        junction_site, junction_partner = site, nb
                        placed = True
                        break
                if placed:
                    break
            if not placed:
                raise RoutingError(f"no junction partner for edge {e.key()}")
            occupied.add(junction_partner)
        occupied.update(path[1:-1])
        routed.append(
            RoutedEdge(
                e,
                path,
                junction_site=junction_site,
                junction_partner=junction_partner,
                negative_leg=negative_leg,
                parity=m % 2,
            )
        )
    return LatticeLayout(kind, spacing, site_of, routed, occupied, g.copy())


def auto_embed(g: InteractionGraph, kind, spacing=None, floor_divisor=32):
    """Embed with geometric spacing refinement on routing failure."""
    pos = [(v.x, v.y) for v in g.vertices.values()]
    dmin = min(
        math.dist(p, q) for p, q in itertools.combinations(pos, 2)
    )
    s = spacing if spacing is not None else dmin / 4
    floor = dmin / floor_divisor
    while True:
        try:
            return embed(g, kind, s)
        except RoutingError:
            s = s / 2
            if s < floor:
                raise


# -- realization ------------------------------------------------------------


def default_delta_schedule(delta0, rounds, exponent=2 / 3):
    """Decreasing geometric schedule delta0^(exponent^r), r = 0..rounds-1."""
    return [delta0 ** (exponent**r) for r in range(rounds)]


@dataclass
class RealizedModel:
    hamiltonian: PauliOperator
    n_qubits: int
    qubit_of_vertex: dict
    qubit_of_site: dict
    encoding: Encoding
    predicted_target: PauliOperator
    predicted_shift: float
    rounds_used: int
    all_weights_nonnegative: bool
    frozen_pairs: list


class _Builder:
    """Accumulates staged chain terms on a growing qubit register."""

    def __init__(self, c: XYZCoupling):
        self.c = c
        self.terms = []
        self.frozen_pairs = []  # (qubit_a, qubit_b) held in the singlet
        self.shift = 0.0
        self.weights = []  # every interaction weight emitted

    def add_pair_h0(self, delta, qa, qb):
        self.terms.append(("h0", delta, qa, qb))
        self.frozen_pairs.append((qa, qb))
        self.weights.append(delta)

    def add_leg(self, weight, coupling, qu, qv):
        self.terms.append(("leg", weight, coupling, qu, qv))
        self.weights.append(weight)

    def build_operator(self, n) -> PauliOperator:
        h = PauliOperator(n, [])
        for t in self.terms:
            if t[0] == "h0":
                _, delta, qa, qb = t
                h = h + delta * pair_h0(self.c, n, qa, qb)
            else:
                _, w, cpl, qu, qv = t
                h = h + w * coupling_operator(cpl, n, qu, qv)
        return h

    def chain(
        self,
        qubits,
        W,
        schedule,
        all_junction=False,
        partner_of=None,
        negative_leg=False,
    ):
        """Emit staged mediator terms between the path's endpoint qubits.

        ``qubits`` lists endpoint, mediators..., endpoint. ``schedule`` is
        the decreasing global delta schedule; the chain's innermost stage
        takes schedule[0]. ``partner_of`` maps a mediator qubit to its
        off-path heavy partner (required for junction stages).

        The realized interaction is sign * W * T with T the returned
        coupling type and sign = (-1)^(#junctions), further negated when
        ``negative_leg`` flips the outermost physical leg. Returns
        (T, sign, depth).
        """
        c = self.c
        m = len(qubits) - 2
        depth = m if all_junction else (m + 1) // 2
        if depth > len(schedule):
            raise ValueError("staging schedule too short for this route")
        deltas = [schedule[depth - 1 - s] for s in range(depth)]  # outer first
        junctions = 0

        def rec(path, w_in, stage, negate_head):
            nonlocal junctions
            inner = len(path) - 2
            if inner == 0:
                self.add_leg(-w_in if negate_head else w_in, c, path[0], path[-1])
                return c
            d = deltas[stage]
            head = path[1]
            kappa = math.sqrt(d)
            a_w = w_in * kappa / 2.0
            junction = all_junction or inner % 2 == 1
            if junction:
                junctions += 1
                partner = partner_of[head]
                self.add_pair_h0(d, head, partner)
                sub_path = [head] + list(path[2:])
            else:
                head2 = path[2]
                self.add_pair_h0(d, head, head2)
                sub_path = [head2] + list(path[3:])
            self.add_leg(-a_w if negate_head else a_w, c, path[0], head)
            sub_t = rec(sub_path, kappa, stage + 1, False)
            self.shift += (
                -(a_w**2 * tilde_sum(c, c) + d * tilde_sum(sub_t, c)) / d
            )
            return tilde_bilinear(c, sub_t, c)

        t_final = rec(list(qubits), W, 0, negative_leg)
        sign = (-1) ** junctions * (-1 if negative_leg else 1)
        return t_final, sign, depth


def junction_chain(c: XYZCoupling, k: int, delta_schedule) -> RealizedModel:
    """All-junction subdivision chain with k mediator pairs.

    Every mediator sits on the path with its heavy partner hanging off
    it, so each pair contributes one sign flip: the realized endpoint
    interaction is (-1)^k W tilde(c) (unit weight here). Register layout:
    endpoint 0, mediators 1..k, endpoint k+1, partners k+2..2k+1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 2 * k + 2
    path = [0] + list(range(1, k + 1)) + [k + 1]
    partner_of = {j: k + 1 + j for j in range(1, k + 1)}
    b = _Builder(c)
    t_final, sign, depth = b.chain(
        path, 1.0, delta_schedule, all_junction=True, partner_of=partner_of
    )
    h = b.build_operator(n)
    target = float(sign) * coupling_operator(t_final, 2, 0, 1)
    enc = _frozen_pairs_encoding(n, [0, k + 1], b.frozen_pairs)
    return RealizedModel(
        hamiltonian=h,
        n_qubits=n,
        qubit_of_vertex={0: 0, 1: k + 1},
        qubit_of_site={},
        encoding=enc,
        predicted_target=target,
        predicted_shift=b.shift,
        rounds_used=depth,
        all_weights_nonnegative=all(w >= 0 for w in b.weights),
        frozen_pairs=b.frozen_pairs,
    )


def _frozen_pairs_encoding(n, logical, pairs):
    """Passthrough encoding with every (qa, qb) pair frozen in the singlet."""
    ancillas = []
    state = np.ones(1, dtype=complex)
    for qa, qb in pairs:
        ancillas.extend([qa, qb])
        state = np.kron(bell_psi_minus(), state)
    return Encoding.passthrough(n, logical, state, ancillas)


def realize(layout: LatticeLayout, c: XYZCoupling, delta_schedule) -> RealizedModel:
    """Emit the staged physical Hamiltonian for an embedded graph.

    Every routed non-heavy edge becomes a mediator chain between its
    endpoint qubits; heavy graph edges (mediator pairs from rewrite
    rounds) become direct heavy terms one schedule level below the
    chains that serve them. The predicted target collects the realized
    couplings of the original target edges on the target register.
    """
    sched = [float(d) for d in delta_schedule]
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("delta schedule must be strictly decreasing")
    g = layout.graph
    targets = sorted(v for v in g.vertices if g.vertices[v].kind == "target")
    qubit_of_vertex = {}
    qubit_of_site = {}
    next_q = 0
    for v in targets:
        qubit_of_vertex[v] = next_q
        next_q += 1
    n_targets = next_q

    def site_qubit(site):
        nonlocal next_q
        if site not in qubit_of_site:
            qubit_of_site[site] = next_q
            next_q += 1
        return qubit_of_site[site]

    # mediator vertices from rewrite rounds live on their snapped sites
    for v in sorted(g.vertices):
        if g.vertices[v].kind == "mediator":
            qubit_of_vertex[v] = site_qubit(layout.site_of_vertex[v])

    graph_rounds = max((e.round for e in g.edges), default=0)
    builder = _Builder(c)
    target_op_terms = PauliOperator(n_targets, [])
    depth_used = 0
    positive = True

    def vertex_qubit(v):
        if g.vertices[v].kind == "target":
            return qubit_of_vertex[v]
        return qubit_of_vertex[v]

    # chains first (they occupy the deepest levels)
    for r in layout.routed:
        e = r.edge
        if e.role == "heavy":
            continue
        qubits = [vertex_qubit(e.u)]
        for site in r.sites[1:-1]:
            qubits.append(site_qubit(site))
        qubits.append(vertex_qubit(e.v))
        partner_of = {}
        if r.junction_partner is not None:
            partner_of[site_qubit(r.junction_site)] = site_qubit(r.junction_partner)
        # magnitude of the interaction this chain must realize
        if e.role == "target":
            W = abs(e.weight)
        elif e.role == "weak":
            W = abs(e.weight) * math.sqrt(_round_delta(sched, e.round, graph_rounds))
        else:  # extra correction, enters at weight one relative to its round
            W = abs(e.weight)
        if len(qubits) == 2:
            # adjacent endpoints: a direct physical term (rewrite legs and
            # corrections only; target edges are always mediated). Direct
            # corrections assume a self-tilde coupling (XY or Heisenberg).
            builder.add_leg(float(e.sign) * W, c, qubits[0], qubits[1])
            continue
        t_final, sign, depth = builder.chain(
            qubits,
            W,
            sched,
            partner_of=partner_of,
            negative_leg=r.negative_leg is not None,
        )
        depth_used = max(depth_used, depth)
        if sign != (1 if e.sign >= 0 else -1) and e.role == "target":
            raise RoutingError(
                f"edge {e.key()} parity realizes sign {sign}, wanted {e.sign}"
            )
        if r.negative_leg is not None:
            positive = False
        if e.role == "target":
            i, j = qubit_of_vertex[e.u], qubit_of_vertex[e.v]
            target_op_terms = target_op_terms + (sign * abs(e.weight)) * coupling_operator(
                t_final, n_targets, i, j
            )

    # heavy pairs from rewrite rounds
    for r in layout.routed:
        e = r.edge
        if e.role != "heavy":
            continue
        d = _round_delta(sched, e.round, graph_rounds)
        builder.add_pair_h0(d, vertex_qubit(e.u), vertex_qubit(e.v))

    h = builder.build_operator(next_q)
    enc = _frozen_pairs_encoding(
        next_q, [qubit_of_vertex[v] for v in targets], builder.frozen_pairs
    )
    return RealizedModel(
        hamiltonian=h,
        n_qubits=next_q,
        qubit_of_vertex=qubit_of_vertex,
        qubit_of_site=qubit_of_site,
        encoding=enc,
        predicted_target=target_op_terms,
        predicted_shift=builder.shift,
        rounds_used=max(depth_used, graph_rounds),
        all_weights_nonnegative=positive and all(w >= 0 for w in builder.weights),
        frozen_pairs=builder.frozen_pairs,
    )


def _round_delta(sched, rnd, graph_rounds):
    """Delta level for a graph-rewrite round; later rounds are heavier and
    chains stack below them all at schedule[0.. ]."""
    idx = graph_rounds - rnd
    if idx >= len(sched):
        raise ValueError("staging schedule too short for the rewrite rounds")
    return sched[idx]
