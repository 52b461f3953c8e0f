"""Triangular-lattice constructions: ladders and the slack gadget.

Lattice points use axial coordinates ``(a, b)`` for the planar point
``a * (1, 0) + b * (1/2, sqrt(3)/2)``. Every graph built here is the induced
subgraph of the lattice on its coordinate set, so the induced-subgraph
property holds by construction; Hamiltonicity and the piece sizes are checked
when the gadget is built.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graph import Graph, GraphError, Partition, is_connected

# unit steps in counterclockwise order, 60 degrees apart
DIRECTIONS: tuple[tuple[int, int], ...] = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

Point = tuple[int, int]


def lattice_adjacent(p: Point, q: Point) -> bool:
    return (q[0] - p[0], q[1] - p[1]) in DIRECTIONS


def induced_lattice_graph(coords: list[Point], name: str = "") -> Graph:
    """Induced subgraph of the triangular lattice; vertex ``i`` sits at ``coords[i]``."""
    if len(set(coords)) != len(coords):
        raise GraphError("duplicate lattice point")
    where = {p: i for i, p in enumerate(coords)}
    edges = []
    for i, (a, b) in enumerate(coords):
        for da, db in DIRECTIONS:
            j = where.get((a + da, b + db))
            if j is not None and i < j:
                edges.append((i, j))
    return Graph(len(coords), edges, name=name)


def ladder_coords(n1: int) -> list[Point]:
    """Lattice points of a ladder on ``n1`` vertices, in zig-zag order.

    Rails are the lines ``b = 0`` and ``b = 1``; consecutive points alternate
    between them, so the rails hold ``ceil(n1/2)`` and ``floor(n1/2)`` points.
    """
    return [(i // 2, i % 2) for i in range(n1)]


def make_triangular_ladder(n1: int) -> Graph:
    """Ladder of the triangular lattice on ``n1`` vertices (the square of a path)."""
    if n1 < 2:
        raise GraphError("a ladder needs at least 2 vertices")
    return induced_lattice_graph(ladder_coords(n1), name=f"L{n1}")


def hexagon_ring() -> list[Point]:
    """The 12 lattice points at hex distance 2 from the origin, counterclockwise from (2, 0)."""
    pts = [(2, 0)]
    for d in DIRECTIONS[2:] + DIRECTIONS[:2]:
        for _ in range(2):
            a, b = pts[-1]
            pts.append((a + d[0], b + d[1]))
    return pts[:-1]


# ring edges (i, i+1) that receive a ladder; each ends at a hexagon corner and
# its ladder runs radially outward from that corner.
RED_EDGE = (11, 0)
GREEN_EDGES = ((1, 2), (5, 6))
BLUE_EDGE = (9, 10)
GREEN_RING = tuple(range(0, 7))
BLUE_RING = tuple(range(7, 12))


@dataclass(frozen=True)
class SlackGadget:
    """A member of the slack-pathology family, with its construction metadata.

    Vertices are numbered along the Hamiltonian cycle, so ``cycle`` is
    ``0, 1, ..., 3n-1``.
    """

    n: int
    graph: Graph
    coords: tuple[Point, ...]
    cycle: tuple[int, ...]
    hexagon: tuple[int, ...]
    ladders: dict[str, tuple[int, ...]]
    witness: Partition

    @property
    def ladder_sizes(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.ladders.items()}


def make_slack_gadget(n: int) -> SlackGadget:
    """Hexagon of side 2 with four radial ladders, on ``3n`` vertices.

    Ladder sizes are ``n-1`` (red), ``(n-6)/2`` twice (green) and ``n-5``
    (blue). The red ladder alone, the green ring arc with its two ladders,
    and the blue ring arc with its ladder form the witness partition with
    piece sizes ``n-1``, ``n+1`` and ``n``.
    """
    if n % 2 or n < 8:
        raise GraphError("gadget needs an even n >= 8")
    ring = hexagon_ring()
    sizes = {RED_EDGE: n - 1, GREEN_EDGES[0]: (n - 6) // 2, GREEN_EDGES[1]: (n - 6) // 2, BLUE_EDGE: n - 5}
    names = {RED_EDGE: "red", GREEN_EDGES[0]: "green0", GREEN_EDGES[1]: "green1", BLUE_EDGE: "blue"}

    coords: list[Point] = []
    hexagon: list[int] = []
    ladders: dict[str, tuple[int, ...]] = {}
    for i in range(12):
        a = ring[i]
        hexagon.append(len(coords))
        coords.append(a)
        edge = (i, (i + 1) % 12)
        if edge not in sizes:
            continue
        b = ring[(i + 1) % 12]
        step = (b[0] - a[0], b[1] - a[1])
        d = DIRECTIONS[(DIRECTIONS.index(step) - 1) % 6]
        strip = []
        for j in range(sizes[edge]):
            base, t = (a if j % 2 == 0 else b), j // 2 + 1
            strip.append((base[0] + t * d[0], base[1] + t * d[1]))
        # out along the rail next to a, back along the rail next to b
        tour = strip[0::2] + strip[1::2][::-1]
        ladders[names[edge]] = tuple(range(len(coords), len(coords) + len(tour)))
        coords.extend(tour)

    g = induced_lattice_graph(coords, name=f"gadget{n}")
    N = len(coords)
    if N != 3 * n:
        raise GraphError(f"gadget has {N} vertices, expected {3 * n}")
    cycle = tuple(range(N))
    if not all(g.has_edge(v, (v + 1) % N) for v in cycle):
        raise GraphError("construction order is not a Hamiltonian cycle")

    green = [hexagon[i] for i in GREEN_RING] + list(ladders["green0"]) + list(ladders["green1"])
    blue = [hexagon[i] for i in BLUE_RING] + list(ladders["blue"])
    witness = Partition([ladders["red"], green, blue])
    witness.validate(g)
    assert sorted(witness.sizes) == [n - 1, n, n + 1]
    return SlackGadget(n, g, tuple(coords), cycle, tuple(hexagon), ladders, witness)


def cycle_partitions(gadget: SlackGadget) -> list[Partition]:
    """The ``n`` balanced 3-partitions cut from the Hamiltonian cycle."""
    n, N = gadget.n, gadget.graph.num_vertices
    out = []
    for r in range(n):
        out.append(Partition([[(r + j) % N for j in range(i * n, (i + 1) * n)] for i in range(3)]))
    return out


def check_lattice_embedding(g: Graph, coords: list[Point] | tuple[Point, ...]) -> bool:
    """True iff ``g`` is exactly the lattice-induced graph on ``coords``."""
    if len(coords) != g.num_vertices or len(set(coords)) != len(coords):
        return False
    for i, j in combinations(range(len(coords)), 2):
        if lattice_adjacent(coords[i], coords[j]) != g.has_edge(i, j):
            return False
    return is_connected(g)
