"""Winged-edge cellular surfaces.

Oriented edges are integers 0 .. 4E-1.  The four oriented edges 4k .. 4k+3
belong to the unoriented edge k; reversal is ``n ^ 2`` and the sheet swap of
the orientation double cover is ``n ^ 1``.  ``sigma`` maps an oriented edge to
the next edge of its left face.  Faces 2n and 2n+1 (and likewise vertices)
are the two lifts of one unoriented face (vertex).

A surface is built from face boundary rows.  Row k lists the oriented edges
of face 2k in order; SENTINEL entries break the cyclic order and produce a
boundary face.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SENTINEL = -1


def iota(n: int) -> int:
    """Edge reversal."""
    return n ^ 2


def tau(n: int) -> int:
    """Sheet swap on the orientation double cover."""
    return n ^ 1


def _mirror(n: int) -> int:
    return n ^ 3


@dataclass(frozen=True)
class Subcomplex:
    """A graph embedded in the 1-skeleton: unoriented edges and vertices."""

    edge_set: frozenset
    vertex_set: frozenset

    def __init__(self, edge_set: Iterable[int] = (), vertex_set: Iterable[int] = ()):
        object.__setattr__(self, "edge_set", frozenset(int(e) for e in edge_set))
        object.__setattr__(self, "vertex_set", frozenset(int(v) for v in vertex_set))


class CellularSurface:
    """Immutable winged-edge surface. Build with :func:`build_from_face_boundaries`."""

    __slots__ = ("rows", "num_edges", "sigma", "sigma_inv", "face_of", "vertex_of",
                 "num_faces", "num_vertices", "name", "_closed_vertex")

    def __init__(self, rows, num_edges, sigma, sigma_inv, face_of, vertex_of,
                 num_faces, num_vertices, closed_vertex, name=None):
        self.rows = rows
        self.num_edges = num_edges
        self.sigma = sigma
        self.sigma_inv = sigma_inv
        self.face_of = face_of
        self.vertex_of = vertex_of
        self.num_faces = num_faces
        self.num_vertices = num_vertices
        self._closed_vertex = closed_vertex
        self.name = name
        for arr in (sigma, sigma_inv, face_of, vertex_of):
            arr.setflags(write=False)

    def __setattr__(self, key, value):
        if hasattr(self, "_closed_vertex") and key != "name":
            raise AttributeError("CellularSurface is immutable")
        object.__setattr__(self, key, value)

    # basic counts and predicates

    @property
    def num_oriented_edges(self) -> int:
        return 4 * self.num_edges

    @property
    def euler_characteristic(self) -> int:
        return self.num_faces - self.num_edges + self.num_vertices

    @property
    def has_boundary(self) -> bool:
        return bool(np.any(self.sigma == SENTINEL))

    def is_boundary_face(self, face: int) -> bool:
        """True if the unoriented face has a broken boundary cycle."""
        edges = self.face_edges(2 * face)
        return any(self.sigma[e] == SENTINEL for e in edges)

    def is_boundary_vertex(self, vertex: int) -> bool:
        return not self._closed_vertex[vertex]

    def edge_is_interior(self, k: int) -> bool:
        """Unoriented edge with a face on either side."""
        return self.face_of[4 * k] != SENTINEL and self.face_of[4 * k + 2] != SENTINEL

    def interior_edges(self) -> list[int]:
        return [k for k in range(self.num_edges) if self.edge_is_interior(k)]

    # navigation

    def _check(self, e: int) -> None:
        if not 0 <= e < 4 * self.num_edges:
            raise IndexError(f"oriented edge {e} out of range")

    def next_left(self, e: int) -> int:
        self._check(e)
        return int(self.sigma[e])

    def prev_left(self, e: int) -> int:
        self._check(e)
        return int(self.sigma_inv[e])

    def next_right(self, e: int) -> int:
        self._check(e)
        p = self.sigma_inv[iota(e)]
        return SENTINEL if p == SENTINEL else iota(int(p))

    def prev_right(self, e: int) -> int:
        self._check(e)
        p = self.sigma[iota(e)]
        return SENTINEL if p == SENTINEL else iota(int(p))

    def left_face(self, e: int) -> int:
        self._check(e)
        return int(self.face_of[e])

    def right_face(self, e: int) -> int:
        self._check(e)
        return int(self.face_of[iota(e)])

    def initial_vertex(self, e: int) -> int:
        self._check(e)
        return int(self.vertex_of[e])

    def terminal_vertex(self, e: int) -> int:
        self._check(e)
        return int(self.vertex_of[iota(e)])

    def navigate(self, query: str, e: int) -> int:
        table = {
            "next_left": self.next_left,
            "prev_left": self.prev_left,
            "next_right": self.next_right,
            "prev_right": self.prev_right,
            "left_face": self.left_face,
            "right_face": self.right_face,
            "initial_vertex": self.initial_vertex,
            "terminal_vertex": self.terminal_vertex,
        }
        if query not in table:
            raise ValueError(f"unknown navigation query {query!r}")
        return table[query](e)

    # cells

    def face_edges(self, oriented_face: int) -> list[int]:
        """Edges with the given oriented face on the left, in boundary order.

        For a boundary face the chains are concatenated in order of their
        first edge.
        """
        members = np.flatnonzero(self.face_of == oriented_face)
        return _order_by_successor(members.tolist(), self.sigma, self.sigma_inv)

    def vertex_edges(self, oriented_vertex: int) -> list[int]:
        """Edges leaving the given oriented vertex, following iota o sigma^-1."""
        members = np.flatnonzero(self.vertex_of == oriented_vertex).tolist()
        succ = np.full(4 * self.num_edges, SENTINEL, dtype=np.int64)
        pred = np.full(4 * self.num_edges, SENTINEL, dtype=np.int64)
        for e in members:
            p = self.sigma_inv[e]
            if p != SENTINEL:
                succ[e] = iota(int(p))
                pred[iota(int(p))] = e
        return _order_by_successor(members, succ, pred)

    def vertex_degree(self, vertex: int) -> int:
        return len(self.vertex_edges(2 * vertex))

    def face_degree(self, face: int) -> int:
        return len(self.face_edges(2 * face))

    # serialisation

    def to_json(self) -> str:
        payload = {"faces": [list(r) for r in self.rows]}
        if self.name is not None:
            payload["name"] = self.name
        return json.dumps(payload)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return (f"<CellularSurface{label}: {self.num_faces} faces, {self.num_edges} edges, "
                f"{self.num_vertices} vertices>")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CellularSurface):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)


def _order_by_successor(members: list[int], succ, pred) -> list[int]:
    """Order a set by a partial successor map: open chains first, then cycles."""
    member_set = set(members)
    left = set(members)
    out: list[int] = []

    def walk(s: int) -> None:
        e = s
        while e != SENTINEL and e in left:
            out.append(e)
            left.discard(e)
            e = int(succ[e])

    for s in sorted(members):
        p = int(pred[s])
        if p == SENTINEL or p not in member_set:
            walk(s)
    for s in sorted(members):
        if s in left:
            walk(s)
    return out


def summary(surface: CellularSurface) -> str:
    return (f"Surface has {surface.num_faces} faces, {surface.num_edges} edges, "
            f"and {surface.num_vertices} vertices")


# construction


def build_from_face_boundaries(rows: Sequence[Sequence[int]], name: str | None = None
                               ) -> CellularSurface:
    """Build a surface from face boundary rows (SENTINEL allowed)."""
    clean: list[tuple[int, ...]] = []
    for r, row in enumerate(rows):
        entries = []
        for v in row:
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"row {r}: non-integer entry {v!r}")
            v = int(v)
            if v < SENTINEL:
                raise ValueError(f"row {r}: negative index {v}")
            entries.append(v)
        if not any(v != SENTINEL for v in entries):
            raise ValueError(f"row {r}: face without edges")
        clean.append(tuple(entries))
    rows_t = tuple(clean)

    used = [v for row in rows_t for v in row if v != SENTINEL]
    num_edges = (max(used) // 4 + 1) if used else 0
    n = 4 * num_edges

    face_of = np.full(n, SENTINEL, dtype=np.int64)
    for k, row in enumerate(rows_t):
        for v in row:
            if v == SENTINEL:
                continue
            if face_of[v] != SENTINEL:
                raise ValueError(f"duplicate edge {v} in face boundaries")
            face_of[v] = 2 * k
    for k, row in enumerate(rows_t):
        for v in row:
            if v == SENTINEL:
                continue
            m = _mirror(v)
            if face_of[m] != SENTINEL:
                raise ValueError(
                    f"edge {v} and its mirror image {m} both listed (parity violation)")
    for k, row in enumerate(rows_t):
        for v in row:
            if v != SENTINEL:
                face_of[_mirror(v)] = 2 * k + 1
    for q in range(num_edges):
        if np.all(face_of[4 * q: 4 * q + 4] == SENTINEL):
            raise ValueError(f"orphan edge {4 * q}: not used by any face")

    sigma = np.full(n, SENTINEL, dtype=np.int64)
    for row in rows_t:
        m = len(row)
        for i in range(m):
            a, b = row[i], row[(i + 1) % m]
            if a == SENTINEL or b == SENTINEL:
                continue
            sigma[a] = b
            sigma[_mirror(b)] = _mirror(a)
    sigma_inv = np.full(n, SENTINEL, dtype=np.int64)
    for a in range(n):
        b = sigma[a]
        if b != SENTINEL:
            if sigma_inv[b] != SENTINEL:
                raise ValueError("face boundaries do not define an injective successor map")
            sigma_inv[b] = a

    vertex_of, closed = _vertex_classes(n, sigma, sigma_inv)
    return CellularSurface(rows_t, num_edges, sigma, sigma_inv, face_of, vertex_of,
                           len(rows_t), len(closed), closed, name)


def _vertex_classes(n: int, sigma: np.ndarray, sigma_inv: np.ndarray):
    """Orbits (or chains) of iota o sigma^-1, numbered in tau-pairs."""

    def step(e: int) -> int:
        p = sigma_inv[e]
        return SENTINEL if p == SENTINEL else iota(int(p))

    def back(e: int) -> int:
        s = sigma[iota(e)]
        return int(s)

    vertex_of = np.full(n, SENTINEL, dtype=np.int64)
    closed: list[bool] = []

    def chain(e: int) -> tuple[list[int], bool]:
        s = e
        while True:
            p = back(s)
            if p == SENTINEL:
                break
            if p == e:
                # closed orbit
                out = [e]
                x = step(e)
                while x != e:
                    out.append(x)
                    x = step(x)
                return out, True
            s = p
        out = [s]
        x = step(s)
        while x != SENTINEL:
            out.append(x)
            x = step(x)
        return out, False

    count = 0
    for e in range(n):
        if vertex_of[e] != SENTINEL:
            continue
        members, is_closed = chain(e)
        mirror_members = [tau(x) for x in members]
        if set(members) & set(mirror_members):
            raise ValueError("vertex class is invariant under sheet swap")
        for x in members:
            vertex_of[x] = 2 * count
        for x in mirror_members:
            if vertex_of[x] != SENTINEL:
                raise ValueError("inconsistent vertex classes (tau conjugation violated)")
            vertex_of[x] = 2 * count + 1
        closed.append(is_closed)
        count += 1
    return vertex_of, closed


def from_json(text: str) -> CellularSurface:
    data = json.loads(text)
    if not isinstance(data, dict) or "faces" not in data:
        raise ValueError("surface JSON needs a 'faces' list")
    return build_from_face_boundaries(data["faces"], name=data.get("name"))


def from_polygons(polygons: Sequence[Sequence[int]], name: str | None = None
                  ) -> CellularSurface:
    """Build an orientable surface from consistently oriented vertex cycles.

    Edges used by a single polygon are dropped and replaced by SENTINEL, so
    polygons along the border become boundary faces.
    """
    index: dict[tuple[int, int], int] = {}
    direction: dict[tuple[int, int], tuple[int, int]] = {}
    uses: dict[tuple[int, int], int] = {}
    for poly in polygons:
        m = len(poly)
        for i in range(m):
            u, w = int(poly[i]), int(poly[(i + 1) % m])
            key = (min(u, w), max(u, w))
            uses[key] = uses.get(key, 0) + 1
            if uses[key] > 2:
                raise ValueError(f"edge {key} used by more than two polygons")
            if key in direction and direction[key] == (u, w):
                raise ValueError(f"edge {key} traversed twice in the same direction")
            direction.setdefault(key, (u, w))
    for poly in polygons:
        m = len(poly)
        for i in range(m):
            u, w = int(poly[i]), int(poly[(i + 1) % m])
            key = (min(u, w), max(u, w))
            if uses[key] == 2 and key not in index:
                index[key] = len(index)
    rows = []
    for poly in polygons:
        m = len(poly)
        row: list[int] = []
        for i in range(m):
            u, w = int(poly[i]), int(poly[(i + 1) % m])
            key = (min(u, w), max(u, w))
            if key not in index:
                if not row or row[-1] != SENTINEL:
                    row.append(SENTINEL)
                continue
            k = index[key]
            row.append(4 * k if direction[key] == (u, w) else 4 * k + 2)
        if len(row) > 1 and row[0] == SENTINEL and row[-1] == SENTINEL:
            row.pop()
        rows.append(row)
    return build_from_face_boundaries(rows, name=name)


# derived surfaces


def _rows_from_closed_sigma(sigma: Sequence[int]) -> list[list[int]]:
    n = len(sigma)
    seen = np.zeros(n, dtype=bool)
    rows = []
    for e in range(n):
        if seen[e]:
            continue
        orbit = [e]
        x = int(sigma[e])
        while x != e:
            if x == SENTINEL:
                raise ValueError("successor map is not a permutation")
            orbit.append(x)
            x = int(sigma[x])
        for x in orbit:
            seen[x] = True
            seen[_mirror(x)] = True
        rows.append(orbit)
    return rows


def _require_closed(surface: CellularSurface, what: str) -> None:
    if surface.has_boundary or np.any(surface.face_of == SENTINEL):
        raise ValueError(f"{what} requires a surface without boundary")


def poincare_dual(surface: CellularSurface) -> CellularSurface:
    """Dual surface: faces and vertices swap roles, edges are preserved."""
    _require_closed(surface, "poincare_dual")
    n = surface.num_oriented_edges
    relabel = np.array([(e & ~3) | (0, 3, 2, 1)[e & 3] for e in range(n)], dtype=np.int64)
    dual_sigma = np.empty(n, dtype=np.int64)
    for e in range(n):
        dual_sigma[relabel[e]] = relabel[iota(int(surface.sigma_inv[e]))]
    return build_from_face_boundaries(_rows_from_closed_sigma(dual_sigma))


def medial(surface: CellularSurface) -> CellularSurface:
    """Medial decomposition: one face per face and per vertex, 4-valent vertices."""
    _require_closed(surface, "medial")
    n = surface.num_oriented_edges
    sig, sig_inv = surface.sigma, surface.sigma_inv
    m_of = np.full(n, SENTINEL, dtype=np.int64)     # corner c -> medial edge on face side
    mp_of = np.full(n, SENTINEL, dtype=np.int64)    # corner c -> reversed medial edge
    j = 0
    for c in range(n):
        if m_of[c] != SENTINEL:
            continue
        partner = _mirror(int(sig[c]))
        if partner == c:
            raise ValueError("degenerate corner in medial construction")
        m_of[c], mp_of[c] = 4 * j, 4 * j + 2
        mp_of[partner], m_of[partner] = 4 * j + 1, 4 * j + 3
        j += 1
    med_sigma = np.full(4 * j, SENTINEL, dtype=np.int64)
    for e in range(n):
        med_sigma[m_of[e]] = m_of[int(sig[e])]
        med_sigma[mp_of[e]] = mp_of[int(sig_inv[iota(e)])]
    return build_from_face_boundaries(_rows_from_closed_sigma(med_sigma))


# canonical form


def canonical_form(surface: CellularSurface, start: int = 0) -> tuple:
    """Breadth-first relabelling from ``start``; equal forms mean isomorphic surfaces.

    The form records the relabelled successor map and the face/vertex
    partitions, so it determines the surface up to relabelling of edges.
    """
    n = surface.num_oriented_edges
    if n == 0:
        return ()
    label = np.full(n, SENTINEL, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    q = 0

    def assign(x: int) -> None:
        nonlocal q
        label[x] = 4 * q
        label[tau(x)] = 4 * q + 1
        label[iota(x)] = 4 * q + 2
        label[_mirror(x)] = 4 * q + 3
        q += 1

    for s in [start] + list(range(n)):
        if visited[s]:
            continue
        if label[s] == SENTINEL:
            assign(s)
        visited[s] = True
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in (surface.sigma[x], surface.sigma_inv[x], iota(x), tau(x)):
                y = int(y)
                if y == SENTINEL:
                    continue
                if label[y] == SENTINEL:
                    assign(y)
                if not visited[y]:
                    visited[y] = True
                    queue.append(y)
    relabelled = np.full(n, SENTINEL, dtype=np.int64)
    has_face = np.zeros(n, dtype=bool)
    for x in range(n):
        s = int(surface.sigma[x])
        relabelled[label[x]] = SENTINEL if s == SENTINEL else label[s]
        has_face[label[x]] = surface.face_of[x] != SENTINEL
    return tuple(relabelled.tolist()), tuple(has_face.tolist())


def isomorphic(a: CellularSurface, b: CellularSurface) -> bool:
    """Combinatorial equivalence up to relabelling (small surfaces only)."""
    if (a.num_faces, a.num_edges, a.num_vertices) != (b.num_faces, b.num_edges, b.num_vertices):
        return False
    if a.num_edges == 0:
        return True
    target = canonical_form(a, 0)
    return any(canonical_form(b, s) == target for s in range(b.num_oriented_edges))


# simple moves

MOVES = ("slide_edge_left", "slide_edge_right", "split_edge_along", "split_edge_across",
         "contract_edge", "truncate_vertex")


def _editable_rows(surface: CellularSurface, what: str) -> list[list[int]]:
    _require_closed(surface, what)
    return [list(r) for r in surface.rows]


def _locate(rows: list[list[int]], x: int) -> tuple[int, int] | None:
    for r, row in enumerate(rows):
        for i, v in enumerate(row):
            if v == x:
                return r, i
    return None


def _mirror_row(row: list[int]) -> list[int]:
    return [_mirror(v) for v in reversed(row)]


def _expose(rows: list[list[int]], x: int) -> int:
    """Make ``x`` appear literally in ``rows`` (mirroring its row if needed)."""
    hit = _locate(rows, x)
    if hit is not None:
        return hit[0]
    hit = _locate(rows, _mirror(x))
    if hit is None:
        raise ValueError(f"edge {x} not found in face boundaries")
    rows[hit[0]] = _mirror_row(rows[hit[0]])
    return hit[0]


def _partner(rows: list[list[int]], x: int) -> int:
    """The other occurrence of x's unoriented edge: iota(x) or tau(x)."""
    for y in (iota(x), tau(x)):
        if _locate(rows, y) is not None:
            return y
    raise ValueError(f"edge {x} has no second occurrence")


def _rotate_to(row: list[int], x: int) -> list[int]:
    i = row.index(x)
    return row[i:] + row[:i]


def _expand(rows: list[list[int]], table: dict[int, list[int]]) -> list[list[int]]:
    return [[w for v in row for w in table.get(v, [v])] for row in rows]


def split_edge_along(surface: CellularSurface, x: int) -> tuple[CellularSurface, int]:
    """Double edge x, adding a digon face. Returns the new oriented edge."""
    rows = _editable_rows(surface, "split_edge_along")
    surface._check(x)
    _expose(rows, x)
    y = _partner(rows, x)
    n = 4 * surface.num_edges
    rows = _expand(rows, {y: [iota(n) if y == iota(x) else tau(n)]})
    rows.append([iota(x), n])
    return build_from_face_boundaries(rows), n


def split_edge_across(surface: CellularSurface, x: int) -> tuple[CellularSurface, int]:
    """Subdivide edge x by a new vertex. Returns the new oriented edge."""
    rows = _editable_rows(surface, "split_edge_across")
    surface._check(x)
    _expose(rows, x)
    y = _partner(rows, x)
    n = 4 * surface.num_edges
    if y == iota(x):
        table = {x: [x, n], y: [iota(n), iota(x)]}
    else:
        table = {x: [x, n], y: [tau(x), tau(n)]}
    return build_from_face_boundaries(_expand(rows, table)), n


def _slide(surface: CellularSurface, x: int, left: bool) -> tuple[CellularSurface, None]:
    rows = _editable_rows(surface, "slide")
    surface._check(x)
    ra = _expose(rows, x)
    y = _partner(rows, x)
    rb = _locate(rows, y)[0]
    if ra == rb:
        raise ValueError("cannot slide an edge with the same face on both sides")
    if y == tau(x):
        rows[rb] = _mirror_row(rows[rb])
    a_row = _rotate_to(rows[ra], x)
    b_row = _rotate_to(rows[rb], iota(x))
    if len(a_row) < 3 or len(b_row) < 3:
        raise ValueError("degenerate slide: adjacent face has fewer than three sides")
    b, rest_a, a = a_row[1], a_row[2:-1], a_row[-1]
    d, rest_b, c = b_row[1], b_row[2:-1], b_row[-1]
    if left:
        new_a = [x] + rest_a + [a, d]
        new_b = [iota(x)] + rest_b + [c, b]
    else:
        new_a = [x, c, b] + rest_a
        new_b = [iota(x), a, d] + rest_b
    rows[ra], rows[rb] = new_a, new_b
    return build_from_face_boundaries(rows), None


def slide_edge_left(surface: CellularSurface, x: int):
    return _slide(surface, x, left=True)


def slide_edge_right(surface: CellularSurface, x: int):
    return _slide(surface, x, left=False)


def contract_edge(surface: CellularSurface, x: int) -> tuple[CellularSurface, None]:
    """Collapse edge x to a point; the end vertices merge."""
    rows = _editable_rows(surface, "contract_edge")
    surface._check(x)
    if surface.initial_vertex(x) // 2 == surface.terminal_vertex(x) // 2:
        raise ValueError("cannot contract a loop")
    q = x // 4
    new_rows = []
    for row in rows:
        kept = [v - 4 if v // 4 > q else v for v in row if v // 4 != q]
        if not kept:
            raise ValueError("contraction would leave a face without edges")
        new_rows.append(kept)
    return build_from_face_boundaries(new_rows), None


def truncate_vertex(surface: CellularSurface, vertex: int) -> tuple[CellularSurface, int]:
    """Cut off a vertex of degree d: adds d edges and one face.

    Returns the index of the new unoriented face.
    """
    _require_closed(surface, "truncate_vertex")
    if not 0 <= vertex < surface.num_vertices:
        raise IndexError(f"vertex {vertex} out of range")
    chain = surface.vertex_edges(2 * vertex)
    d = len(chain)
    base = 4 * surface.num_edges
    sig = np.full(base + 4 * d, SENTINEL, dtype=np.int64)
    sig[:base] = surface.sigma

    def link(a: int, b: int) -> None:
        sig[a] = b
        sig[_mirror(b)] = _mirror(a)

    new = [base + 4 * i for i in range(d)]
    for i, e in enumerate(chain):
        link(int(surface.sigma_inv[e]), new[i])
        link(new[i], e)
        link(iota(new[i]), iota(new[(i + 1) % d]))
    result = build_from_face_boundaries(_rows_from_closed_sigma(sig))
    return result, int(result.face_of[iota(new[0])]) // 2


def apply_move(surface: CellularSurface, move: str, target: int):
    """Dispatch one of the simple moves; returns (surface, new element or None)."""
    table = {
        "slide_edge_left": slide_edge_left,
        "slide_edge_right": slide_edge_right,
        "split_edge_along": split_edge_along,
        "split_edge_across": split_edge_across,
        "contract_edge": contract_edge,
        "truncate_vertex": truncate_vertex,
    }
    if move not in table:
        raise ValueError(f"unknown move {move!r}")
    return table[move](surface, target)


# Z2 homology


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of row vectors packed into Python integers."""
    pivots: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in pivots:
                r ^= pivots[top]
            else:
                pivots[top] = r
                rank += 1
                break
    return rank


def boundary_rows(surface: CellularSurface) -> tuple[list[int], list[int]]:
    """Face->edge and edge->vertex incidence mod 2, one packed row per cell."""
    d2 = [0] * surface.num_faces
    for x in range(surface.num_oriented_edges):
        f = surface.face_of[x]
        if f != SENTINEL and f % 2 == 0:
            d2[f // 2] ^= 1 << (x // 4)
    d1 = []
    for k in range(surface.num_edges):
        u = surface.vertex_of[4 * k] // 2
        w = surface.vertex_of[4 * k + 2] // 2
        d1.append((1 << int(u)) ^ (1 << int(w)))
    return d2, d1


def betti_numbers(surface: CellularSurface) -> tuple[int, int, int]:
    """(h0, h1, h2) over Z2 for a closed surface."""
    _require_closed(surface, "homology")
    d2, d1 = boundary_rows(surface)
    r2, r1 = gf2_rank(d2), gf2_rank(d1)
    h0 = surface.num_vertices - r1
    h1 = surface.num_edges - r1 - r2
    h2 = surface.num_faces - r2
    return h0, h1, h2


@dataclass(frozen=True)
class EulerReport:
    regions: int
    handles: int
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def _components(n: int, pairs: Iterable[tuple[int, int]]) -> int:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    count = n
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


def validate_subcomplex(surface: CellularSurface, gamma: Subcomplex) -> None:
    if not gamma.vertex_set and not gamma.edge_set:
        raise ValueError("subcomplex is empty")
    for k in gamma.edge_set:
        if not 0 <= k < surface.num_edges:
            raise ValueError(f"subcomplex edge {k} out of range")
        for x in (4 * k, 4 * k + 2):
            if surface.vertex_of[x] // 2 not in gamma.vertex_set:
                raise ValueError(f"subcomplex edge {k} misses its end vertex")
    for v in gamma.vertex_set:
        if not 0 <= v < surface.num_vertices:
            raise ValueError(f"subcomplex vertex {v} out of range")


def general_euler(surface: CellularSurface, gamma: Subcomplex) -> EulerReport:
    """Both sides of the Euler identity for a graph embedded in a closed surface.

    The complement of the graph deformation retracts onto the complex with
    the faces as 0-cells, the edges off the graph as 1-cells and the
    vertices off the graph as 2-cells; its components are the regions and
    its first Betti number is the total number of handles.
    """
    _require_closed(surface, "general_euler")
    validate_subcomplex(surface, gamma)
    free_edges = [k for k in range(surface.num_edges) if k not in gamma.edge_set]
    free_vertices = [v for v in range(surface.num_vertices) if v not in gamma.vertex_set]
    adjacency = [(int(surface.face_of[4 * k] // 2), int(surface.face_of[4 * k + 2] // 2))
                 for k in free_edges]
    regions = _components(surface.num_faces, adjacency)
    column = {k: i for i, k in enumerate(free_edges)}
    d1 = [(1 << a) ^ (1 << b) for a, b in adjacency]
    d2 = []
    for v in free_vertices:
        row = 0
        for x in np.flatnonzero(surface.vertex_of == 2 * v):
            row ^= 1 << column[int(x) // 4]
        d2.append(row)
    handles = len(free_edges) - gf2_rank(d1) - gf2_rank(d2)
    lhs = regions - len(gamma.edge_set) + len(gamma.vertex_set)
    rhs = surface.euler_characteristic + handles
    return EulerReport(regions, handles, lhs, rhs)


def homology(surface: CellularSurface, gamma: Subcomplex | None = None):
    """Betti numbers, plus the Euler identity report when a graph is given."""
    h = betti_numbers(surface)
    if gamma is None:
        return h
    return h, general_euler(surface, gamma)


def is_simply_connected(surface: CellularSurface) -> bool:
    """Z2 test: interior-vertex cycles span the cycle space of the face graph.

    Works for closed surfaces and for surfaces with boundary faces.
    """
    interior = surface.interior_edges()
    column = {k: i for i, k in enumerate(interior)}
    pairs = [(int(surface.face_of[4 * k] // 2), int(surface.face_of[4 * k + 2] // 2))
             for k in interior]
    comps = _components(surface.num_faces, pairs)
    cycle_dim = len(interior) - surface.num_faces + comps
    rows = []
    for v in range(surface.num_vertices):
        if surface.is_boundary_vertex(v):
            continue
        row = 0
        for x in np.flatnonzero(surface.vertex_of == 2 * v):
            row ^= 1 << column[int(x) // 4]
        rows.append(row)
    return gf2_rank(rows) == cycle_dim


# puncture


@dataclass(frozen=True)
class Puncture:
    surface: CellularSurface
    phi: np.ndarray
    theta: np.ndarray
    face_map: tuple[int, ...]
    edge_map: tuple[int, ...]


def puncture_at_vertex(surface: CellularSurface, vertex: int, theta) -> Puncture:
    """Remove a vertex with its incident faces; surviving border faces become
    boundary faces with Neumann angle 2 pi - sum of 2 theta* over removed sides.

    ``face_map``/``edge_map`` give the original index of each surviving
    face/edge.
    """
    _require_closed(surface, "puncture_at_vertex")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (surface.num_edges,):
        raise ValueError("theta needs one entry per edge")
    if np.any(~(theta > 0)) or np.any(~(theta < np.pi)):
        raise ValueError("theta must lie in (0, pi)")
    if not 0 <= vertex < surface.num_vertices:
        raise IndexError(f"vertex {vertex} out of range")
    star = np.flatnonzero(surface.vertex_of // 2 == vertex)
    removed_faces = {int(surface.face_of[x]) // 2 for x in star}
    removed_faces |= {int(surface.face_of[iota(int(x))]) // 2 for x in star}
    kept_faces = [f for f in range(surface.num_faces) if f not in removed_faces]
    if len(kept_faces) < 2:
        raise ValueError("puncture leaves fewer than two faces")
    kept_edges = [k for k in range(surface.num_edges)
                  if surface.face_of[4 * k] // 2 in kept_faces
                  and surface.face_of[4 * k + 2] // 2 in kept_faces]
    new_index = {k: i for i, k in enumerate(kept_edges)}
    star_theta = np.pi - theta
    rows = []
    phi = []
    for f in kept_faces:
        row: list[int] = []
        lost = 0.0
        for v in surface.rows[f]:
            if v != SENTINEL and v // 4 in new_index:
                row.append(4 * new_index[v // 4] + (v & 3))
            else:
                if v != SENTINEL:
                    lost += 2.0 * star_theta[v // 4]
                if not row or row[-1] != SENTINEL:
                    row.append(SENTINEL)
        if len(row) > 1 and row[0] == SENTINEL and row[-1] == SENTINEL:
            row.pop()
        rows.append(row)
        phi.append(2.0 * np.pi - lost)
    result = build_from_face_boundaries(rows)
    return Puncture(result, np.array(phi), theta[kept_edges].copy(),
                    tuple(kept_faces), tuple(kept_edges))


# example surfaces

CUBE_ROWS = [[0, 4, 8, 12], [2, 16, 32, 22], [6, 20, 36, 26], [10, 24, 40, 30],
             [14, 28, 44, 18], [34, 46, 42, 38]]
PROJECTIVIZED_CUBE_ROWS = [[0, 4, 8, 12], [2, 16, 9, 22], [6, 20, 13, 17]]


def cube() -> CellularSurface:
    return build_from_face_boundaries(CUBE_ROWS, name="cube")


def projectivized_cube() -> CellularSurface:
    return build_from_face_boundaries(PROJECTIVIZED_CUBE_ROWS, name="projectivized_cube")


def disc_triangle() -> CellularSurface:
    return build_from_face_boundaries([[0, 4, 8]], name="disc")


def tetrahedron() -> CellularSurface:
    return from_polygons([[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]], name="tetrahedron")


def prism(n: int) -> CellularSurface:
    """Closed n-gonal prism (two n-gons, n quadrilaterals)."""
    if n < 3:
        raise ValueError("prism needs n >= 3")
    top = [n + i for i in range(n)]
    polys = [list(range(n))[::-1], top]
    for i in range(n):
        j = (i + 1) % n
        polys.append([i, j, n + j, n + i])
    return from_polygons(polys, name=f"prism{n}")


def _hull_polygons(points: np.ndarray) -> list[list[int]]:
    """Triangles of the convex hull, oriented counterclockwise from outside."""
    from scipy.spatial import ConvexHull

    hull = ConvexHull(points)
    tris = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        a, b, c = (int(i) for i in simplex)
        normal = np.cross(points[b] - points[a], points[c] - points[a])
        if np.dot(normal, eq[:3]) < 0:
            b, c = c, b
        tris.append([a, b, c])
    return tris


def icosahedron() -> CellularSurface:
    g = (1.0 + 5.0 ** 0.5) / 2.0
    pts = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            pts += [(0.0, s1, s2 * g), (s1, s2 * g, 0.0), (s2 * g, 0.0, s1)]
    return from_polygons(_hull_polygons(np.array(pts)), name="icosahedron")


def dodecahedron() -> CellularSurface:
    d = poincare_dual(icosahedron())
    return build_from_face_boundaries(d.rows, name="dodecahedron")


def torus_grid(m: int, n: int) -> CellularSurface:
    """m x n quadrilateral grid on the torus (mn faces, 2mn edges, mn vertices)."""
    if m < 1 or n < 1:
        raise ValueError("grid dimensions must be positive")

    def horizontal(i: int, j: int) -> int:
        return (i % m) + m * (j % n)

    def vertical(i: int, j: int) -> int:
        return m * n + (i % m) + m * (j % n)

    rows = []
    for j in range(n):
        for i in range(m):
            rows.append([4 * horizontal(i, j), 4 * vertical(i + 1, j),
                         4 * horizontal(i, j + 1) + 2, 4 * vertical(i, j) + 2])
    return build_from_face_boundaries(rows, name=f"torus{m}x{n}")


def quad_torus() -> CellularSurface:
    return build_from_face_boundaries(torus_grid(2, 2).rows, name="quad_torus")


def quad_mesh(m: int = 4, n: int = 4) -> CellularSurface:
    """m x n grid of squares in the disc; the outer ring are boundary faces."""
    def vid(i: int, j: int) -> int:
        return i + (m + 1) * j

    polys = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
             for j in range(n) for i in range(m)]
    return from_polygons(polys, name="quadmesh")


def hex_grid(rings: int = 2) -> CellularSurface:
    """Hexagons of a triangular lattice patch; the outer ring are boundary faces."""
    centers = [(a, b) for a in range(-rings, rings + 1) for b in range(-rings, rings + 1)
               if abs(a + b) <= rings]
    corner_dirs = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    # hexagon corners sit at centroids of lattice triangles; key them exactly
    corners: dict[tuple[int, int], int] = {}
    polys = []
    for a, b in centers:
        poly = []
        for k in range(6):
            d1, d2 = corner_dirs[k], corner_dirs[(k + 1) % 6]
            key = (3 * a + d1[0] + d2[0], 3 * b + d1[1] + d2[1])
            poly.append(corners.setdefault(key, len(corners)))
        polys.append(poly)
    return from_polygons(polys, name="hexgrid")


def truncated_cube_orthogonal() -> CellularSurface:
    """Medial of the vertex-truncated cube: face and vertex circles of an
    orthogonal pattern whose face circles form a truncated-cube packing."""
    s = cube()
    for _ in range(8):
        # truncate original-degree-3 vertices one at a time; original vertices
        # are the ones still touching only original edges
        target = next(v for v in range(s.num_vertices)
                      if all(x // 4 < 12 for x in s.vertex_edges(2 * v)))
        s, _ = truncate_vertex(s, target)
    m = medial(s)
    return build_from_face_boundaries(m.rows, name="truncated_cube")


NAMED_SURFACES = {
    "cube": cube,
    "dodecahedron": dodecahedron,
    "icosahedron": icosahedron,
    "tetrahedron": tetrahedron,
    "projectivized_cube": projectivized_cube,
    "quad_torus": quad_torus,
    "quadmesh": quad_mesh,
    "hexgrid": hex_grid,
    "truncated_cube": truncated_cube_orthogonal,
}


def named_surface(name: str) -> CellularSurface:
    if name not in NAMED_SURFACES:
        raise ValueError(f"unknown example surface {name!r}; choose from {sorted(NAMED_SURFACES)}")
    return NAMED_SURFACES[name]()
