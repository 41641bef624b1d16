"""Binary contraction trees of a collapse map.

Vertices are identified by ``(kind, index)`` with kind one of ``"root"``
(``w_1..w_k``), ``"internal"`` (``v_1..v_r``, one per column) and ``"leaf"``
(``u_1..u_{k+r}``, one per particle).  Reading the operator string right to left,
column ``l`` merges particle ``k+l`` into particle ``rho[l]``; the internal vertex
``v_l`` therefore has a *kept* child (the current holder of row ``rho[l]``) and an
*absorbed* child (the current holder of row ``k+l``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .boardgame import CollapseMap

Vertex = Tuple[str, int]

ROOT, INTERNAL, LEAF = "root", "internal", "leaf"


@dataclass(frozen=True)
class TreeForest:
    k: int
    r: int
    rho: Tuple[int, ...]
    root_child: Tuple[Vertex, ...]  # index j-1 -> child of w_j
    kept: Tuple[Vertex, ...]  # index l-1 -> kept child of v_l
    absorbed: Tuple[Vertex, ...]  # index l-1 -> absorbed child of v_l
    distinguished_tree: int

    @property
    def vertices(self) -> List[Vertex]:
        return (
            [(ROOT, j) for j in range(1, self.k + 1)]
            + [(INTERNAL, l) for l in range(1, self.r + 1)]
            + [(LEAF, i) for i in range(1, self.k + self.r + 1)]
        )

    def children(self, v: Vertex) -> Tuple[Vertex, ...]:
        kind, idx = v
        if kind == ROOT:
            return (self.root_child[idx - 1],)
        if kind == INTERNAL:
            return (self.kept[idx - 1], self.absorbed[idx - 1])
        return ()

    def parent(self, v: Vertex) -> Optional[Vertex]:
        return self._parents().get(v)

    def _parents(self) -> Dict[Vertex, Vertex]:
        out = {}
        for v in self.vertices:
            for c in self.children(v):
                out[c] = v
        return out

    def kind(self, v: Vertex) -> str:
        """Kind tag, splitting leaves into regular and distinguished."""
        if v[0] != LEAF:
            return v[0]
        if v in (self.kept[self.r - 1], self.absorbed[self.r - 1]):
            return "leaf-distinguished"
        return "leaf-regular"

    def tree_vertices(self, j: int) -> List[Vertex]:
        """Vertices of tree ``tau_j`` in depth-first order starting from ``w_j``."""
        out = []
        stack = [(ROOT, j)]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children(v)))
        return out

    def internal_of(self, j: int) -> List[int]:
        return sorted(idx for kind, idx in self.tree_vertices(j) if kind == INTERNAL)

    def leaves_of(self, j: int) -> List[int]:
        return sorted(idx for kind, idx in self.tree_vertices(j) if kind == LEAF)

    def is_distinguished(self, j: int) -> bool:
        return j == self.distinguished_tree

    def adjacency_text(self) -> str:
        lines = [f"forest k={self.k} r={self.r} rho={list(self.rho)}"]
        for j in range(1, self.k + 1):
            tag = "distinguished" if self.is_distinguished(j) else "regular"
            lines.append(f"tree {j} ({tag}): internal={self.internal_of(j)} leaves={self.leaves_of(j)}")
            for v in self.tree_vertices(j):
                for c in self.children(v):
                    lines.append(f"  {_name(v)} -> {_name(c)} [{self.kind(c)}]")
        return "\n".join(lines)

    def to_dot(self) -> str:
        lines = ["digraph forest {", "  rankdir=LR;"]
        for v in self.vertices:
            shape = {"root": "box", "internal": "circle"}.get(v[0], "plaintext")
            bold = ""
            j = self.tree_of(v)
            if j == self.distinguished_tree:
                bold = ", penwidth=2"
            lines.append(f'  {_name(v)} [shape={shape}{bold}];')
        for v in self.vertices:
            for c in self.children(v):
                lines.append(f"  {_name(v)} -> {_name(c)};")
        lines.append("}")
        return "\n".join(lines)

    def tree_of(self, v: Vertex) -> int:
        parents = self._parents()
        while v[0] != ROOT:
            v = parents[v]
        return v[1]


def _name(v: Vertex) -> str:
    return {"root": "w", "internal": "v", "leaf": "u"}[v[0]] + str(v[1])


def build_forest(m: CollapseMap) -> TreeForest:
    k, r = m.k, m.r
    holder: Dict[int, Vertex] = {p: (LEAF, p) for p in range(1, k + r + 1)}
    kept: List[Vertex] = [None] * r  # type: ignore[list-item]
    absorbed: List[Vertex] = [None] * r  # type: ignore[list-item]
    for col in range(r, 0, -1):
        row, new = m.operator(col)
        kept[col - 1] = holder[row]
        absorbed[col - 1] = holder.pop(new)
        holder[row] = (INTERNAL, col)
    root_child = tuple(holder[j] for j in range(1, k + 1))
    forest = TreeForest(k, r, m.rho, root_child, tuple(kept), tuple(absorbed), 0)
    dist = forest.tree_of((INTERNAL, r))
    return TreeForest(k, r, m.rho, root_child, tuple(kept), tuple(absorbed), dist)


@dataclass(frozen=True)
class TreeLabeling:
    """Internal labeling of one tree.

    Internal vertices carry labels ``1..m`` in increasing global column order;
    leaves carry ``m+1..2m+1`` in the order of their local particle index.
    ``sigma[a-1]`` holds the internal row ``sigma_j(a+1)`` of the operator at
    label ``a``.  ``kept``/``absorbed`` give the semantic children used by the
    kernel recursion, while ``kappa_minus``/``kappa_plus`` follow the
    convention in which ``kappa_plus`` points towards the distinguished vertex
    whenever the subtree contains it, and to the absorbed child otherwise.
    """

    j: int
    m: int
    r: int
    distinguished: bool
    sigma: Tuple[int, ...]
    kept: Dict[int, int]
    absorbed: Dict[int, int]
    kappa_minus: Dict[int, int]
    kappa_plus: Dict[int, int]
    time_binding: Dict[int, int]
    particles: Tuple[int, ...]  # local particle index i -> global particle

    def is_leaf(self, label: int) -> bool:
        return label > self.m

    def time_of(self, label: int) -> int:
        """Global time index attached to a vertex label; leaves sit at ``t_r``."""
        return self.r if self.is_leaf(label) else self.time_binding[label]

    def children(self, label: int) -> Tuple[int, int]:
        return self.kept[label], self.absorbed[label]

    def subtree(self, label: int) -> List[int]:
        out, stack = [], [label]
        while stack:
            a = stack.pop()
            out.append(a)
            if not self.is_leaf(a):
                stack.extend(self.children(a))
        return out

    def leaf_is_distinguished(self, label: int) -> bool:
        return self.distinguished and label in self.children(self.m)

    def kappa_plus_power(self, q: int, start: int = 1) -> int:
        a = start
        for _ in range(q):
            a = self.kappa_plus[a]
        return a


def extract_labeling(f: TreeForest, j: int) -> TreeLabeling:
    cols = f.internal_of(j)
    if not cols:
        raise ValueError(f"tree {j} is a bare edge with no internal vertices")
    m = len(cols)
    label_of_col = {c: a for a, c in enumerate(cols, start=1)}
    local = {j: 1}
    for a, c in enumerate(cols, start=1):
        local[f.k + c] = a + 1
    sigma = tuple(local[f.rho[c - 1]] for c in cols)

    def label(v: Vertex) -> int:
        kind, idx = v
        return label_of_col[idx] if kind == INTERNAL else m + local[idx]

    kept = {label_of_col[c]: label(f.kept[c - 1]) for c in cols}
    absorbed = {label_of_col[c]: label(f.absorbed[c - 1]) for c in cols}
    distinguished = f.is_distinguished(j)

    on_path = set()
    if distinguished:
        # walk up from the distinguished vertex m to the root label 1
        parent = {}
        for a in kept:
            parent[kept[a]] = a
            parent[absorbed[a]] = a
        a = m
        while a in parent:
            on_path.add(parent[a])
            a = parent[a]
    kminus, kplus = {}, {}
    for a in kept:
        if a in on_path:
            towards = kept[a] if _reaches(kept[a], m, kept, absorbed) else absorbed[a]
            other = absorbed[a] if towards == kept[a] else kept[a]
            kplus[a], kminus[a] = towards, other
        else:
            kminus[a], kplus[a] = kept[a], absorbed[a]

    particles = tuple(sorted(local, key=local.get))
    return TreeLabeling(
        j=j,
        m=m,
        r=f.r,
        distinguished=distinguished,
        sigma=sigma,
        kept=kept,
        absorbed=absorbed,
        kappa_minus=kminus,
        kappa_plus=kplus,
        time_binding={a: c for c, a in label_of_col.items()},
        particles=particles,
    )


def _reaches(start: int, target: int, kept, absorbed) -> bool:
    stack = [start]
    while stack:
        a = stack.pop()
        if a == target:
            return True
        if a in kept:
            stack.extend((kept[a], absorbed[a]))
    return False


def all_labelings(f: TreeForest) -> Dict[int, Optional[TreeLabeling]]:
    """Labelings per tree; bare-edge trees map to ``None``."""
    return {j: (extract_labeling(f, j) if f.internal_of(j) else None) for j in range(1, f.k + 1)}


def subtree_stats(l: TreeLabeling, alpha: int) -> Tuple[int, int]:
    """``(d, b)``: internal vertices and regular leaves in the subtree at ``alpha``."""
    if not 1 <= alpha <= l.m:
        raise ValueError(f"label {alpha} is not an internal vertex of a tree with m={l.m}")
    d = b = 0
    for a in l.subtree(alpha):
        if l.is_leaf(a):
            b += not l.leaf_is_distinguished(a)
        else:
            d += 1
    return d, b


def reassemble(f: TreeForest) -> Tuple[int, ...]:
    """Rebuild the global ``rho`` from the per-tree labelings and time bindings."""
    rho = [0] * f.r
    for lab in all_labelings(f).values():
        if lab is None:
            continue
        for a in range(1, lab.m + 1):
            col = lab.time_binding[a]
            rho[col - 1] = lab.particles[lab.sigma[a - 1] - 1]
    return tuple(rho)
