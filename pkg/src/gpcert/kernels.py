"""Signed separable kernel expressions, the tree recursion and the bound ledger.

A one-particle kernel is a finite signed sum ``sum c * chi(x) * conj(psi)(x')``.
Factors are symbolic: ``phi``, the opaque cubic factor ``psi`` (the
distinguished symbol) or a cubic pointwise product of factors, each carrying a
chain of free propagators ``U_{a;b} = exp(i (t_a - t_b) Laplacian)``.  Time
index 0 is the horizon ``t``; indices ``1..r`` are the Duhamel times.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .boardgame import CollapseMap
from .trees import TreeForest, TreeLabeling, all_labelings, build_forest, subtree_stats

PHI, PSI, PROD = "phi", "psi", "prod"

Chain = Tuple[Tuple[int, int], ...]


def merge_chain(chain: Chain, t_from: int, t_to: int) -> Chain:
    """Append ``U_{from;to}`` (applied after the existing chain) with group-law merging."""
    if t_from == t_to:
        return chain
    if chain and chain[-1][0] == t_to:
        a, c = t_from, chain[-1][1]
        rest = chain[:-1]
        return rest if a == c else rest + ((a, c),)
    return chain + ((t_from, t_to),)


@dataclass(frozen=True)
class FactorExpr:
    base: str
    children: Tuple[Tuple["FactorExpr", bool], ...] = ()  # (factor, conjugated)
    chain: Chain = ()
    _h: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        # deep expressions are hashed often during evaluation, so cache it
        object.__setattr__(self, "_h", hash((self.base, self.children, self.chain)))
        if self.base == PROD and len(self.children) != 3:
            raise ValueError("pointwise products must have exactly three factors")
        if self.base != PROD and self.children:
            raise ValueError(f"symbol {self.base} takes no children")

    def __hash__(self):
        return self._h

    @property
    def distinguished(self) -> bool:
        if self.base == PSI:
            return True
        return any(c.distinguished for c, _ in self.children)

    def propagate(self, t_from: int, t_to: int) -> "FactorExpr":
        return FactorExpr(self.base, self.children, merge_chain(self.chain, t_from, t_to))

    def times(self) -> set:
        out = {t for pair in self.chain for t in pair}
        for c, _ in self.children:
            out |= c.times()
        return out

    def shape(self) -> str:
        if self.base == PROD:
            inner = ",".join(("~" if cj else "") + c.shape() for c, cj in self.children)
            core = f"[{inner}]"
        else:
            core = self.base
        if self.chain:
            core = "U" + "".join(f"({a},{b})" for a, b in reversed(self.chain)) + core
        return core

    def to_json(self):
        d = {"base": self.base, "chain": [list(p) for p in self.chain]}
        if self.children:
            d["children"] = [{"conj": cj, "factor": c.to_json()} for c, cj in self.children]
        return d


PHI_F = FactorExpr(PHI)
PSI_F = FactorExpr(PSI)


def product(a: FactorExpr, b: FactorExpr, c: FactorExpr, conj=(False, False, True)) -> FactorExpr:
    return FactorExpr(PROD, tuple(zip((a, b, c), conj)))


Term = Tuple[int, FactorExpr, FactorExpr]


@dataclass(frozen=True)
class OneParticleKernelExpr:
    terms: Tuple[Term, ...]

    def __len__(self):
        return len(self.terms)

    def propagate(self, t_from: int, t_to: int) -> "OneParticleKernelExpr":
        return OneParticleKernelExpr(
            tuple((c, l.propagate(t_from, t_to), r.propagate(t_from, t_to)) for c, l, r in self.terms)
        )

    def distinguished_counts(self) -> List[int]:
        return [int(l.distinguished) + int(r.distinguished) for _, l, r in self.terms]

    def times(self) -> set:
        out = set()
        for _, l, r in self.terms:
            out |= l.times() | r.times()
        return out

    def listing(self) -> List[str]:
        rows = []
        for c, l, r in self.terms:
            flag = "D" if (l.distinguished or r.distinguished) else "-"
            rows.append(f"{'+' if c > 0 else '-'} {flag} {l.shape()} | {r.shape()}")
        return rows

    def to_json(self):
        return [{"sign": c, "left": l.to_json(), "right": r.to_json()} for c, l, r in self.terms]


RANK1 = OneParticleKernelExpr(((1, PHI_F, PHI_F),))


@dataclass(frozen=True)
class MultiParticleKernelExpr:
    slots: Tuple[OneParticleKernelExpr, ...]

    @property
    def n(self) -> int:
        return len(self.slots)


def rank1_product(n: int) -> MultiParticleKernelExpr:
    if n < 1:
        raise ValueError("an n-particle product needs n >= 1")
    return MultiParticleKernelExpr((RANK1,) * n)


def contract(kept: OneParticleKernelExpr, absorbed: OneParticleKernelExpr) -> OneParticleKernelExpr:
    """``B = B+ - B-`` applied to ``kept (x) absorbed`` with the absorbed pair contracted."""
    out = []
    for ca, chi_a, psi_a in kept.terms:
        for cb, chi_b, psi_b in absorbed.terms:
            c = ca * cb
            out.append((c, product(chi_a, chi_b, psi_b), psi_a))
            out.append((-c, chi_a, product(psi_a, psi_b, chi_b)))
    return OneParticleKernelExpr(tuple(out))


def apply_b(j: int, expr: MultiParticleKernelExpr) -> MultiParticleKernelExpr:
    """Contract slot ``j`` (1-based) with the last slot."""
    n = expr.n
    if n < 2:
        raise ValueError("contraction needs at least two slots")
    if not 1 <= j < n:
        raise IndexError(f"slot {j} out of range 1..{n - 1}")
    slots = list(expr.slots)
    last = slots.pop()
    slots[j - 1] = contract(slots[j - 1], last)
    return MultiParticleKernelExpr(tuple(slots))


def apply_propagator(
    expr: MultiParticleKernelExpr, slots: Optional[Sequence[int]], t_from: int, t_to: int
) -> MultiParticleKernelExpr:
    chosen = set(range(1, expr.n + 1)) if slots is None else set(slots)
    for s in chosen:
        if not 1 <= s <= expr.n:
            raise IndexError(f"slot {s} out of range")
    return MultiParticleKernelExpr(
        tuple(e.propagate(t_from, t_to) if i in chosen else e for i, e in enumerate(expr.slots, 1))
    )


def distinguished_base() -> OneParticleKernelExpr:
    return OneParticleKernelExpr(((1, PSI_F, PHI_F), (-1, PHI_F, PSI_F)))


def theta_expand(l: TreeLabeling) -> Dict[int, OneParticleKernelExpr]:
    """Kernels ``Theta_alpha`` for every internal label, built from the leaves upward."""
    theta: Dict[int, OneParticleKernelExpr] = {}
    for a in range(l.m, 0, -1):
        if l.distinguished and a == l.m:
            theta[a] = distinguished_base()
            continue
        parts = []
        for c in l.children(a):
            base = RANK1 if l.is_leaf(c) else theta[c]
            parts.append(base.propagate(l.time_of(a), l.time_of(c)))
        theta[a] = contract(*parts)
    return theta


@dataclass
class JkAssembly:
    forest: TreeForest
    labelings: Dict[int, Optional[TreeLabeling]]
    thetas: Dict[int, Dict[int, OneParticleKernelExpr]]
    trees: List[OneParticleKernelExpr]

    @property
    def product(self) -> MultiParticleKernelExpr:
        return MultiParticleKernelExpr(tuple(self.trees))


def assemble_Jk(m: CollapseMap) -> JkAssembly:
    f = build_forest(m)
    labs = all_labelings(f)
    thetas, trees = {}, []
    for j in range(1, m.k + 1):
        lab = labs[j]
        if lab is None:
            trees.append(RANK1.propagate(0, m.r))
            continue
        th = theta_expand(lab)
        thetas[j] = th
        trees.append(th[1].propagate(0, lab.time_binding[1]))
    return JkAssembly(f, labs, thetas, trees)


def direct_expand(m: CollapseMap, symbolic_psi: bool = False) -> MultiParticleKernelExpr:
    """Left-to-right construction of the integrand without trees (oracle).

    With ``symbolic_psi`` the last contraction uses the opaque cubic factor so the
    result can be compared structurally with :func:`assemble_Jk`.
    """
    expr = rank1_product(m.k + m.r)
    for col in range(m.r, 0, -1):
        if col < m.r:
            expr = apply_propagator(expr, None, col, col + 1)
        row = m.rho[col - 1]
        if symbolic_psi and col == m.r:
            slots = list(expr.slots)
            slots.pop()
            slots[row - 1] = distinguished_base()
            expr = MultiParticleKernelExpr(tuple(slots))
        else:
            expr = apply_b(row, expr)
    return apply_propagator(expr, None, 0, 1)


def substitute_psi(x):
    """Replace every opaque cubic factor by ``phi * phi * conj(phi)``."""
    if isinstance(x, FactorExpr):
        if x.base == PSI:
            return FactorExpr(PROD, ((PHI_F, False), (PHI_F, False), (PHI_F, True)), x.chain)
        if x.base == PROD:
            return FactorExpr(PROD, tuple((substitute_psi(c), cj) for c, cj in x.children), x.chain)
        return x
    if isinstance(x, OneParticleKernelExpr):
        return OneParticleKernelExpr(tuple((c, substitute_psi(l), substitute_psi(r)) for c, l, r in x.terms))
    if isinstance(x, MultiParticleKernelExpr):
        return MultiParticleKernelExpr(tuple(substitute_psi(s) for s in x.slots))
    raise TypeError(type(x))


# --- bound ledger -----------------------------------------------------------


@dataclass(frozen=True)
class TreeBound:
    j: int
    m: int
    distinguished: bool
    pow2: int
    powC: int
    powT: Fraction
    phi_exp: int


@dataclass
class BoundLedger:
    k: int
    r: int
    trees: List[TreeBound] = field(default_factory=list)

    @property
    def pow2(self) -> int:
        return sum(t.pow2 for t in self.trees)

    @property
    def powC(self) -> int:
        return sum(t.powC for t in self.trees)

    @property
    def powT(self) -> Fraction:
        return sum((t.powT for t in self.trees), Fraction(0))

    @property
    def phi_exp(self) -> int:
        return sum(t.phi_exp for t in self.trees)

    @property
    def powT_final(self) -> Fraction:
        # the remaining two time integrals contribute T^(1/2) each
        return self.powT + 1

    def aggregate_value(self, T: float, M: float, C: float) -> float:
        return 2.0**self.pow2 * C**self.powC * T ** float(self.powT) * M**self.phi_exp

    def shape(self) -> str:
        return f"{2 ** self.pow2} C^{self.powC} T^{self.powT_final} M^{self.phi_exp}"

    def table(self) -> str:
        lines = ["tree  m  kind           2^  C^  T^    |phi|^"]
        for t in self.trees:
            kind = "distinguished" if t.distinguished else "regular"
            lines.append(f"{t.j:<5d} {t.m:<2d} {kind:<14s} {t.pow2:<3d} {t.powC:<3d} {str(t.powT):<5s} {t.phi_exp}")
        lines.append(
            f"all   {self.r:<2d} {'aggregate':<14s} {self.pow2:<3d} {self.powC:<3d} {str(self.powT):<5s} {self.phi_exp}"
        )
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "trees": [
                {
                    "j": t.j,
                    "m": t.m,
                    "distinguished": t.distinguished,
                    "pow2": t.pow2,
                    "powC": t.powC,
                    "powT": str(t.powT),
                    "phi_exp": t.phi_exp,
                }
                for t in self.trees
            ],
            "aggregate": {"pow2": self.pow2, "powC": self.powC, "powT": str(self.powT), "phi_exp": self.phi_exp},
        }


def tree_bound(j: int, lab: Optional[TreeLabeling], distinguished: bool) -> TreeBound:
    if lab is None:
        # bare edge: free propagation of |phi><phi|
        return TreeBound(j, 0, distinguished, 0, 0, Fraction(0), 2)
    m = lab.m
    _, b = subtree_stats(lab, 1)
    if lab.distinguished:
        # regular leaves give |phi|^2 each; the final vertex gives |psi~| |phi| <= C |phi|^4
        return TreeBound(j, m, True, m, m, Fraction(m - 1, 2), 2 * b + 4)
    return TreeBound(j, m, False, m, m, Fraction(m, 2), 2 * b)


def bound_ledger(f: TreeForest) -> BoundLedger:
    labs = all_labelings(f)
    led = BoundLedger(f.k, f.r)
    for j in range(1, f.k + 1):
        led.trees.append(tree_bound(j, labs[j], f.is_distinguished(j)))
    return led


def final_bound(k: int, r: int, T: float, M: float, C: float) -> float:
    return 2.0 * M ** (2 * k - 2) * (2.0 * C * M**4 * T) ** ((r + 1) / 2)


def dump_expansion(a: JkAssembly) -> str:
    return json.dumps({"k": a.forest.k, "rho": list(a.forest.rho), "trees": [t.to_json() for t in a.trees]})
