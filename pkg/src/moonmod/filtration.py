r"""Recursive regular-representation filtration and the induced partial order.

Each graded multiplicity vector is peeled greedily: level 1 subtracts as
many copies of the regular representation as fit, then each subsequent
level builds a direction vector from weighted character sums over the
classes of the next element order (weighted by class size and coefficient
sign), subtracts as many copies as fit, and drops the minimizer set from
the active support.  The chain of supports X_1 >= X_2 > ... induces a
partial order on the irreducibles: the blocks X_j \ X_{j+1}.

Two modes: exact (a concrete grade n, integer arithmetic throughout, the
reconstruction identity enforced) and asymptotic (a residue class n0 mod
N, sign patterns only, no multiplicities).  All level algebra runs in
exact quadratic arithmetic; directions are normalized to canonical
nonnegative integer vectors when the entries are rational, and the chain
degrades to an approximate float mode when they are not.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .chartab import CharacterTable, distinct_orders
from .decomp import MultiplicityVector
from .quadratic import QExact


class FiltrationError(Exception):
    """Base class for filtration failures."""


class DegenerateLevel(FiltrationError):
    """All weighted sums (or all normalizers) vanish at an element order."""

    def __init__(self, order: int, detail: str = ""):
        super().__init__(f"degenerate level at element order {order}"
                         + (f": {detail}" if detail else ""))
        self.order = order


class IrrationalDirection(FiltrationError):
    """Direction entries are not commensurable rationals."""

    def __init__(self, order: int, raw: tuple):
        super().__init__(f"direction at order {order} is irrational: {raw}")
        self.order = order
        self.raw = raw


class StructureViolation(FiltrationError):
    """A quantity the support recursion requires nonnegative came out negative."""


class AperiodicClass(FiltrationError):
    def __init__(self, class_name: str, window: tuple[int, int]):
        super().__init__(
            f"no sign period detected for class {class_name} within window {window}"
        )
        self.class_name = class_name
        self.window = window


# -- sign profiles -----------------------------------------------------------

@dataclass(frozen=True)
class ClassSigns:
    """Sign of c_g(n) as a function of n mod period (entries in {-1, 0, +1})."""

    class_name: str
    period: int
    pattern: tuple[int, ...]  # indexed by n mod period
    source: str  # "declared", "empirical", or "aperiodic"
    window: tuple[int, int] | None = None

    def sign(self, n: int) -> int:
        if self.source == "aperiodic":
            raise AperiodicClass(self.class_name, self.window or (0, 0))
        return self.pattern[n % self.period]


@dataclass(frozen=True)
class SignProfile:
    classes: dict[str, ClassSigns]
    N: int  # lcm of the periodic classes' periods

    def sign(self, class_name: str, n: int) -> int:
        return self.classes[class_name].sign(n)

    @property
    def aperiodic_classes(self) -> list[str]:
        return [c for c, s in self.classes.items() if s.source == "aperiodic"]


# Known closed-form sign patterns, keyed by (group, class):
# sgn(c_2A(n)) = (-1)^n and sgn(c_2B(n)) = (-1)^{n+1}.
DECLARED_SIGNS = {
    ("M24", "2A"): (1, -1),  # n mod 2 = 0 -> +1
    ("M24", "2B"): (-1, 1),
}


def _sgn(v: int) -> int:
    return (v > 0) - (v < 0)


def _detect_period(signs: list[int], max_period: int) -> int | None:
    for p in range(1, max_period + 1):
        if all(signs[k] == signs[k % p] for k in range(len(signs))):
            return p
    return None


def sign_profile(table: CharacterTable, provider, window: tuple[int, int]
                 ) -> SignProfile:
    """Measure per-class sign periodicity over [window[0], window[1]].

    Declared patterns (M24 2A/2B) are verified against the data and used as
    stated; other classes get the minimal empirical period, verified over at
    least three full periods.  Classes with no period up to window/3 are
    marked aperiodic (usable in exact mode only).
    """
    lo, hi = window
    count = hi - lo + 1
    if count < 6:
        raise ValueError("sign window must cover at least 6 grades")
    max_period = count // 3
    classes: dict[str, ClassSigns] = {}
    periods = []
    for c in table.classes:
        observed = [_sgn(provider.value(c.name, n)) for n in range(lo, hi + 1)]
        declared = DECLARED_SIGNS.get((table.group_name, c.name))
        if declared is not None:
            p = len(declared)
            if all(observed[k] == declared[(lo + k) % p] for k in range(count)):
                classes[c.name] = ClassSigns(c.name, p, declared, "declared", window)
                periods.append(p)
                continue
        # Align the empirical pattern so index r covers n = r (mod p).
        p = _detect_period(observed, max_period)
        if p is None:
            classes[c.name] = ClassSigns(c.name, 0, (), "aperiodic", window)
            continue
        pattern = tuple(observed[(r - lo) % p] for r in range(p))
        classes[c.name] = ClassSigns(c.name, p, pattern, "empirical", window)
        periods.append(p)
    N = math.lcm(*periods) if periods else 1
    return SignProfile(classes, N)


def signs_at(table: CharacterTable, provider, n: int) -> dict[str, int]:
    """Actual coefficient signs at one grade (exact-mode input)."""
    return {c.name: _sgn(provider.value(c.name, n)) for c in table.classes}


def _sign_lookup(signs, class_name: str, n: int | None) -> int:
    if isinstance(signs, SignProfile):
        if n is None:
            raise ValueError("SignProfile lookup requires a grade")
        return signs.sign(class_name, n)
    return signs[class_name]


# -- level algebra -----------------------------------------------------------

@dataclass
class ClassFunctionLevel:
    """State after l elimination steps: f_i^{(l)} on every class, plus the
    active (surviving) irrep indices and the current direction L over them."""

    level: int
    order: int  # element order e_l this level's direction belongs to
    values: list[dict[str, QExact]]  # f_i^{(level)} per irrep, keyed by class
    active: tuple[int, ...]
    direction: dict[int, object]  # active index -> int (or float when approximate)
    approximate: bool = False


def _character_level(table: CharacterTable) -> ClassFunctionLevel:
    values = [
        {c.name: chi.values[k].exact() for k, c in enumerate(table.classes)}
        for chi in table.irreps
    ]
    active = tuple(range(len(table.irreps)))
    direction = {i: table.irreps[i].dim for i in active}
    return ClassFunctionLevel(1, 1, values, active, direction)


def _q_float(q: QExact) -> float:
    total = 0.0
    for s, c in q.terms.items():
        if s < 0:
            raise StructureViolation(f"nonreal weighted sum {q!r}")
        total += float(c) * math.sqrt(s)
    return total


def _q_mpf(q: QExact) -> mpmath.mpf:
    with mpmath.workdps(60):
        total = mpmath.mpf(0)
        for s, c in q.terms.items():
            if s < 0:
                raise StructureViolation(f"nonreal weighted sum {q!r}")
            total += mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(s)
        return total


def _weighted_sums(table: CharacterTable, level: ClassFunctionLevel,
                   signs, n: int | None, order: int) -> dict[int, QExact]:
    """nu_i = sum over classes of the given order of |[g]| f_i(g) sgn(c_g)."""
    out: dict[int, QExact] = {}
    for i in level.active:
        acc = QExact()
        for k, c in enumerate(table.classes):
            if c.element_order != order:
                continue
            s = _sign_lookup(signs, c.name, n)
            if s == 0:
                continue
            acc = acc + level.values[i][c.name].scale(c.size * s)
        out[i] = acc
    return out


def minimizer_set(table: CharacterTable, level: ClassFunctionLevel,
                  signs, n: int | None, order: int
                  ) -> tuple[tuple[int, ...], dict[int, QExact]]:
    """Active indices minimizing nu_i / L(i) over entries with L(i) > 0.

    Ties are resolved by exact equality of the quadratic values, with a
    high-precision comparison fallback for distinct-but-close entries.
    Returns (J, nu).
    """
    nu = _weighted_sums(table, level, signs, n, order)
    candidates = [i for i in level.active if level.direction[i] > 0]
    if not candidates:
        raise DegenerateLevel(order, "all normalizers zero")
    if all(nu[i].is_zero for i in level.active):
        raise DegenerateLevel(order)
    if level.approximate:
        vals = {i: _q_float(nu[i]) / float(level.direction[i]) for i in candidates}
        best = min(vals.values())
        scale = max(1.0, abs(best))
        J = tuple(sorted(i for i in candidates if vals[i] <= best + 1e-9 * scale))
        return J, nu
    ratios = {i: nu[i].scale(Fraction(1, level.direction[i])) for i in candidates}
    floats = {i: _q_float(ratios[i]) for i in candidates}
    i0 = min(candidates, key=lambda i: floats[i])
    J = [i for i in candidates if (ratios[i] - ratios[i0]).is_zero]
    # Guard against float ties that are not exact ties.
    near = [i for i in candidates if i not in J
            and abs(floats[i] - floats[i0]) <= 1e-9 * max(1.0, abs(floats[i0]))]
    if near:
        base = _q_mpf(ratios[i0])
        for i in near:
            if _q_mpf(ratios[i]) < base:
                raise StructureViolation(
                    f"minimizer ordering unresolved between {i0} and {i} at order {order}"
                )
    return tuple(sorted(J)), nu


def next_class_function(table: CharacterTable, level: ClassFunctionLevel,
                        J: tuple[int, ...], nu: dict[int, QExact], order: int
                        ) -> ClassFunctionLevel:
    """Eliminate the minimizer: f_i' = f_i L(j') - L(i) f_{j'}, with the new
    direction L'(i) = L(j') nu_i - L(i) nu_{j'} over the shrunken active set."""
    jp = min(J)
    Ljp = level.direction[jp]
    new_active = tuple(i for i in level.active if i not in J)
    new_values: list[dict[str, QExact]] = [dict() for _ in table.irreps]
    for i in new_active:
        fi = level.values[i]
        fj = level.values[jp]
        Li = level.direction[i]
        new_values[i] = {
            cname: fi[cname].scale(Ljp) - fj[cname].scale(Li)
            for cname in fi
        }
    if level.approximate:
        floats = {i: _q_float(nu[i]) * float(Ljp)
                  - _q_float(nu[jp]) * float(level.direction[i])
                  for i in new_active}
        positive = [v for v in floats.values() if v > 0]
        scale = min(positive) if positive else 1.0
        direction: dict[int, object] = {i: max(v, 0.0) / scale for i, v in floats.items()}
        approx = True
    else:
        raw = {i: nu[i].scale(Ljp) - nu[jp].scale(level.direction[i]) for i in new_active}
        direction, approx = direction_vector(raw, order)
    return ClassFunctionLevel(level.level + 1, order, new_values, new_active,
                              direction, level.approximate or approx)


def direction_vector(raw: dict[int, QExact], order: int
                     ) -> tuple[dict[int, object], bool]:
    """Canonical integer direction from exact raw entries.

    Rational entries are cleared to coprime nonnegative integers; a negative
    entry is a structure violation; irrational entries degrade the chain to
    approximate floats normalized by the smallest positive entry.
    """
    if all(q.is_rational for q in raw.values()):
        fracs = {i: q.rational_part() for i, q in raw.items()}
        neg = {i: f for i, f in fracs.items() if f < 0}
        if neg:
            raise StructureViolation(
                f"negative direction entries at order {order}: {neg}"
            )
        denom = math.lcm(*(f.denominator for f in fracs.values())) if fracs else 1
        ints = {i: int(f * denom) for i, f in fracs.items()}
        g = math.gcd(*ints.values()) if any(ints.values()) else 1
        if g > 1:
            ints = {i: v // g for i, v in ints.items()}
        return ints, False
    floats = {i: _q_float(q) for i, q in raw.items()}
    if any(v < -1e-12 * max(1.0, max(map(abs, floats.values()))) for v in floats.values()):
        raise StructureViolation(
            f"negative direction entries at order {order}: {floats}"
        )
    positive = [v for v in floats.values() if v > 0]
    scale = min(positive) if positive else 1.0
    return {i: max(v, 0.0) / scale for i, v in floats.items()}, True


# -- filtration results ------------------------------------------------------

@dataclass(frozen=True)
class ChainLevel:
    level_order: int
    r: int | None  # None in asymptotic mode
    direction: dict[int, object]  # support index -> coefficient
    support: tuple[int, ...]  # X_j
    J: tuple[int, ...]  # minimizer set defining the next level (empty at the end)


@dataclass(frozen=True)
class FiltrationResult:
    mode: str  # "exact" or "asymptotic"
    n: int | None
    residue: tuple[int, int] | None  # (n0, N) in asymptotic mode
    chain: tuple[ChainLevel, ...]
    residual: tuple[int, ...] | None  # L_eps over all irreps (exact mode)
    order_blocks: tuple[tuple[int, ...], ...]
    skipped_orders: tuple[int, ...]
    approximate: bool = False
    notes: tuple[str, ...] = ()


def _advance(table: CharacterTable, level: ClassFunctionLevel, signs,
             n: int | None, orders: list[int], skipped: list[int]
             ) -> tuple[ClassFunctionLevel | None, tuple[int, ...]]:
    """Find the next nondegenerate order and eliminate its minimizer set.

    Consumes entries of orders; returns (next level, J) or (None, ()) when
    every remaining order is degenerate.
    """
    while orders:
        order = orders.pop(0)
        try:
            J, nu = minimizer_set(table, level, signs, n, order)
        except DegenerateLevel as exc:
            skipped.append(exc.order)
            continue
        return next_class_function(table, level, J, nu, order), J
    return None, ()


def filtrate_exact(mv: MultiplicityVector, table: CharacterTable, signs
                   ) -> FiltrationResult:
    """Greedy exact filtration of one grade.

    signs is either the dict from signs_at (actual signs at mv.n) or a
    SignProfile (evaluated at mv.n).
    """
    if any(m < 0 for m in mv.m):
        raise ValueError("exact filtration requires a nonnegative multiplicity vector")
    n = mv.n
    orders = distinct_orders(table)[1:]  # beyond the identity
    remaining = list(mv.m)
    level = _character_level(table)
    chain: list[ChainLevel] = []
    blocks: list[tuple[int, ...]] = []
    skipped: list[int] = []
    notes: list[str] = []
    while True:
        support = level.active
        if level.approximate:
            pos = [(i, level.direction[i]) for i in support if level.direction[i] > 0]
            r = min(int(remaining[i] // Li) for i, Li in pos) if pos else 0
            r = max(r, 0)
            for i, Li in pos:
                remaining[i] -= int(round(r * Li))
        else:
            pos = [(i, level.direction[i]) for i in support if level.direction[i] > 0]
            r = min(remaining[i] // Li for i, Li in pos) if pos else 0
            r = max(r, 0)
            for i, Li in pos:
                remaining[i] -= r * Li
        nxt, J = _advance(table, level, signs, n, orders, skipped)
        chain.append(ChainLevel(level.order, r, dict(level.direction), support, J))
        if J:
            blocks.append(J)
        if nxt is None or not nxt.active:
            final = tuple(i for i in support if i not in J)
            if final:
                blocks.append(final)
            break
        level = nxt
    approx = level.approximate
    if approx:
        notes.append("direction entries irrational from some level; "
                     "remainders absorb rounding")
    residual = tuple(remaining)
    if not approx and any(v < 0 for v in residual):
        raise StructureViolation(f"negative residual entries: {residual}")
    return FiltrationResult("exact", n, None, tuple(chain), residual,
                            tuple(blocks), tuple(skipped), approx, tuple(notes))


def filtrate_asymptotic(table: CharacterTable, profile: SignProfile,
                        n0: int, N: int) -> FiltrationResult:
    """Symbolic support chain for the residue class n = n0 (mod N).

    Multiplicity-free: r_j depend on n and are not computed; the chain and
    order blocks depend only on the periodic sign data.
    """
    if N % profile.N != 0:
        raise ValueError(f"modulus {N} is not a multiple of the profile lcm {profile.N}")
    bad = profile.aperiodic_classes
    if bad:
        raise AperiodicClass(bad[0], profile.classes[bad[0]].window or (0, 0))
    n = n0 % N
    orders = distinct_orders(table)[1:]
    level = _character_level(table)
    chain: list[ChainLevel] = []
    blocks: list[tuple[int, ...]] = []
    skipped: list[int] = []
    while True:
        support = level.active
        nxt, J = _advance(table, level, profile, n, orders, skipped)
        chain.append(ChainLevel(level.order, None, dict(level.direction), support, J))
        if J:
            blocks.append(J)
        if nxt is None or not nxt.active:
            final = tuple(i for i in support if i not in J)
            if final:
                blocks.append(final)
            break
        level = nxt
    return FiltrationResult("asymptotic", None, (n0 % N, N), tuple(chain), None,
                            tuple(blocks), tuple(skipped), level.approximate)


def nonfree_asymptotic(table: CharacterTable, signs, n: int) -> list[float]:
    """Predicted non-free multiplicities from the leading correction term.

    Uses the least non-identity element order e2: with j' the level-1
    minimizer and f'_i = chi_i - (dim_i/dim_j') chi_j',

        m'_i(n) ~ (C_n exp(D_n/e2) / |G|) sum_{[g], order e2} |[g]| f'_i(g) sgn(c_g(n)).

    Entries at i in J_1 vanish by construction.
    """
    orders = distinct_orders(table)
    if len(orders) < 2:
        raise ValueError("group has no non-identity elements")
    e2 = orders[1]
    level = _character_level(table)
    J, nu = minimizer_set(table, level, signs, n, e2)
    jp = min(J)
    dims = [chi.dim for chi in table.irreps]
    # C_n from the order-e2 class with the fastest growth (smallest n_g).
    ngs = [c.ng for c in table.classes if c.element_order == e2]
    ng = min(ngs)
    q8 = 8 * n - 1
    prefactor = (4.0 / (math.sqrt(ng) * math.sqrt(q8))
                 * math.exp(math.pi * math.sqrt(q8) / (2 * e2))) / table.group_order
    out = []
    for i in range(len(table.irreps)):
        bracket = nu[i] - nu[jp].scale(Fraction(dims[i], dims[jp]))
        out.append(prefactor * _q_float(bracket))
    return out


# -- serialization -----------------------------------------------------------

def result_to_json(result: FiltrationResult, table: CharacterTable) -> str:
    """Stable JSON rendering of a FiltrationResult (schema 1)."""
    names = [chi.name for chi in table.irreps]
    doc: dict = {"schema": 1, "mode": result.mode}
    if result.mode == "exact":
        doc["n"] = result.n
    else:
        doc["n0"], doc["N"] = result.residue
    doc["chain"] = [
        {
            "level_order": lvl.level_order,
            "r": lvl.r,
            "direction": {names[i]: lvl.direction[i] for i in sorted(lvl.direction)},
            "J": [names[i] for i in lvl.J],
        }
        for lvl in result.chain
    ]
    if result.residual is not None:
        doc["residual"] = {names[i]: v for i, v in enumerate(result.residual)}
    else:
        doc["residual"] = None
    doc["order_blocks"] = [[names[i] for i in block] for block in result.order_blocks]
    doc["skipped_orders"] = list(result.skipped_orders)
    doc["approximate"] = result.approximate
    if result.notes:
        doc["notes"] = list(result.notes)
    return json.dumps(doc, indent=1, sort_keys=True)
