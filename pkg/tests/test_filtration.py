"""Filtration: worked small-group numbers, brute-force oracle, serialization.

The oracle is an independent straightforward translation of the recursive
definitions in plain Fraction arithmetic, usable for tables whose character
values are all rational.  Synthetic coefficient providers follow the
assumed growth-and-periodic-sign shape and are built so that every grade
decomposes integrally.
"""

import json
import math
from fractions import Fraction

import pytest

from moonmod.chartab import load_table
from moonmod.decomp import MultiplicityVector, multiplicities
from moonmod.filtration import (AperiodicClass, ClassSigns, DegenerateLevel,
                                SignProfile, StructureViolation,
                                _character_level, direction_vector,
                                filtrate_asymptotic, filtrate_exact,
                                minimizer_set, result_to_json, sign_profile,
                                signs_at)
from moonmod.quadratic import QExact


# -- synthetic tables --------------------------------------------------------

def _val(v):
    return {"a": 2 * v, "b": 0, "d": 1}


C2_DOC = {
    "group_name": "C2",
    "group_order": 2,
    "classes": [
        {"name": "1A", "size": 1, "element_order": 1, "ng": 1, "hg": 1},
        {"name": "2A", "size": 1, "element_order": 2, "ng": 2, "hg": 1},
    ],
    "irreps": [
        {"name": "triv", "dim": 1, "values": [_val(1), _val(1)]},
        {"name": "sgn", "dim": 1, "values": [_val(1), _val(-1)]},
    ],
}

S3_DOC = {
    "group_name": "S3",
    "group_order": 6,
    "classes": [
        {"name": "1A", "size": 1, "element_order": 1, "ng": 1, "hg": 1},
        {"name": "2A", "size": 3, "element_order": 2, "ng": 2, "hg": 1},
        {"name": "3A", "size": 2, "element_order": 3, "ng": 3, "hg": 1},
    ],
    "irreps": [
        {"name": "triv", "dim": 1, "values": [_val(1), _val(1), _val(1)]},
        {"name": "sgn", "dim": 1, "values": [_val(1), _val(-1), _val(1)]},
        {"name": "std", "dim": 2, "values": [_val(2), _val(0), _val(-1)]},
    ],
}


@pytest.fixture(scope="module")
def c2():
    return load_table(C2_DOC)


@pytest.fixture(scope="module")
def s3():
    return load_table(S3_DOC)


class C2Provider:
    """c_e even and dominant, c_2 even with alternating sign."""

    def value(self, class_name, n):
        if class_name == "1A":
            return 2 * (n * n + 12)
        return 2 * (-1) ** n * (n // 3 + 1)


PAT3 = (1, 0, -1)  # sign of the order-3 class by n mod 3


class S3Provider:
    """c_e = 0 mod 6, c_2 even alternating, c_3 = 0 mod 3 with a zero."""

    def value(self, class_name, n):
        if class_name == "1A":
            return 6 * (n ** 3 + 60)
        if class_name == "2A":
            return 2 * (-1) ** n * (n + 5)
        return 3 * PAT3[n % 3] * (n // 2 + 3)


# -- independent oracle (rational tables only) -------------------------------

def oracle_filtrate(table, m, signs):
    """Direct translation of the recursion with Fractions, no optimizations."""
    dims = [chi.dim for chi in table.irreps]
    chars = [[v.as_fraction() for v in chi.values] for chi in table.irreps]
    classes = [(c.name, c.size, c.element_order) for c in table.classes]
    orders = sorted({o for (_, _, o) in classes if o > 1})
    s = len(dims)

    def canonical(raw, active):
        denom = 1
        for i in active:
            denom = denom * raw[i].denominator // math.gcd(denom, raw[i].denominator)
        ints = {i: int(raw[i] * denom) for i in active}
        g = 0
        for v in ints.values():
            g = math.gcd(g, v)
        g = g or 1
        return {i: v // g for i, v in ints.items()}

    m = list(m)
    active = list(range(s))
    f = [list(chars[i]) for i in range(s)]
    L = {i: dims[i] for i in active}
    chain = []
    blocks = []
    skipped = []
    pending_orders = list(orders)
    cur_order = 1
    while True:
        r = min(m[i] // L[i] for i in active if L[i] > 0)
        for i in active:
            m[i] -= r * L[i]
        # find next usable order
        J = ()
        nxt = None
        while pending_orders:
            e = pending_orders.pop(0)
            nu = {}
            for i in active:
                nu[i] = sum(Fraction(size) * f[i][k] * signs[name]
                            for k, (name, size, o) in enumerate(classes) if o == e)
            if all(v == 0 for v in nu.values()):
                skipped.append(e)
                continue
            ratios = {i: nu[i] / L[i] for i in active if L[i] > 0}
            best = min(ratios.values())
            J = tuple(sorted(i for i in ratios if ratios[i] == best))
            jp = min(J)
            new_active = [i for i in active if i not in J]
            new_f = [None] * s
            for i in new_active:
                new_f[i] = [f[i][k] - (Fraction(L[i], L[jp])) * f[jp][k]
                            for k in range(len(classes))]
            raw = {}
            for i in new_active:
                raw[i] = sum(Fraction(size) * new_f[i][k] * signs[name]
                             for k, (name, size, o) in enumerate(classes) if o == e)
            nxt = (e, new_active, new_f, canonical(raw, new_active))
            break
        chain.append((cur_order, r, dict(L), tuple(active), J))
        if J:
            blocks.append(J)
        if nxt is None or not nxt[1]:
            final = tuple(i for i in active if i not in J)
            if final:
                blocks.append(final)
            break
        cur_order, active, f, L = nxt
    return chain, tuple(m), blocks, skipped


def _compare(table, provider, n):
    mv = multiplicities(table, n, provider)
    signs = signs_at(table, provider, n)
    result = filtrate_exact(mv, table, signs)
    o_chain, o_resid, o_blocks, o_skipped = oracle_filtrate(table, mv.m, signs)
    assert len(result.chain) == len(o_chain), f"chain length differs at n={n}"
    for lvl, (order, r, L, support, J) in zip(result.chain, o_chain):
        assert lvl.level_order == order, f"order differs at n={n}"
        assert lvl.r == r, f"r differs at n={n}: {lvl.r} vs {r}"
        assert lvl.support == support
        assert lvl.J == J
        assert lvl.direction == {i: L[i] for i in support}
    assert result.residual == o_resid, f"residual differs at n={n}"
    assert list(result.order_blocks) == o_blocks
    assert list(result.skipped_orders) == o_skipped


@pytest.mark.parametrize("n", list(range(1, 201)))
def test_oracle_c2(c2, n):
    _compare(c2, C2Provider(), n)


@pytest.mark.parametrize("n", list(range(1, 201)))
def test_oracle_s3(s3, n):
    _compare(s3, S3Provider(), n)


def test_exact_reconstruction(s3):
    provider = S3Provider()
    dims = [chi.dim for chi in s3.irreps]
    for n in (7, 30, 121):
        mv = multiplicities(s3, n, provider)
        result = filtrate_exact(mv, s3, signs_at(s3, provider, n))
        total = list(result.residual)
        for lvl in result.chain:
            for i, coeff in lvl.direction.items():
                total[i] += lvl.r * coeff
        assert tuple(total) == mv.m
        # maximality of each r: another copy never fits after subtraction
        assert all(r >= 0 for r in result.residual)


def test_regular_multiple_trivial_chain(s3):
    mv = MultiplicityVector(4, (5, 5, 10), (0.0,) * 3)
    signs = {"1A": 1, "2A": 1, "3A": 1}
    result = filtrate_exact(mv, s3, signs)
    assert result.chain[0].r == 5
    assert result.residual == (0, 0, 0)
    assert all(lvl.r == 0 for lvl in result.chain[1:])


# -- A5 worked example -------------------------------------------------------

A5_PROFILE = {
    "1A": ClassSigns("1A", 1, (1,), "empirical"),
    "2A": ClassSigns("2A", 2, (1, -1), "declared"),
    "3A": ClassSigns("3A", 3, (1, 0, -1), "empirical"),
    "5A": ClassSigns("5A", 5, (1, 0, 1, 0, -1), "empirical"),
    "5B": ClassSigns("5B", 5, (1, 0, 1, 0, -1), "empirical"),
}


def test_a5_asymptotic_blocks(a5_table):
    profile = SignProfile(A5_PROFILE, 30)
    result = filtrate_asymptotic(a5_table, profile, 10, 30)
    names = [chi.name for chi in a5_table.irreps]
    blocks = [tuple(names[i] for i in b) for b in result.order_blocks]
    assert blocks == [("chi3a", "chi3b"), ("chi4",), ("chi1", "chi5")]
    assert result.skipped_orders == (3,)
    # X chain strictly decreasing beyond the full support
    supports = [lvl.support for lvl in result.chain]
    assert supports[0] == (0, 1, 2, 3, 4)
    for a, b in zip(supports, supports[1:]):
        assert set(b) < set(a)


def test_a5_level1_minimizers(a5_table):
    level = _character_level(a5_table)
    # n even: 15 chi_j(2A)/dim = (15, -5, -5, 0, 3), minimum at the 3-dims.
    J, _ = minimizer_set(a5_table, level, {"1A": 1, "2A": 1, "3A": 0,
                                           "5A": 0, "5B": 0}, None, 2)
    assert J == (1, 2)
    # n odd: signs flip, the trivial goes first.
    J, _ = minimizer_set(a5_table, level, {"1A": 1, "2A": -1, "3A": 0,
                                           "5A": 0, "5B": 0}, None, 2)
    assert J == (0,)


def test_a5_level2_direction(a5_table):
    profile = SignProfile(A5_PROFILE, 30)
    result = filtrate_asymptotic(a5_table, profile, 10, 30)
    lvl2 = result.chain[1]
    assert lvl2.level_order == 2
    assert lvl2.direction == {0: 1, 3: 1, 4: 2}


def test_minimizer_scale_invariance(a5_table):
    level = _character_level(a5_table)
    signs = {"1A": 1, "2A": 1, "3A": 0, "5A": 0, "5B": 0}
    J1, nu1 = minimizer_set(a5_table, level, signs, None, 2)
    # Scale all f values (and direction) by 3: same J, same canonical direction.
    scaled = _character_level(a5_table)
    scaled.values = [{k: v.scale(3) for k, v in row.items()}
                     for row in scaled.values]
    scaled.direction = {i: 3 * v for i, v in scaled.direction.items()}
    J2, nu2 = minimizer_set(a5_table, scaled, signs, None, 2)
    assert J1 == J2


def test_degenerate_level_raised(a5_table):
    level = _character_level(a5_table)
    signs = {"1A": 1, "2A": 1, "3A": 0, "5A": 0, "5B": 0}
    with pytest.raises(DegenerateLevel):
        minimizer_set(a5_table, level, signs, None, 3)


def test_direction_vector_canonicalizes():
    raw = {0: QExact.rational(Fraction(5, 2)), 1: QExact.rational(Fraction(15, 2))}
    direction, approx = direction_vector(raw, 2)
    assert direction == {0: 1, 1: 3} and not approx
    with pytest.raises(StructureViolation):
        direction_vector({0: QExact.rational(-1)}, 2)


def test_sign_profile_detection(s3):
    profile = sign_profile(s3, S3Provider(), (1, 60))
    assert profile.classes["1A"].period == 1
    assert profile.classes["2A"].period == 2
    assert profile.classes["3A"].period == 3
    assert profile.N == 6
    # patterns agree with the provider at arbitrary grades
    p = S3Provider()
    for n in (61, 62, 63, 100):
        for cname in ("1A", "2A", "3A"):
            v = p.value(cname, n)
            assert profile.sign(cname, n) == (v > 0) - (v < 0)


import random

_SCRAMBLE = random.Random(0).choices([0, 1], k=256)


class AperiodicProvider(S3Provider):
    def value(self, class_name, n):
        if class_name == "2A":
            # fixed pseudo-random bits: no period within the window
            return 2 * (1 if _SCRAMBLE[n % 256] else -1) * (n + 5)
        return super().value(class_name, n)


def test_aperiodic_marked_and_refused(s3):
    profile = sign_profile(s3, AperiodicProvider(), (1, 60))
    assert profile.classes["2A"].source == "aperiodic"
    with pytest.raises(AperiodicClass):
        filtrate_asymptotic(s3, profile, 1, 6)


def test_json_emitter(a5_table):
    profile = SignProfile(A5_PROFILE, 30)
    result = filtrate_asymptotic(a5_table, profile, 10, 30)
    doc = json.loads(result_to_json(result, a5_table))
    assert doc["schema"] == 1
    assert doc["mode"] == "asymptotic"
    assert doc["n0"] == 10 and doc["N"] == 30
    assert doc["order_blocks"][0] == ["chi3a", "chi3b"]
    assert doc["chain"][0]["direction"] == {"chi1": 1, "chi3a": 3, "chi3b": 3,
                                            "chi4": 4, "chi5": 5}
    # byte-stable across repeated serialization
    assert result_to_json(result, a5_table) == result_to_json(result, a5_table)
