r"""Class data and character tables with exact validation.

Tables are JSON documents: group_name, group_order, classes (name, size,
element_order, ng, hg, optional fusion_target) and irreps (name, dim,
values as {a, b, d} quadratic triples parallel to the classes).  Loading
validates size sums and both orthogonality relations in exact quadratic
arithmetic; bundled files for M24 and A5 live in the package data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .quadratic import QExact, QuadraticValue


class TableError(Exception):
    """Base class for table ingestion failures."""


class TableParseError(TableError):
    pass


class SizeSumError(TableError):
    pass


class OrthogonalityError(TableError):
    pass


class FusionError(Exception):
    """Missing or unknown fusion target."""


@dataclass(frozen=True)
class ConjugacyClass:
    name: str
    size: int
    element_order: int
    ng: int
    hg: int
    fusion_target: str | None = None


@dataclass(frozen=True)
class Irreducible:
    name: str
    dim: int
    values: tuple[QuadraticValue, ...]


@dataclass(frozen=True)
class CharacterTable:
    group_name: str
    group_order: int
    classes: tuple[ConjugacyClass, ...]
    irreps: tuple[Irreducible, ...]
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self._index.update({c.name: k for k, c in enumerate(self.classes)})

    def class_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown conjugacy class {name!r}") from None

    def class_named(self, name: str) -> ConjugacyClass:
        return self.classes[self.class_index(name)]

    @property
    def identity_class(self) -> ConjugacyClass:
        return self.classes[0]

    def chi(self, i: int, class_name: str) -> QuadraticValue:
        return self.irreps[i].values[self.class_index(class_name)]


def _parse_value(obj, where: str) -> QuadraticValue:
    try:
        return QuadraticValue(int(obj["a"]), int(obj["b"]), int(obj["d"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise TableParseError(f"bad character value at {where}: {exc}") from exc


def _validate(table: CharacterTable) -> None:
    order = table.group_order
    classes, irreps = table.classes, table.irreps
    if len(classes) != len(irreps):
        raise TableParseError(
            f"{len(classes)} classes but {len(irreps)} irreps in {table.group_name}"
        )
    total = sum(c.size for c in classes)
    if total != order:
        raise SizeSumError(
            f"class sizes sum to {total}, expected group order {order}"
        )
    ident = classes[0]
    if ident.size != 1 or ident.element_order != 1:
        raise TableParseError("first class must be the identity (size 1, order 1)")
    for c in classes:
        if order % c.ng != 0:
            raise TableParseError(f"class {c.name}: ng = {c.ng} does not divide |G|")
        if c.ng % c.hg != 0:
            raise TableParseError(f"class {c.name}: hg = {c.hg} does not divide ng = {c.ng}")
    for chi in irreps:
        if len(chi.values) != len(classes):
            raise TableParseError(f"irrep {chi.name}: wrong number of values")
        ident_val = chi.values[0]
        if not (ident_val.is_rational and ident_val.as_fraction() == chi.dim):
            raise TableParseError(f"irrep {chi.name}: identity value differs from dim")
    for i, chi in enumerate(irreps):
        if i and irreps[i - 1].dim > chi.dim:
            raise TableParseError(f"irrep {chi.name}: dims not non-decreasing")
    # Row orthogonality, exact.
    for i, chi_i in enumerate(irreps):
        for j in range(i, len(irreps)):
            chi_j = irreps[j]
            acc = QExact()
            for k, c in enumerate(classes):
                term = chi_i.values[k].exact() * chi_j.values[k].conjugate().exact()
                acc = acc + term.scale(c.size)
            want = Fraction(order if i == j else 0)
            if not (acc.is_rational and acc.rational_part() == want):
                raise OrthogonalityError(
                    f"row orthogonality fails for ({chi_i.name}, {chi_j.name}): {acc!r}"
                )
    # Column orthogonality, exact.
    for k in range(len(classes)):
        for l in range(k, len(classes)):
            acc = QExact()
            for chi in irreps:
                acc = acc + chi.values[k].conjugate().exact() * chi.values[l].exact()
            want = Fraction(order, classes[k].size) if k == l else Fraction(0)
            if not (acc.is_rational and acc.rational_part() == want):
                raise OrthogonalityError(
                    "column orthogonality fails for "
                    f"({classes[k].name}, {classes[l].name}): {acc!r}"
                )


def load_table(source) -> CharacterTable:
    """Parse and fully validate a table from a path, byte stream, or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            if hasattr(source, "read"):
                doc = json.load(source)
            else:
                with open(source, "rb") as fh:
                    doc = json.load(fh)
            if not isinstance(doc, dict):
                raise ValueError("top-level document must be an object")
        except (OSError, ValueError) as exc:
            raise TableParseError(f"cannot parse table: {exc}") from exc
    try:
        classes = tuple(
            ConjugacyClass(
                name=str(c["name"]),
                size=int(c["size"]),
                element_order=int(c["element_order"]),
                ng=int(c["ng"]),
                hg=int(c["hg"]),
                fusion_target=c.get("fusion_target"),
            )
            for c in doc["classes"]
        )
        irreps = tuple(
            Irreducible(
                name=str(r["name"]),
                dim=int(r["dim"]),
                values=tuple(
                    _parse_value(v, f"{r['name']}/{classes[k].name}")
                    for k, v in enumerate(r["values"])
                ),
            )
            for r in doc["irreps"]
        )
        table = CharacterTable(
            group_name=str(doc["group_name"]),
            group_order=int(doc["group_order"]),
            classes=classes,
            irreps=irreps,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TableParseError(f"malformed table document: {exc}") from exc
    _validate(table)
    return table


def serialize(table: CharacterTable) -> bytes:
    """Inverse of load_table; bit-exact round trip."""
    doc = {
        "group_name": table.group_name,
        "group_order": table.group_order,
        "classes": [
            {
                "name": c.name,
                "size": c.size,
                "element_order": c.element_order,
                "ng": c.ng,
                "hg": c.hg,
                **({"fusion_target": c.fusion_target} if c.fusion_target else {}),
            }
            for c in table.classes
        ],
        "irreps": [
            {
                "name": r.name,
                "dim": r.dim,
                "values": [{"a": v.a, "b": v.b, "d": v.d} for v in r.values],
            }
            for r in table.irreps
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=False).encode()


def bundled_table(name: str) -> CharacterTable:
    """Load a packaged table by short name ('m24' or 'a5')."""
    fname = f"{name.lower()}.table"
    ref = resources.files("moonmod.data").joinpath(fname)
    with ref.open("rb") as fh:
        return load_table(fh)


def distinct_orders(table: CharacterTable) -> list[int]:
    """Sorted distinct element orders, starting at 1."""
    return sorted({c.element_order for c in table.classes})


class FusedProvider:
    """Coefficient provider for a subgroup, delegating along fusion targets."""

    def __init__(self, sub: CharacterTable, ambient_provider):
        self.sub = sub
        self.ambient = ambient_provider
        self.fusion: dict[str, str] = {}
        for c in sub.classes:
            if not c.fusion_target:
                raise FusionError(f"class {c.name} has no fusion_target")
            self.fusion[c.name] = c.fusion_target

    def value(self, class_name: str, n: int) -> int:
        target = self.fusion.get(class_name)
        if target is None:
            raise FusionError(f"class {class_name} has no fusion_target")
        return self.ambient.value(target, n)


def fuse_subgroup(sub: CharacterTable, ambient_provider) -> FusedProvider:
    return FusedProvider(sub, ambient_provider)
