"""Exact rational divisor-class lattices.

Everything here is exact: coefficients are `fractions.Fraction` (exported as
``Rat``), intersection numbers come from a symmetric rational Gram matrix, and
linear solves use fraction-exact Gaussian elimination.  No floating point is
used anywhere in the package and equality is always literal equality.

Two distinct representations of a divisor coexist:

* :class:`ClassVector` -- coordinates in a fixed lattice basis.  Intersection
  numbers live here.
* :class:`NamedDivisor` -- a finite formal sum of *named* irreducible curves.
  Rounding operations (:func:`floor_divisor`, :func:`frac_divisor`,
  :func:`ceil_divisor`) act on this representation only, because floors are
  basis-dependent and the geometry floors in the curve basis.

A :class:`CurveRegistry` links the two: it maps curve names to their classes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Mapping, Sequence

Rat = Fraction


class LatticeError(ValueError):
    """Base class for exact-lattice failures."""


class RankMismatchError(LatticeError):
    """A class vector does not have the rank of the lattice using it."""


class DependentSubsetError(LatticeError):
    """A curve subset expected to be linearly independent is not."""


class SingularBlockError(LatticeError):
    """A Gram block expected to be invertible is singular."""


class UnknownCurveError(LatticeError):
    """A divisor mentions a curve name the registry does not know."""


def format_rat(x: Rat) -> str:
    """Serialize a rational as ``p/q`` (plain ``p`` when q == 1)."""
    return str(Fraction(x))


def parse_rat(text: str) -> Rat:
    return Fraction(text.strip())


_NAME_SPLIT = re.compile(r"(\d+)")


def curve_sort_key(name: str) -> tuple:
    """Deterministic name ordering with numeric suffixes compared as numbers.

    Sorts ``l_2`` before ``l_10``; purely lexicographic order would not.
    """
    return tuple(int(p) if p.isdigit() else p for p in _NAME_SPLIT.split(name))


@dataclass(frozen=True)
class ClassVector:
    """A divisor class: rational coordinates in an ordered lattice basis."""

    coeffs: tuple[Rat, ...]

    @staticmethod
    def of(values: Iterable) -> "ClassVector":
        return ClassVector(tuple(Fraction(v) for v in values))

    @staticmethod
    def zero(rank: int) -> "ClassVector":
        return ClassVector((Fraction(0),) * rank)

    @staticmethod
    def unit(rank: int, index: int) -> "ClassVector":
        return ClassVector(
            tuple(Fraction(1 if i == index else 0) for i in range(rank))
        )

    def __len__(self) -> int:
        return len(self.coeffs)

    def __add__(self, other: "ClassVector") -> "ClassVector":
        if len(self) != len(other):
            raise RankMismatchError(
                f"rank mismatch: {len(self)} vs {len(other)}"
            )
        return ClassVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        return self + (-other)

    def __neg__(self) -> "ClassVector":
        return ClassVector(tuple(-a for a in self.coeffs))

    def scale(self, c) -> "ClassVector":
        c = Fraction(c)
        return ClassVector(tuple(c * a for a in self.coeffs))

    def __rmul__(self, c) -> "ClassVector":
        return self.scale(c)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def __str__(self) -> str:
        return "(" + ", ".join(format_rat(a) for a in self.coeffs) + ")"


@dataclass(frozen=True)
class IntersectionLattice:
    """Ordered divisor-class basis with a symmetric rational Gram matrix.

    ``canonical`` is the class of the canonical divisor K and
    ``chi_structure_sheaf`` the Euler characteristic of the structure sheaf
    (1 for every rational surface built in this package).
    """

    basis_names: tuple[str, ...]
    gram: tuple[tuple[Rat, ...], ...]
    canonical: ClassVector
    chi_structure_sheaf: Rat = field(default=Fraction(1))

    @cached_property
    def _gram_support(self) -> tuple[tuple[int, ...], ...]:
        """Nonzero column indices per Gram row; the pairing loop skips the
        rest (the blow-up lattices here are diagonal)."""
        return tuple(
            tuple(j for j, x in enumerate(row) if x != 0) for row in self.gram
        )

    def __post_init__(self):
        n = len(self.basis_names)
        if len(self.gram) != n or any(len(row) != n for row in self.gram):
            raise LatticeError("Gram matrix shape does not match basis")
        for i in range(n):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise LatticeError("Gram matrix is not symmetric")
        if len(self.canonical) != n:
            raise RankMismatchError("canonical class has wrong rank")

    @property
    def rank(self) -> int:
        return len(self.basis_names)

    def basis_vector(self, name: str) -> ClassVector:
        return ClassVector.unit(self.rank, self.basis_names.index(name))

    def check_rank(self, v: ClassVector) -> None:
        if len(v) != self.rank:
            raise RankMismatchError(
                f"vector has length {len(v)}, lattice rank is {self.rank}"
            )


def intersect(lattice: IntersectionLattice, v: ClassVector, w: ClassVector) -> Rat:
    """Intersection number v.w, i.e. the Gram pairing, exact."""
    lattice.check_rank(v)
    lattice.check_rank(w)
    support = lattice._gram_support
    wc = w.coeffs
    total = Fraction(0)
    for i, a in enumerate(v.coeffs):
        if a == 0:
            continue
        row = lattice.gram[i]
        for j in support[i]:
            b = wc[j]
            if b:
                total += a * b * row[j]
    return total


def gram_block(
    lattice: IntersectionLattice, subset: Sequence[ClassVector]
) -> list[list[Rat]]:
    return [[intersect(lattice, v, w) for w in subset] for v in subset]


def _row_reduce(rows: list[list[Rat]]) -> int:
    """In-place fraction-exact row echelon; returns the rank."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [inv * x for x in rows[rank]]
        for r in range(n_rows):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def solve_linear(matrix: Sequence[Sequence[Rat]], rhs: Sequence[Rat]) -> list[Rat]:
    """Solve M x = b exactly; raises SingularBlockError when M is singular."""
    n = len(matrix)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularBlockError("singular linear system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [inv * x for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def determinant(matrix: Sequence[Sequence[Rat]]) -> Rat:
    """Exact determinant by fraction-valued Gaussian elimination."""
    n = len(matrix)
    rows = [list(r) for r in matrix]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                factor = rows[r][col] * inv
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return det


def is_negative_definite(
    lattice: IntersectionLattice, subset: Sequence[ClassVector]
) -> bool:
    """True iff the Gram pairing restricted to ``subset`` is negative definite.

    Checked exactly via leading principal minors: the k-th minor must have
    sign (-1)^k.  A linearly dependent subset is rejected with
    :class:`DependentSubsetError` instead of returning False.
    """
    if not subset:
        raise LatticeError("empty subset")
    for v in subset:
        lattice.check_rank(v)
    coords = [list(v.coeffs) for v in subset]
    if _row_reduce(coords) < len(subset):
        raise DependentSubsetError("subset is linearly dependent")
    block = gram_block(lattice, subset)
    for k in range(1, len(subset) + 1):
        minor = determinant([row[:k] for row in block[:k]])
        if (-1) ** k * minor <= 0:
            return False
    return True


def solve_against(
    lattice: IntersectionLattice,
    subset: Sequence[ClassVector],
    target: ClassVector,
) -> list[Rat]:
    """Coefficients x with (target + sum x_k subset_k) . subset_j = 0 for all j.

    This is the solve behind every pullback and discrepancy computation: the
    unique correction supported on a negative-definite curve set making the
    result orthogonal to that set.
    """
    lattice.check_rank(target)
    block = gram_block(lattice, subset)
    rhs = [-intersect(lattice, target, v) for v in subset]
    return solve_linear(block, rhs)


@dataclass(frozen=True)
class NamedDivisor:
    """Finite formal rational combination of named irreducible curves.

    Terms are kept sorted by curve name (numeric-aware) with no zero
    coefficients, so equal divisors compare and serialize identically.

    >>> D = NamedDivisor.of({"E_1": 1, "l_2": Fraction(-1, 2)})
    >>> print(D)
    E_1 - 1/2*l_2
    >>> print(D + NamedDivisor.of({"E_1": -1}))
    -1/2*l_2
    >>> print(floor_divisor(D))
    E_1 - l_2
    >>> print(frac_divisor(D))
    1/2*l_2
    """

    entries: tuple[tuple[str, Rat], ...]

    @staticmethod
    def of(terms: Mapping[str, object] | Iterable[tuple[str, object]]) -> "NamedDivisor":
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[str, Fraction] = {}
        for name, coeff in items:
            acc[name] = acc.get(name, Fraction(0)) + Fraction(coeff)
        cleaned = [(n, c) for n, c in acc.items() if c != 0]
        cleaned.sort(key=lambda item: curve_sort_key(item[0]))
        return NamedDivisor(tuple(cleaned))

    @staticmethod
    def zero() -> "NamedDivisor":
        return NamedDivisor(())

    @property
    def terms(self) -> dict[str, Rat]:
        return dict(self.entries)

    def coefficient(self, name: str) -> Rat:
        for n, c in self.entries:
            if n == name:
                return c
        return Fraction(0)

    def support(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for _, c in self.entries)

    def __add__(self, other: "NamedDivisor") -> "NamedDivisor":
        return NamedDivisor.of(list(self.entries) + list(other.entries))

    def __sub__(self, other: "NamedDivisor") -> "NamedDivisor":
        return self + other.scale(-1)

    def __neg__(self) -> "NamedDivisor":
        return self.scale(-1)

    def scale(self, c) -> "NamedDivisor":
        c = Fraction(c)
        if c == 0:
            return NamedDivisor.zero()
        return NamedDivisor(tuple((n, c * a) for n, a in self.entries))

    def __rmul__(self, c) -> "NamedDivisor":
        return self.scale(c)

    def restrict(self, names: Iterable[str]) -> "NamedDivisor":
        keep = set(names)
        return NamedDivisor(tuple((n, c) for n, c in self.entries if n in keep))

    def drop(self, names: Iterable[str]) -> "NamedDivisor":
        omit = set(names)
        return NamedDivisor(tuple((n, c) for n, c in self.entries if n not in omit))

    def __str__(self) -> str:
        if not self.entries:
            return "0"
        parts = []
        for name, c in self.entries:
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = name if mag == 1 else f"{format_rat(mag)}*{name}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _map_coeffs(D: NamedDivisor, fn) -> NamedDivisor:
    return NamedDivisor.of({n: Fraction(fn(c)) for n, c in D.entries})


def floor_divisor(D: NamedDivisor) -> NamedDivisor:
    """Componentwise floor of the named-curve coefficients."""
    return _map_coeffs(D, floor)


def ceil_divisor(D: NamedDivisor) -> NamedDivisor:
    """Componentwise ceiling of the named-curve coefficients."""
    return _map_coeffs(D, ceil)


def frac_divisor(D: NamedDivisor) -> NamedDivisor:
    """Componentwise fractional part; floor_divisor(D) + frac_divisor(D) == D."""
    return _map_coeffs(D, lambda c: c - floor(c))


@dataclass(frozen=True)
class RegistryEntry:
    cls: ClassVector
    is_prime: bool


@dataclass(frozen=True)
class CurveRegistry:
    """Curve name -> class table; all classes share one lattice."""

    lattice: IntersectionLattice
    entries: tuple[tuple[str, RegistryEntry], ...]

    @staticmethod
    def of(
        lattice: IntersectionLattice,
        entries: Mapping[str, RegistryEntry] | Iterable[tuple[str, RegistryEntry]],
    ) -> "CurveRegistry":
        items = entries.items() if isinstance(entries, Mapping) else entries
        ordered = sorted(items, key=lambda item: curve_sort_key(item[0]))
        for _, entry in ordered:
            lattice.check_rank(entry.cls)
        return CurveRegistry(lattice, tuple(ordered))

    @property
    def table(self) -> dict[str, RegistryEntry]:
        return dict(self.entries)

    @cached_property
    def _by_name(self) -> dict[str, RegistryEntry]:
        return dict(self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def class_vector(self, name: str) -> ClassVector:
        entry = self._by_name.get(name)
        if entry is None:
            raise UnknownCurveError(f"unknown curve name: {name!r}")
        return entry.cls

    def prime_names(self) -> tuple[str, ...]:
        return tuple(n for n, e in self.entries if e.is_prime)


def class_of(registry: CurveRegistry, D: NamedDivisor) -> ClassVector:
    """The class of a named divisor: the matching combination of curve classes."""
    out = ClassVector.zero(registry.lattice.rank)
    for name, coeff in D.entries:
        out = out + registry.class_vector(name).scale(coeff)
    return out
