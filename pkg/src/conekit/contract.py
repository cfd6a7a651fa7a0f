"""Birational contractions of curve sets on a lattice surface.

A :class:`Contraction` collapses a negative-definite set of named curves.
Divisors on the target are written through proper transforms, i.e. as named
divisors avoiding the contracted names; the numerical pullback is the unique
extension orthogonal to every contracted curve.  Discrepancies, pair
singularity classes, and all target intersection numbers derive from that one
solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .km_surface import KMSurface
from .qlattice import (
    ClassVector,
    NamedDivisor,
    Rat,
    class_of,
    format_rat,
    intersect,
    is_negative_definite,
)


class ContractionError(ValueError):
    pass


@dataclass(frozen=True)
class Contraction:
    """Contraction of ``contracted`` (curve names) on ``surface``.

    ``target_rho_one_minus_k_ample`` marks targets known to have Picard rank
    one with ample anticanonical class; ampleness tests refuse to run without
    it (they reduce to a degree sign only in that case).

    >>> from .km_surface import build_km_surface
    >>> psi = km_psi(build_km_surface(5))
    >>> print(psi.pullback(NamedDivisor.of({"E_1": 1})))
    E_1 + 1/6*Gamma + 1/2*l_1 + 1/2*lp_1
    >>> psi.relative_canonical().table["Gamma"]
    Fraction(-2, 3)
    """

    surface: object  # anything with .lattice and .registry (e.g. KMSurface)
    contracted: tuple[str, ...]
    target_rho_one_minus_k_ample: bool = False

    def __post_init__(self):
        if len(set(self.contracted)) != len(self.contracted):
            raise ContractionError("contracted curve names must be distinct")
        if self.contracted and not is_negative_definite(
            self.lattice, self.contracted_classes
        ):
            raise ContractionError("contracted Gram block is not negative definite")

    @property
    def lattice(self):
        return self.surface.lattice

    @property
    def registry(self):
        return self.surface.registry

    @cached_property
    def contracted_classes(self) -> tuple[ClassVector, ...]:
        return tuple(self.registry.class_vector(n) for n in self.contracted)

    @cached_property
    def gram_inverse(self) -> tuple[tuple[Rat, ...], ...]:
        """Inverse of the contracted Gram block, computed once and reused by
        every pullback/discrepancy solve."""
        from .qlattice import gram_block, solve_linear

        block = gram_block(self.lattice, self.contracted_classes)
        k = len(block)
        cols = [
            solve_linear(block, [Fraction(int(i == j)) for i in range(k)])
            for j in range(k)
        ]
        return tuple(tuple(cols[j][i] for j in range(k)) for i in range(k))

    def _correction(self, cls: ClassVector) -> NamedDivisor:
        """Exceptional part of the pullback of a class: orthogonalizing terms."""
        rhs = [
            -intersect(self.lattice, cls, c) for c in self.contracted_classes
        ]
        xs = [
            sum(row[j] * rhs[j] for j in range(len(rhs)))
            for row in self.gram_inverse
        ]
        return NamedDivisor.of(
            {name: x for name, x in zip(self.contracted, xs)}
        )

    @cached_property
    def _pullback_memo(self) -> dict:
        return {}

    def pullback(self, D: NamedDivisor) -> NamedDivisor:
        """Numerical pullback of a target divisor given via proper transforms."""
        memo = self._pullback_memo
        hit = memo.get(D)
        if hit is not None:
            return hit
        bad = [n for n in D.support() if n in self.contracted]
        if bad:
            raise ContractionError(
                f"divisor mentions contracted curves: {', '.join(bad)}"
            )
        out = D + self._correction(class_of(self.registry, D))
        memo[D] = out
        return out

    def pushforward(self, D: NamedDivisor) -> NamedDivisor:
        """Drop the contracted-curve terms."""
        return D.drop(self.contracted)

    @cached_property
    def _pullback_class_memo(self) -> dict:
        return {}

    def pullback_class(self, D: NamedDivisor) -> ClassVector:
        memo = self._pullback_class_memo
        hit = memo.get(D)
        if hit is None:
            hit = memo[D] = class_of(self.registry, self.pullback(D))
        return hit

    def target_intersect(self, D1: NamedDivisor, D2: NamedDivisor) -> Rat:
        """Intersection number on the target, computed as pullback . pullback."""
        return intersect(
            self.lattice, self.pullback_class(D1), self.pullback_class(D2)
        )

    def target_canonical(self) -> NamedDivisor:
        """K of the target through proper transforms (needs K named on the source)."""
        return self.pushforward(self.surface.canonical_named)

    def minus_k_target(self) -> NamedDivisor:
        return -self.target_canonical()

    def degree(self, D: NamedDivisor) -> Rat:
        """D . (-K) on the target."""
        return self.target_intersect(D, self.minus_k_target())

    def is_ample_rho1(self, D: NamedDivisor) -> bool:
        """Ampleness on a rank-one target with ample -K: positive degree."""
        if not self.target_rho_one_minus_k_ample:
            raise ContractionError(
                "target is not flagged as rank one with ample anticanonical class"
            )
        return self.degree(D) > 0

    @cached_property
    def _canonical_correction(self) -> NamedDivisor:
        return self._correction(self.lattice.canonical)

    def relative_canonical(self) -> "DiscrepancyTable":
        """Discrepancies a_C with K_source = pullback(K_target) + sum a_C C."""
        correction = self._canonical_correction
        return DiscrepancyTable(
            contraction=self,
            entries=tuple(
                (name, -correction.coefficient(name)) for name in self.contracted
            ),
        )

    def classify_singularities(
        self, boundary: NamedDivisor | None = None
    ) -> "SingularityClassification":
        """Classify the target pair (target, boundary) along this contraction.

        Uses the minimal-resolution criterion: only the discrepancies of the
        curves contracted by this map are inspected, with the boundary given
        on the target by proper-transform names and folded in through its
        pullback coefficients.
        """
        boundary = boundary if boundary is not None else NamedDivisor.zero()
        for name, c in boundary.entries:
            if c < 0 or c > 1:
                raise ContractionError(
                    f"boundary coefficient of {name} outside [0,1]: {format_rat(c)}"
                )
        base = self.relative_canonical().table
        boundary_pull = self.pullback(boundary)
        table = {
            name: base[name] - boundary_pull.coefficient(name)
            for name in self.contracted
        }
        lowest = min(table.values())
        from .qlattice import curve_sort_key, floor_divisor

        boundary_floor_zero = floor_divisor(boundary).is_zero()
        if lowest > 0:
            label = "terminal"
        elif lowest >= 0:
            label = "canonical"
        elif lowest > -1 and boundary_floor_zero:
            label = "klt"
        elif lowest > -1:
            label = "plt"
        elif lowest >= -1:
            label = "lc"
        else:
            label = "not-lc"
        return SingularityClassification(
            classification=label,
            table=tuple(sorted(table.items(), key=lambda kv: curve_sort_key(kv[0]))),
            min_discrepancy=lowest,
            boundary_floor_zero=boundary_floor_zero,
            certificate="minimal-resolution criterion",
        )

    def picard_rank_after(self) -> int:
        return self.lattice.rank - len(self.contracted)


@dataclass(frozen=True)
class DiscrepancyTable:
    """a_C per contracted curve, with K_source = pullback(K_target) + sum a_C C."""

    contraction: Contraction
    entries: tuple[tuple[str, Rat], ...]

    @property
    def table(self) -> dict[str, Rat]:
        return dict(self.entries)

    def residual_checks(self) -> bool:
        """(K_source - sum a_C C) . C' == 0 for every contracted C', exactly."""
        ctr = self.contraction
        correction = class_of(
            ctr.registry, NamedDivisor.of({n: -a for n, a in self.entries})
        )
        relative = ctr.lattice.canonical + correction
        return all(
            intersect(ctr.lattice, relative, c) == 0
            for c in ctr.contracted_classes
        )

    def to_json_dict(self) -> dict:
        return {name: format_rat(a) for name, a in self.entries}


@dataclass(frozen=True)
class SingularityClassification:
    """Finest singularity label plus the membership ladder it sits in.

    ``classification`` is the finest class (terminal < canonical < klt < plt
    < lc); the ``is_*`` properties give the coarser memberships, e.g. a
    crepant contraction is canonical, hence also klt.
    """

    classification: str
    table: tuple[tuple[str, Rat], ...]
    min_discrepancy: Rat
    boundary_floor_zero: bool
    certificate: str

    @property
    def is_terminal(self) -> bool:
        return self.min_discrepancy > 0

    @property
    def is_canonical(self) -> bool:
        return self.min_discrepancy >= 0

    @property
    def is_plt(self) -> bool:
        return self.min_discrepancy > -1

    @property
    def is_klt(self) -> bool:
        return self.is_plt and self.boundary_floor_zero

    @property
    def is_lc(self) -> bool:
        return self.min_discrepancy >= -1

    def to_json_dict(self) -> dict:
        return {
            "classification": self.classification,
            "klt": self.is_klt,
            "min_discrepancy": format_rat(self.min_discrepancy),
            "discrepancies": {n: format_rat(a) for n, a in self.table},
            "certificate": self.certificate,
        }


def km_psi(surface: KMSurface) -> Contraction:
    """The contraction of Gamma and all fibre (-2)-curves on S(d).

    The target has Picard rank one and ample anticanonical class, so the
    rank-one ampleness test is enabled on the result.
    """
    return Contraction(
        surface=surface,
        contracted=surface.exceptional_names(),
        target_rho_one_minus_k_ample=True,
    )
