"""The rank-one del Pezzo degeneration surface S(d) and a generic blow-up replayer.

S(d) is the smooth rational surface obtained from the plane by 2d+1 blow-ups:
one point off a conic Gamma that is tangent to every line through it, then d
points on Gamma, then the d residual tangency points.  Everything downstream
needs only the resulting Picard lattice and the named curve classes, so the
construction is purely combinatorial: a :class:`BlowupPlan` records, for each
blow-up, which named curves pass through the centre with which multiplicity,
and replaying the plan produces the lattice.

Resulting data, in the orthogonal basis (H, e0, e_1_1, e_1_2, ..., e_d_1, e_d_2):

* ``Gamma = 2H - sum_i (e_i_1 + e_i_2)``, so ``Gamma^2 = 4 - 2d``
* ``l_i   = H - e0 - e_i_1 - e_i_2`` (fibre component, a (-2)-curve)
* ``lp_i  = e_i_1 - e_i_2``          (fibre component, a (-2)-curve)
* ``E_i   = e_i_2``                  (the (-1)-curve of the fibre)
* ``F     = H - e0``                 (general fibre), ``F = 2E_i + l_i + lp_i``
* ``K     = -3H + e0 + sum (e_i_1 + e_i_2)``, and ``-K = Gamma + F``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qlattice import (
    ClassVector,
    CurveRegistry,
    IntersectionLattice,
    NamedDivisor,
    RegistryEntry,
    class_of,
    format_rat,
    intersect,
)

MIN_D = 3  # below this Gamma^2 >= 0 and the contraction of Gamma is unavailable


@dataclass(frozen=True)
class BlowupStep:
    """One blow-up: new orthogonal basis element plus affected named curves.

    ``through`` lists (curve name, multiplicity of the curve at the centre);
    replay subtracts multiplicity times the new exceptional class from each.
    ``register`` optionally enters the exceptional curve itself in the
    registry under the given name.
    """

    exceptional: str
    through: tuple[tuple[str, int], ...] = ()
    register: str | None = None


@dataclass(frozen=True)
class BlowupPlan:
    steps: tuple[BlowupStep, ...]


@dataclass(frozen=True)
class SurfaceData:
    """A lattice plus its named-curve registry (the output of a replay)."""

    lattice: IntersectionLattice
    registry: CurveRegistry


def replay(
    base_names: tuple[str, ...],
    base_squares: tuple[int, ...],
    base_canonical: ClassVector,
    base_curves: dict[str, ClassVector],
    plan: BlowupPlan,
) -> SurfaceData:
    """Replay a blow-up plan over an orthogonal base lattice.

    Each step extends the Gram matrix orthogonally by a (-1) class, adds that
    class to the canonical divisor, and reduces every named curve through the
    centre by its multiplicity.
    """
    names = list(base_names)
    squares = [Fraction(s) for s in base_squares]
    canonical = list(base_canonical.coeffs)
    curves: dict[str, list[Fraction]] = {
        n: list(v.coeffs) for n, v in base_curves.items()
    }

    for step in plan.steps:
        names.append(step.exceptional)
        squares.append(Fraction(-1))
        canonical = canonical + [Fraction(1)]
        for coords in curves.values():
            coords.append(Fraction(0))
        for curve_name, mult in step.through:
            curves[curve_name][-1] = Fraction(-mult)
        if step.register is not None:
            coords = [Fraction(0)] * len(names)
            coords[-1] = Fraction(1)
            curves[step.register] = coords

    rank = len(names)
    gram = tuple(
        tuple(squares[i] if i == j else Fraction(0) for j in range(rank))
        for i in range(rank)
    )
    lattice = IntersectionLattice(
        basis_names=tuple(names),
        gram=gram,
        canonical=ClassVector(tuple(canonical)),
        chi_structure_sheaf=Fraction(1),
    )
    registry = CurveRegistry.of(
        lattice,
        {
            n: RegistryEntry(ClassVector(tuple(v)), is_prime=True)
            for n, v in curves.items()
        },
    )
    return SurfaceData(lattice, registry)


@dataclass(frozen=True)
class KMSurface:
    """S(d) with its rank 2+2d lattice and the named curves used downstream.

    >>> s = build_km_surface(5)
    >>> s.lattice.rank
    12
    >>> s.pairing("Gamma", "Gamma")
    Fraction(-6, 1)
    >>> s.pairing("E_2", "l_2")
    Fraction(1, 1)
    """

    d: int
    lattice: IntersectionLattice
    registry: CurveRegistry

    @property
    def canonical(self) -> ClassVector:
        return self.lattice.canonical

    @property
    def canonical_named(self) -> NamedDivisor:
        """K expressed in registered curves: K = -(Gamma + F)."""
        return NamedDivisor.of({"Gamma": -1, "F": -1})

    def curve_names(self) -> tuple[str, ...]:
        return self.registry.names()

    def exceptional_names(self) -> tuple[str, ...]:
        """The 2d+1 curves contracted by the map to the rank-one surface."""
        return tuple(
            ["Gamma"]
            + [f"l_{i}" for i in range(1, self.d + 1)]
            + [f"lp_{i}" for i in range(1, self.d + 1)]
        )

    def class_vector(self, name: str) -> ClassVector:
        return self.registry.class_vector(name)

    def pairing(self, a: str, b: str):
        return intersect(
            self.lattice, self.class_vector(a), self.class_vector(b)
        )

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "rank": self.lattice.rank,
            "basis": list(self.lattice.basis_names),
            "canonical": [format_rat(c) for c in self.canonical.coeffs],
            "curves": {
                name: [format_rat(c) for c in entry.cls.coeffs]
                for name, entry in self.registry.entries
            },
        }


def km_blowup_plan(d: int) -> BlowupPlan:
    """The 2d+1 step plan: the strange point, then P_i on Gamma, then the
    residual tangency points Q_i (on Gamma, on the fibre, and on the first
    exceptional curve)."""
    steps: list[BlowupStep] = [
        BlowupStep(
            exceptional="e0",
            # every fibre line passes through the strange point, F included
            through=tuple([("F", 1)] + [(f"l_{i}", 1) for i in range(1, d + 1)]),
        )
    ]
    for i in range(1, d + 1):
        steps.append(
            BlowupStep(
                exceptional=f"e_{i}_1",
                through=(("Gamma", 1), (f"l_{i}", 1)),
                register=f"lp_{i}",
            )
        )
        steps.append(
            BlowupStep(
                exceptional=f"e_{i}_2",
                through=(("Gamma", 1), (f"l_{i}", 1), (f"lp_{i}", 1)),
                register=f"E_{i}",
            )
        )
    return BlowupPlan(tuple(steps))


def build_km_surface(d: int) -> KMSurface:
    """Construct S(d); requires d >= 3 so that Gamma^2 = 4 - 2d < 0."""
    if d < MIN_D:
        raise ValueError(f"d must be >= {MIN_D}, got {d}")
    base_curves = {
        "Gamma": ClassVector.of([2]),
        "F": ClassVector.of([1]),
    }
    for i in range(1, d + 1):
        base_curves[f"l_{i}"] = ClassVector.of([1])
    data = replay(
        base_names=("H",),
        base_squares=(1,),
        base_canonical=ClassVector.of([-3]),
        base_curves=base_curves,
        plan=km_blowup_plan(d),
    )
    return KMSurface(d=d, lattice=data.lattice, registry=data.registry)


@dataclass(frozen=True)
class SanityItem:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SanityReport:
    items: tuple[SanityItem, ...]

    @property
    def all_pass(self) -> bool:
        return all(item.passed for item in self.items)

    def to_json_dict(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "items": [
                {"name": i.name, "pass": i.passed, "detail": i.detail}
                for i in self.items
            ],
        }


def km_sanity(s: KMSurface) -> SanityReport:
    """Check the structural identities of S(d) and report each one.

    (a) F = 2E_i + l_i + lp_i as classes, for every i
    (b) the 2d+1 curves Gamma, l_i, lp_i are pairwise orthogonal
    (c) E_i.Gamma = E_i.l_i = E_i.lp_i = 1
    (d) -K = Gamma + F
    (e) Gamma.F = 2
    """
    items: list[SanityItem] = []
    lat, reg = s.lattice, s.registry
    f_class = reg.class_vector("F")

    ok = True
    for i in range(1, s.d + 1):
        combo = class_of(
            reg, NamedDivisor.of({f"E_{i}": 2, f"l_{i}": 1, f"lp_{i}": 1})
        )
        if combo != f_class:
            ok = False
    items.append(
        SanityItem("fibre_decomposition", ok, "F = 2E_i + l_i + lp_i for all i")
    )

    exceptional = s.exceptional_names()
    ok = True
    for a_idx, a in enumerate(exceptional):
        for b in exceptional[a_idx + 1 :]:
            if s.pairing(a, b) != 0:
                ok = False
    items.append(
        SanityItem(
            "exceptional_orthogonal",
            ok,
            "Gamma, l_i, lp_i pairwise orthogonal (2d+1 curves)",
        )
    )

    ok = all(
        s.pairing(f"E_{i}", other) == 1
        for i in range(1, s.d + 1)
        for other in ("Gamma", f"l_{i}", f"lp_{i}")
    )
    items.append(
        SanityItem("minus_one_meets", ok, "E_i.Gamma = E_i.l_i = E_i.lp_i = 1")
    )

    anti_k = class_of(reg, NamedDivisor.of({"Gamma": 1, "F": 1}))
    ok = anti_k == -lat.canonical
    items.append(SanityItem("anticanonical", ok, "-K = Gamma + F"))

    ok = s.pairing("Gamma", "F") == 2
    items.append(SanityItem("gamma_dot_fibre", ok, "Gamma.F = 2"))

    return SanityReport(tuple(items))
