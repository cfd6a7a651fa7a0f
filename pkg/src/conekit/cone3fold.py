"""Numerical ledger of the cone threefolds over the rank-one target.

The threefold tower (a relative Proj over the source surface, its fibre-wise
contraction, and the cone obtained by collapsing the negative section) is
never modelled as a scheme.  Every intersection number of the symbolic cycles
(sections S+/S-, reduced fibres R_C over contracted curves, section curves
E_i^+/E_i^-, resolution divisors F) is *derived by formula from surface
data*, and overdetermined entries are cross-checked against each other; a
mismatch raises, it is never absorbed.

The multiplicities m_C come from the fractional part of the pulled-back
polarization: each contracted curve must carry fractional coefficient 0
(then m_C = 1) or a unit fraction 1/m_C.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .contract import Contraction
from .km_surface import KMSurface
from .qlattice import (
    NamedDivisor,
    Rat,
    class_of,
    curve_sort_key,
    format_rat,
    frac_divisor,
    intersect,
)


class ConeError(ValueError):
    pass


class AssumptionError(ConeError):
    """The pulled-back polarization has a non-unit fractional coefficient."""

    def __init__(self, curve: str, coefficient: Rat):
        self.curve = curve
        self.coefficient = coefficient
        super().__init__(
            f"fractional coefficient of {curve} is {format_rat(coefficient)}, "
            "not a unit fraction"
        )


def validate_assumption_a(psi: Contraction, A: NamedDivisor) -> dict[str, int]:
    """Extract the multiplicity table {contracted curve: m_C} from pullback(A).

    Each contracted curve must appear in the fractional part of the pullback
    with coefficient 0 (m_C = 1) or 1/m (m_C = m); anything else violates the
    cone's structural assumption and is reported with the offending curve.
    """
    if not A.is_integral():
        raise ConeError(f"polarization must be integral: {A}")
    frac = frac_divisor(psi.pullback(A))
    stray = [n for n in frac.support() if n not in psi.contracted]
    if stray:
        raise AssumptionError(stray[0], frac.coefficient(stray[0]))
    table: dict[str, int] = {}
    for name in sorted(psi.contracted, key=curve_sort_key):
        c = frac.coefficient(name)
        if c == 0:
            table[name] = 1
        elif c.numerator == 1:
            table[name] = c.denominator
        else:
            raise AssumptionError(name, c)
    return table


@dataclass(frozen=True)
class ConeInput:
    """Validated input: the surface, its contraction, and an ample integral
    polarization on the target satisfying the unit-fraction assumption."""

    surface: KMSurface
    psi: Contraction
    polarization: NamedDivisor

    def __post_init__(self):
        if not self.psi.is_ample_rho1(self.polarization):
            raise ConeError(f"polarization is not ample: {self.polarization}")
        validate_assumption_a(self.psi, self.polarization)


@dataclass(frozen=True)
class ConeModel:
    """The input plus the derived multiplicity table and pulled polarization."""

    input: ConeInput

    @staticmethod
    def build(surface: KMSurface, psi: Contraction, A: NamedDivisor) -> "ConeModel":
        return ConeModel(ConeInput(surface, psi, A))

    @property
    def surface(self) -> KMSurface:
        return self.input.surface

    @property
    def psi(self) -> Contraction:
        return self.input.psi

    @property
    def d(self) -> int:
        return self.surface.d

    @cached_property
    def mc(self) -> dict[str, int]:
        return validate_assumption_a(self.psi, self.input.polarization)

    @cached_property
    def pulled_polarization(self) -> NamedDivisor:
        return self.psi.pullback(self.input.polarization)

    @cached_property
    def _pulled_class(self):
        return class_of(self.surface.registry, self.pulled_polarization)

    @cached_property
    def _curve_squares(self) -> dict[str, Rat]:
        lat = self.surface.lattice
        return {
            name: intersect(lat, entry.cls, entry.cls)
            for name, entry in self.surface.registry.entries
        }

    def curve_square(self, name: str) -> Rat:
        return self._curve_squares[name]

    def polarization_dot_e(self, i: int) -> Rat:
        """pullback(A) . E_i on the source surface."""
        return intersect(
            self.surface.lattice,
            self._pulled_class,
            self.surface.class_vector(f"E_{i}"),
        )

    @cached_property
    def crepant_coefficients(self) -> dict[str, Rat]:
        """c_C = (-C^2 - 2 m_C)/(-C^2) per contracted curve."""
        out: dict[str, Rat] = {}
        for name in sorted(self.psi.contracted, key=curve_sort_key):
            sq = self.curve_square(name)
            out[name] = Fraction(-sq - 2 * self.mc[name], -sq)
        return out


@dataclass(frozen=True)
class CurveRecord:
    """Numbers attached to the fibre divisor over one contracted curve."""

    curve: str
    m: int
    square: Rat  # C^2 on the surface
    # pullback identity: (surface pullback of C) = m * R_C
    section_curve_square_in_fibre: Rat  # (C^+/- inside R_C)^2
    section_dot_section_curve: Rat  # S^+/- . C^+/-
    k_dot_section_curve: Rat  # K_X . C^+/-

    def to_json_dict(self) -> dict:
        return {
            "curve": self.curve,
            "m": self.m,
            "square": format_rat(self.square),
            "pullback_multiplicity": self.m,
            "section_curve_square_in_fibre": format_rat(
                self.section_curve_square_in_fibre
            ),
            "section_dot_section_curve": format_rat(self.section_dot_section_curve),
            "k_dot_section_curve": format_rat(self.k_dot_section_curve),
        }


def cone_curve_numbers(model: ConeModel, curve: str) -> CurveRecord:
    """The fibre-divisor record over one contracted curve.

    K_X meets the section curves C^+ and C^- in (-C^2 - 2 m_C)/m_C; they have
    square zero inside the fibre divisor and are disjoint from the opposite
    sections.
    """
    if curve not in model.psi.contracted:
        raise ConeError(f"{curve} is not contracted")
    m = model.mc[curve]
    sq = model.curve_square(curve)
    return CurveRecord(
        curve=curve,
        m=m,
        square=sq,
        section_curve_square_in_fibre=Fraction(0),
        section_dot_section_curve=Fraction(0),
        k_dot_section_curve=Fraction(-sq - 2 * m, m),
    )


def crepant_pullback_fy(model: ConeModel) -> dict[str, Rat]:
    """Coefficients c_C with K_X + sum c_C R_C equal to the pullback of K_Y.

    c_C = (-C^2 - 2 m_C)/(-C^2); the discrepancy of R_C over Y is -c_C.
    """
    return dict(model.crepant_coefficients)


@dataclass(frozen=True)
class SectionRecord:
    """Intersection numbers of the section curves E_i^+/- with the ledger cycles.

    Overdetermined: k_y_dot values are produced both as k_x + crepant_sum and
    from the closed Gamma-only form; construction fails if they disagree.
    """

    i: int
    j: int
    polarization_dot_e_i: Rat
    s_plus_dot_e_plus_j: Rat
    s_minus_dot_e_minus_j: Rat
    k_x_dot_e_plus: Rat
    k_x_dot_e_minus: Rat
    crepant_sum: Rat  # (sum c_C R_C) . E_i^{+/-}
    k_y_dot_f_e_plus: Rat
    k_y_dot_f_e_minus: Rat
    e_y_dot_f_e: Rat  # E_i^Y . f(E_j^{+/-}), expected 1/(2d-4)

    def to_json_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "polarization_dot_e_i": format_rat(self.polarization_dot_e_i),
            "s_plus_dot_e_plus_j": format_rat(self.s_plus_dot_e_plus_j),
            "s_minus_dot_e_minus_j": format_rat(self.s_minus_dot_e_minus_j),
            "k_x_dot_e_plus": format_rat(self.k_x_dot_e_plus),
            "k_x_dot_e_minus": format_rat(self.k_x_dot_e_minus),
            "k_y_dot_f_e_plus": format_rat(self.k_y_dot_f_e_plus),
            "k_y_dot_f_e_minus": format_rat(self.k_y_dot_f_e_minus),
            "e_y_dot_f_e": format_rat(self.e_y_dot_f_e),
        }


def section_numbers(model: ConeModel, i: int, j: int) -> SectionRecord:
    d = model.d
    if not (1 <= i <= d and 1 <= j <= d):
        raise ConeError(f"section indices out of range 1..{d}: ({i}, {j})")

    a_dot_ei = model.polarization_dot_e(i)
    a_dot_ej = model.polarization_dot_e(j)
    m_gamma = model.mc["Gamma"]
    m_l = model.mc[f"l_{i}"]
    m_lp = model.mc[f"lp_{i}"]

    def unit_defect(m: int) -> Rat:
        return Fraction(m - 1, m)

    k_x_plus = unit_defect(m_gamma) + unit_defect(m_l) + unit_defect(m_lp) - 1 - a_dot_ei
    k_x_minus = unit_defect(m_gamma) + unit_defect(m_l) + unit_defect(m_lp) - 1 + a_dot_ei

    # uniform crepant sum: sum over contracted C of c_C (C.E_i)/m_C
    lat = model.surface.lattice
    e_cls = model.surface.class_vector(f"E_{i}")
    crepant = model.crepant_coefficients
    crepant_sum = Fraction(0)
    for name, c in crepant.items():
        dot = intersect(lat, model.surface.class_vector(name), e_cls)
        if dot:
            crepant_sum += c * Fraction(dot, model.mc[name])

    # printed form of the same sum: Gamma term plus (1-m)/m for the two
    # (-2)-curves of the i-th fibre
    gamma_sq = model.curve_square("Gamma")
    printed = (
        Fraction(-gamma_sq - 2 * m_gamma, -gamma_sq * m_gamma)
        + Fraction(1 - m_l, m_l)
        + Fraction(1 - m_lp, m_lp)
    )
    if crepant_sum != printed:
        raise ConeError(
            f"crepant sum mismatch at i={i}: uniform {crepant_sum} vs printed {printed}"
        )

    k_y_plus = k_x_plus + crepant_sum
    k_y_minus = k_x_minus + crepant_sum
    # Gamma-only closed form for the same numbers
    gamma_term = Fraction(-gamma_sq - 2 * m_gamma, -gamma_sq * m_gamma)
    closed_plus = unit_defect(m_gamma) - 1 - a_dot_ei + gamma_term
    closed_minus = unit_defect(m_gamma) - 1 + a_dot_ei + gamma_term
    if k_y_plus != closed_plus or k_y_minus != closed_minus:
        raise ConeError(f"K_Y section numbers disagree at i={i}")

    e_y_dot = intersect(
        lat,
        model.psi.pullback_class(NamedDivisor.of({f"E_{i}": 1})),
        model.surface.class_vector(f"E_{j}"),
    )
    if e_y_dot != Fraction(1, 2 * d - 4):
        raise ConeError(
            f"E^Y.f(E^+/-) is {e_y_dot} at (i,j)=({i},{j}), expected 1/(2d-4)"
        )

    return SectionRecord(
        i=i,
        j=j,
        polarization_dot_e_i=a_dot_ei,
        s_plus_dot_e_plus_j=a_dot_ej,
        s_minus_dot_e_minus_j=-a_dot_ej,
        k_x_dot_e_plus=k_x_plus,
        k_x_dot_e_minus=k_x_minus,
        crepant_sum=crepant_sum,
        k_y_dot_f_e_plus=k_y_plus,
        k_y_dot_f_e_minus=k_y_minus,
        e_y_dot_f_e=e_y_dot,
    )


@dataclass(frozen=True)
class PltCoefficient:
    """The boundary coefficient of the negative section over the cone point.

    b = (p - 1/(2d-4)) / p where p = pullback(A).E_i; the pair over the cone
    is plt when b < 1 and the surface contraction is klt.
    """

    i: int
    polarization_dot_e: Rat
    b: Rat
    plt: bool
    surface_certificate: str

    def to_json_dict(self) -> dict:
        return {
            "i": self.i,
            "polarization_dot_e": format_rat(self.polarization_dot_e),
            "b": format_rat(self.b),
            "plt": self.plt,
            "surface_certificate": self.surface_certificate,
        }


def plt_coefficient_b(model: ConeModel, i: int) -> PltCoefficient:
    p = model.polarization_dot_e(i)
    if p == 0:
        raise ConeError(f"pullback(A).E_{i} = 0: coefficient undefined")
    b = (p - Fraction(1, 2 * model.d - 4)) / p
    surface_class = model.psi.classify_singularities()
    return PltCoefficient(
        i=i,
        polarization_dot_e=p,
        b=b,
        plt=(b < 1 and surface_class.is_klt),
        surface_certificate=f"surface contraction is {surface_class.classification} "
        "(minimal-resolution criterion)",
    )


@dataclass(frozen=True)
class ResolutionRecord:
    """Pullback coefficients of the explicit resolution over one fibre divisor.

    Over a curve with multiplicity m: one divisor F+ over the positive side
    with discrepancy (m-2)/m, and a chain F-_1 ... F-_{m-1} over the negative
    side linking the negative section to the fibre divisor.
    """

    curve: str
    m: int
    f_plus_discrepancy: Rat
    mu_s_plus_coeff: Rat  # coefficient of F+ in the pullback of S+
    mu_s_minus_chain: tuple[Rat, ...]  # coefficients of F-_1 ... F-_{m-1}
    mu_r_f_plus: Rat  # coefficient of F+ in the pullback of R_C
    mu_r_minus_chain: tuple[Rat, ...]
    dual_graph: str

    def to_json_dict(self) -> dict:
        return {
            "curve": self.curve,
            "m": self.m,
            "f_plus_discrepancy": format_rat(self.f_plus_discrepancy),
            "mu_s_plus_coeff": format_rat(self.mu_s_plus_coeff),
            "mu_s_minus_chain": [format_rat(c) for c in self.mu_s_minus_chain],
            "mu_r_f_plus": format_rat(self.mu_r_f_plus),
            "mu_r_minus_chain": [format_rat(c) for c in self.mu_r_minus_chain],
            "dual_graph": self.dual_graph,
        }


def resolution_ledger(model: ConeModel) -> list[ResolutionRecord]:
    """Resolution records for every contracted curve with multiplicity >= 2."""
    records = []
    for name in sorted(model.psi.contracted, key=curve_sort_key):
        m = model.mc[name]
        if m < 2:
            continue
        chain_names = [f"F^-_{k}" for k in range(1, m)]
        records.append(
            ResolutionRecord(
                curve=name,
                m=m,
                f_plus_discrepancy=Fraction(m - 2, m),
                mu_s_plus_coeff=Fraction(1, m),
                mu_s_minus_chain=tuple(Fraction(m - k, m) for k in range(1, m)),
                mu_r_f_plus=Fraction(1, m),
                mu_r_minus_chain=tuple(Fraction(k, m) for k in range(1, m)),
                dual_graph=" - ".join(["S~^-"] + chain_names + [f"R~_{name}"]),
            )
        )
    return records


@dataclass(frozen=True)
class AdjunctionCheck:
    name: str
    lhs: Rat
    rhs: Rat

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class AdjunctionReport:
    checks: tuple[AdjunctionCheck, ...]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[AdjunctionCheck]:
        return [c for c in self.checks if not c.passed]

    def to_json_dict(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "checks": [
                {
                    "name": c.name,
                    "lhs": format_rat(c.lhs),
                    "rhs": format_rat(c.rhs),
                    "pass": c.passed,
                }
                for c in self.checks
            ],
        }


def adjunction_consistency(model: ConeModel) -> AdjunctionReport:
    """Cross-check the threefold ledger against pure lattice arithmetic.

    For each section curve E_i^+/-, the ledger value of (K_X + S+ + S-) . E
    must equal (K_S + sum (m_C-1)/m_C C) . E_i computed on the surface; for
    each contracted curve, the ledger value of K_X . C^+/- must equal the
    same adjoint divisor paired with C.  Both sides come from independent
    code paths.
    """
    lat = model.surface.lattice
    reg = model.surface.registry
    adjoint_cls = lat.canonical + class_of(
        reg,
        NamedDivisor.of(
            {name: Fraction(m - 1, m) for name, m in model.mc.items()}
        ),
    )
    checks: list[AdjunctionCheck] = []
    for i in range(1, model.d + 1):
        rec = section_numbers(model, i, i)
        rhs = intersect(lat, adjoint_cls, model.surface.class_vector(f"E_{i}"))
        # S^+ . E_i^+ = pol.E_i and S^- . E_i^+ = 0 (sections are disjoint)
        lhs_plus = rec.k_x_dot_e_plus + rec.polarization_dot_e_i
        lhs_minus = rec.k_x_dot_e_minus - rec.polarization_dot_e_i
        checks.append(AdjunctionCheck(f"sections:E_{i}^+", lhs_plus, rhs))
        checks.append(AdjunctionCheck(f"sections:E_{i}^-", lhs_minus, rhs))
    for name in sorted(model.psi.contracted, key=curve_sort_key):
        rec = cone_curve_numbers(model, name)
        lhs = rec.k_dot_section_curve  # S+. C+ = S-.C- = 0 and cross terms vanish
        rhs = intersect(lat, adjoint_cls, model.surface.class_vector(name))
        checks.append(AdjunctionCheck(f"curve:{name}", lhs, rhs))
    return AdjunctionReport(tuple(checks))


@dataclass(frozen=True)
class PicardChain:
    rho_s: int
    rho_t: int
    rho_x: int
    rho_y: int
    rho_z: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.rho_s, self.rho_t, self.rho_x, self.rho_y, self.rho_z)

    def to_json_dict(self) -> dict:
        return {
            "rho_s": self.rho_s,
            "rho_t": self.rho_t,
            "rho_x": self.rho_x,
            "rho_y": self.rho_y,
            "rho_z": self.rho_z,
        }


def picard_chain(model: ConeModel) -> PicardChain:
    """Picard ranks along the tower.

    The Proj adds one to the surface rank; the fibre-wise contraction removes
    one rank per contracted curve; collapsing the negative section removes
    one more.  Internal consistency (target rank one, cone rank one) is
    asserted.
    """
    rho_s = model.surface.lattice.rank
    rho_t = model.psi.picard_rank_after()
    rho_x = rho_s + 1
    rho_y = rho_x - len(model.psi.contracted)
    rho_z = rho_y - 1
    if rho_t != 1 or rho_y != 2 or rho_z != 1:
        raise ConeError(f"Picard chain inconsistent: {(rho_s, rho_t, rho_x, rho_y, rho_z)}")
    return PicardChain(rho_s, rho_t, rho_x, rho_y, rho_z)


@dataclass(frozen=True)
class KvvStep:
    j: int
    mu: Rat
    chosen: int  # 1-based index of the divisor whose coefficient reached one
    lam: Rat
    delta: tuple[Rat, ...]

    def to_json_dict(self) -> dict:
        return {
            "j": self.j,
            "mu": format_rat(self.mu),
            "chosen": self.chosen,
            "lambda": format_rat(self.lam),
            "delta": [format_rat(x) for x in self.delta],
        }


@dataclass(frozen=True)
class KvvTrace:
    multiplicities: tuple[int, ...]
    delta0: tuple[Rat, ...]
    target: Rat
    steps: tuple[KvvStep, ...]

    @property
    def final_lambda(self) -> Rat:
        return self.steps[-1].lam if self.steps else Fraction(0)

    def to_json_dict(self) -> dict:
        return {
            "multiplicities": list(self.multiplicities),
            "delta0": [format_rat(x) for x in self.delta0],
            "target": format_rat(self.target),
            "steps": [s.to_json_dict() for s in self.steps],
        }


def kvv_schedule(
    multiplicities,
    delta0,
    lambda_target,
) -> KvvTrace:
    """Coefficient-reduction schedule behind the birational vanishing descent.

    At every step, raise all coefficients proportionally to the
    multiplicities until one reaches 1 (mu_j = min (1-delta_i)/e_i, ties to
    the lowest index), then drop that coefficient by one and advance lambda
    by mu_j.  lambda diverges (each index recurs, contributing 1/e_i between
    recurrences), so any target is reached in finitely many steps.
    """
    e = tuple(int(x) for x in multiplicities)
    if not e or any(x < 1 for x in e):
        raise ConeError(f"multiplicities must be positive integers: {e}")
    delta = [Fraction(x) for x in delta0]
    if len(delta) != len(e):
        raise ConeError("delta0 and multiplicities must have equal length")
    if any(x < 0 or x >= 1 for x in delta):
        raise ConeError(f"initial coefficients must lie in [0,1): {delta}")
    target = Fraction(lambda_target)
    if target < 0:
        raise ConeError(f"target must be nonnegative: {target}")

    lam = Fraction(0)
    steps: list[KvvStep] = []
    j = 0
    while lam < target:
        mu = min((1 - dv) / ev for dv, ev in zip(delta, e))
        chosen = next(
            idx for idx, (dv, ev) in enumerate(zip(delta, e))
            if (1 - dv) / ev == mu
        )
        delta = [dv + mu * ev for dv, ev in zip(delta, e)]
        if any(dv < 0 or dv > 1 for dv in delta):
            raise ConeError(f"coefficient left [0,1] at step {j}: {delta}")
        delta[chosen] -= 1
        lam += mu
        steps.append(
            KvvStep(j=j, mu=mu, chosen=chosen + 1, lam=lam, delta=tuple(delta))
        )
        j += 1
    return KvvTrace(
        multiplicities=e,
        delta0=tuple(Fraction(x) for x in delta0),
        target=target,
        steps=tuple(steps),
    )
