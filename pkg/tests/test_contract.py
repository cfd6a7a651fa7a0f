from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conekit.contract import Contraction, ContractionError, km_psi
from conekit.km_surface import KMSurface, build_km_surface, replay, BlowupPlan, BlowupStep
from conekit.qlattice import ClassVector, NamedDivisor, class_of, intersect

S5 = build_km_surface(5)
PSI5 = km_psi(S5)

target_names = ["F"] + [f"E_{i}" for i in range(1, 6)]
small_rats = st.fractions(min_value=-3, max_value=3, max_denominator=4)


# --- pullback ----------------------------------------------------------------


def test_pullback_of_minus_one_curve():
    for d in (3, 5, 8):
        psi = km_psi(build_km_surface(d))
        got = psi.pullback(NamedDivisor.of({"E_2": 1}))
        assert got == NamedDivisor.of(
            {
                "E_2": 1,
                "l_2": Fraction(1, 2),
                "lp_2": Fraction(1, 2),
                "Gamma": Fraction(1, 2 * d - 4),
            }
        )


def test_pullback_of_zero():
    assert PSI5.pullback(NamedDivisor.zero()).is_zero()


def test_pullback_family_gamma_coefficient():
    A = NamedDivisor.of({"E_1": 1, "E_2": 1, "E_3": 1, "E_4": -1})
    assert PSI5.pullback(A).coefficient("Gamma") == Fraction(1, 3)


def test_pullback_rejects_contracted_names():
    with pytest.raises(ContractionError):
        PSI5.pullback(NamedDivisor.of({"Gamma": 1}))


@given(
    st.dictionaries(st.sampled_from(target_names), small_rats, min_size=0, max_size=4)
)
@settings(max_examples=60)
def test_pullback_orthogonal_to_contracted(terms):
    D = NamedDivisor.of(terms)
    pulled = class_of(PSI5.registry, PSI5.pullback(D))
    for name in PSI5.contracted:
        assert intersect(PSI5.lattice, pulled, PSI5.registry.class_vector(name)) == 0


# --- pushforward -------------------------------------------------------------


def test_pushforward_of_contracted_curve_is_zero():
    assert PSI5.pushforward(NamedDivisor.of({"Gamma": 1})).is_zero()


def test_pushforward_of_floored_pullback():
    from conekit.qlattice import floor_divisor

    A = NamedDivisor.of({"E_1": 1, "E_2": 1, "E_3": 1, "E_4": -1})
    floored = floor_divisor(PSI5.pullback(A))
    assert PSI5.pushforward(floored) == A


@given(
    st.dictionaries(st.sampled_from(target_names), small_rats, min_size=0, max_size=4)
)
@settings(max_examples=60)
def test_pushforward_pullback_round_trip(terms):
    D = NamedDivisor.of(terms)
    assert PSI5.pushforward(PSI5.pullback(D)) == D


# --- relative canonical ------------------------------------------------------


def test_gamma_discrepancy():
    for d in (4, 5, 10, 20):
        psi = km_psi(build_km_surface(d))
        table = psi.relative_canonical().table
        assert table["Gamma"] == -Fraction(d - 3, d - 2)


def test_minus_two_curves_have_zero_discrepancy():
    table = PSI5.relative_canonical().table
    for i in range(1, 6):
        assert table[f"l_{i}"] == 0
        assert table[f"lp_{i}"] == 0


def test_d3_gamma_discrepancy_vanishes():
    psi = km_psi(build_km_surface(3))
    assert psi.relative_canonical().table["Gamma"] == 0


def test_relative_canonical_orthogonality():
    for d in (3, 5, 12):
        psi = km_psi(build_km_surface(d))
        assert psi.relative_canonical().residual_checks()


# --- singularity classification ----------------------------------------------


def test_psi_is_klt_for_all_d():
    for d in range(3, 21):
        psi = km_psi(build_km_surface(d))
        got = psi.classify_singularities()
        assert got.is_klt
        # d = 3 is crepant, the finest label upgrades to canonical
        assert got.classification == ("canonical" if d == 3 else "klt")
        assert got.min_discrepancy == -Fraction(d - 3, d - 2)
        assert got.min_discrepancy > -1


def _one_point_blowup() -> KMSurface:
    data = replay(
        base_names=("H",),
        base_squares=(1,),
        base_canonical=ClassVector.of([-3]),
        base_curves={},
        plan=BlowupPlan((BlowupStep(exceptional="e1", register="E"),)),
    )
    return KMSurface(d=3, lattice=data.lattice, registry=data.registry)


def test_blowdown_of_minus_one_curve_is_terminal():
    ctr = Contraction(surface=_one_point_blowup(), contracted=("E",))
    got = ctr.classify_singularities()
    assert got.classification == "terminal"
    assert got.table == (("E", Fraction(1)),)


def test_pair_with_boundary_through_gamma():
    got = PSI5.classify_singularities(NamedDivisor.of({"E_5": 1}))
    table = dict(got.table)
    # boundary transform meets Gamma: its pullback coefficient 1/6 lowers a_Gamma
    assert table["Gamma"] == Fraction(-2, 3) - Fraction(1, 6)
    assert got.min_discrepancy == Fraction(-5, 6)
    # coefficient-one boundary: the klt label is unavailable, depths stay > -1
    assert got.classification == "plt"


def test_fractional_boundary_keeps_klt():
    got = PSI5.classify_singularities(NamedDivisor.of({"E_5": Fraction(1, 2)}))
    assert got.classification == "klt"


def test_boundary_out_of_range_rejected():
    with pytest.raises(ContractionError):
        PSI5.classify_singularities(NamedDivisor.of({"E_5": 2}))


# --- target intersections ----------------------------------------------------


def test_target_self_intersection_of_e():
    for d in (3, 5, 9):
        psi = km_psi(build_km_surface(d))
        e = NamedDivisor.of({"E_1": 1})
        assert psi.target_intersect(e, e) == Fraction(1, 2 * d - 4)


def test_target_canonical_square():
    for d in (3, 5, 9):
        psi = km_psi(build_km_surface(d))
        k = psi.target_canonical()
        assert psi.target_intersect(k, k) == Fraction(4, 2 * d - 4)


def test_anticanonical_degree_of_family():
    A = NamedDivisor.of({"E_1": 1, "E_2": 1, "E_3": 1, "E_4": -1})
    assert PSI5.degree(A) == (3 - 1) * Fraction(2, 2 * 5 - 4)


def test_canonical_proportional_to_minus_two_e():
    # -K on the target is numerically 2 E_i for every i
    k = PSI5.target_canonical()
    for i in range(1, 6):
        e = NamedDivisor.of({f"E_{i}": 1})
        for other in (NamedDivisor.of({"E_3": 1}), NamedDivisor.of({"F": 1})):
            assert PSI5.target_intersect(k, other) == -2 * PSI5.target_intersect(e, other)


# --- ampleness and rank ------------------------------------------------------


def test_family_is_ample_for_q_at_least_two():
    for q in (2, 3):
        terms = {f"E_{i}": 1 for i in range(1, q + 1)}
        terms[f"E_{q + 1}"] = -1
        assert PSI5.is_ample_rho1(NamedDivisor.of(terms))


def test_balanced_family_is_not_ample():
    A = NamedDivisor.of({"E_1": 1, "E_2": 1, "E_3": -1, "E_4": -1})
    assert not PSI5.is_ample_rho1(A)


def test_anticanonical_is_ample():
    assert PSI5.is_ample_rho1(PSI5.minus_k_target())


def test_ampleness_requires_rank_one_flag():
    ctr = Contraction(surface=S5, contracted=("l_1",))
    with pytest.raises(ContractionError):
        ctr.is_ample_rho1(NamedDivisor.of({"E_1": 1}))


def test_picard_rank_after_full_contraction():
    for d in (3, 5, 12):
        psi = km_psi(build_km_surface(d))
        assert psi.picard_rank_after() == (2 + 2 * d) - (2 * d + 1) == 1


def test_picard_rank_after_empty_contraction():
    ctr = Contraction(surface=S5, contracted=())
    assert ctr.picard_rank_after() == S5.lattice.rank


def test_threefold_side_rank_arithmetic():
    # rank above the tower: (rho(S)+1) - (2d+1) = 2
    for d in (3, 5, 12):
        s = build_km_surface(d)
        assert (s.lattice.rank + 1) - (2 * d + 1) == 2
