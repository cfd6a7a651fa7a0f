from fractions import Fraction

import pytest

from conekit.cohom import FamilyDescriptor, family_divisor, target_context
from conekit.cone3fold import (
    AssumptionError,
    ConeError,
    ConeModel,
    adjunction_consistency,
    cone_curve_numbers,
    crepant_pullback_fy,
    kvv_schedule,
    picard_chain,
    plt_coefficient_b,
    resolution_ledger,
    section_numbers,
    validate_assumption_a,
)
from conekit.qlattice import NamedDivisor


def plt_model(d: int, q: int) -> ConeModel:
    ctx = target_context(d)
    return ConeModel.build(ctx.surface, ctx.psi, family_divisor(FamilyDescriptor(d, q, 1)))


def fano_model(q: int) -> ConeModel:
    d = 4 * q + 2
    ctx = target_context(d)
    return ConeModel.build(
        ctx.surface, ctx.psi, family_divisor(FamilyDescriptor(d, 3 * q, q))
    )


M53 = plt_model(5, 3)


# --- assumption validation ------------------------------------------------------


def test_m_table_plt_d5_q3():
    expected = {"Gamma": 3}
    for i in range(1, 5):
        expected[f"l_{i}"] = 2
        expected[f"lp_{i}"] = 2
    expected["l_5"] = 1
    expected["lp_5"] = 1
    assert M53.mc == expected


def test_m_gamma_bad_fano_is_four():
    for q in (1, 2, 3):
        assert fano_model(q).mc["Gamma"] == 4


def test_m_table_for_doubled_single_curve():
    ctx = target_context(5)
    table = validate_assumption_a(ctx.psi, NamedDivisor.of({"E_1": 2}))
    assert table["Gamma"] == 3  # fractional coefficient 2/6 = 1/3
    assert table["l_1"] == 1  # coefficient 1 after doubling
    assert table["l_2"] == 1


def test_assumption_violation_reports_curve():
    ctx = target_context(6)
    A = family_divisor(FamilyDescriptor(6, 4, 1))  # Gamma coefficient 3/8
    with pytest.raises(AssumptionError) as err:
        validate_assumption_a(ctx.psi, A)
    assert err.value.curve == "Gamma"
    assert err.value.coefficient == Fraction(3, 8)


def test_unit_fraction_acceptance_tracks_divisibility():
    # accepted exactly when q-1 divides 2d-4
    for d, q in ((5, 3), (8, 3), (5, 4), (12, 6)):
        assert (2 * d - 4) % (q - 1) == 0
        plt_model(d, q)
    for d, q in ((6, 4), (7, 5)):
        assert (2 * d - 4) % (q - 1) != 0
        with pytest.raises(AssumptionError):
            plt_model(d, q)


def test_non_ample_polarization_rejected():
    ctx = target_context(5)
    with pytest.raises(ConeError):
        ConeModel.build(ctx.surface, ctx.psi, NamedDivisor.zero())


# --- curve ledger ---------------------------------------------------------------


def test_k_dot_section_curves():
    assert cone_curve_numbers(M53, "Gamma").k_dot_section_curve == Fraction(6 - 6, 3)
    assert cone_curve_numbers(M53, "l_1").k_dot_section_curve == Fraction(2 - 4, 2)
    assert cone_curve_numbers(M53, "l_5").k_dot_section_curve == 0


def test_section_curve_squares_and_disjointness():
    for name in M53.psi.contracted:
        rec = cone_curve_numbers(M53, name)
        assert rec.section_curve_square_in_fibre == 0
        assert rec.section_dot_section_curve == 0


def test_curve_ledger_rejects_uncontracted():
    with pytest.raises(ConeError):
        cone_curve_numbers(M53, "E_1")


def test_crepant_coefficients():
    crepant = crepant_pullback_fy(M53)
    assert crepant["Gamma"] == 0
    assert crepant["l_1"] == -1
    assert crepant["l_5"] == 0


def test_fibre_divisor_discrepancy_over_contracted_threefold_is_klt():
    # log discrepancy 1 - c_C = 2 m_C / (-C^2) stays positive everywhere
    for model in (M53, plt_model(8, 3), fano_model(1), fano_model(2)):
        for name, c in crepant_pullback_fy(model).items():
            assert 1 - c > 0
            assert 1 - c == Fraction(2 * model.mc[name], -model.curve_square(name))


# --- section ledger -------------------------------------------------------------


def test_fibre_degree_constant_over_grid():
    for model in (plt_model(5, 3), plt_model(8, 3), plt_model(12, 3), fano_model(1), fano_model(2)):
        d = model.d
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                rec = section_numbers(model, i, j)
                assert rec.e_y_dot_f_e == Fraction(1, 2 * d - 4)


def test_section_polarization_degrees():
    rec = section_numbers(M53, 5, 5)
    assert rec.polarization_dot_e_i == Fraction(1, 3)
    assert rec.s_plus_dot_e_plus_j == Fraction(1, 3)
    assert rec.s_minus_dot_e_minus_j == Fraction(-1, 3)


def test_k_x_section_sum_rule():
    # the polarization parts cancel in the +/- sum
    for i in range(1, 6):
        rec = section_numbers(M53, i, i)
        defects = (
            Fraction(M53.mc["Gamma"] - 1, M53.mc["Gamma"])
            + Fraction(M53.mc[f"l_{i}"] - 1, M53.mc[f"l_{i}"])
            + Fraction(M53.mc[f"lp_{i}"] - 1, M53.mc[f"lp_{i}"])
        )
        assert rec.k_x_dot_e_plus + rec.k_x_dot_e_minus == 2 * (defects - 1)


def test_section_index_out_of_range():
    with pytest.raises(ConeError):
        section_numbers(M53, 0, 1)
    with pytest.raises(ConeError):
        section_numbers(M53, 1, 6)


# --- boundary coefficient -------------------------------------------------------


def test_b_for_plt_d5_q3():
    got = plt_coefficient_b(M53, 5)
    assert got.b == Fraction(1, 2)
    assert got.plt


def test_b_closed_form_for_fresh_indices():
    for d, q in ((5, 3), (8, 3), (5, 4), (12, 6)):
        model = plt_model(d, q)
        for i in range(q + 2, d + 1):
            assert plt_coefficient_b(model, i).b == Fraction(q - 2, q - 1)


def test_b_degenerates_to_zero():
    ctx = target_context(5)
    model = ConeModel.build(ctx.surface, ctx.psi, NamedDivisor.of({"E_1": 1}))
    # pullback(A).E_5 = 1/(2d-4) exactly, so the numerator vanishes
    assert model.polarization_dot_e(5) == Fraction(1, 6)
    assert plt_coefficient_b(model, 5).b == 0


# --- resolution ledger ----------------------------------------------------------


def test_resolution_m3():
    rec = next(r for r in resolution_ledger(M53) if r.curve == "Gamma")
    assert rec.m == 3
    assert rec.f_plus_discrepancy == Fraction(1, 3)
    assert rec.mu_s_plus_coeff == Fraction(1, 3)
    assert rec.mu_s_minus_chain == (Fraction(2, 3), Fraction(1, 3))
    assert rec.mu_r_f_plus == Fraction(1, 3)
    assert rec.mu_r_minus_chain == (Fraction(1, 3), Fraction(2, 3))
    assert rec.dual_graph == "S~^- - F^-_1 - F^-_2 - R~_Gamma"


def test_resolution_m2():
    rec = next(r for r in resolution_ledger(M53) if r.curve == "l_1")
    assert rec.f_plus_discrepancy == 0
    assert rec.mu_s_minus_chain == (Fraction(1, 2),)
    assert rec.mu_r_minus_chain == (Fraction(1, 2),)
    assert rec.dual_graph == "S~^- - F^-_1 - R~_l_1"


def test_resolution_m4():
    model = fano_model(1)
    rec = next(r for r in resolution_ledger(model) if r.curve == "Gamma")
    assert rec.m == 4
    assert rec.f_plus_discrepancy == Fraction(1, 2)
    assert rec.mu_s_minus_chain == (Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))
    assert rec.mu_r_minus_chain == (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def test_resolution_skips_multiplicity_one():
    names = {r.curve for r in resolution_ledger(M53)}
    assert "l_5" not in names and "lp_5" not in names


# --- adjunction and ranks -------------------------------------------------------


def test_adjunction_consistency_plt_and_fano():
    for model in (M53, plt_model(8, 3), plt_model(12, 3), fano_model(1), fano_model(2)):
        report = adjunction_consistency(model)
        assert report.all_pass, report.failures()
        assert len(report.checks) == 2 * model.d + len(model.psi.contracted)


def test_picard_chain_values():
    assert picard_chain(M53).as_tuple() == (12, 1, 13, 2, 1)
    ctx3 = target_context(3)
    model3 = ConeModel.build(ctx3.surface, ctx3.psi, NamedDivisor.of({"E_1": 1}))
    assert picard_chain(model3).as_tuple() == (8, 1, 9, 2, 1)


def test_rho_y_minus_rho_z_is_one():
    for model in (M53, fano_model(1)):
        chain = picard_chain(model)
        assert chain.rho_y - chain.rho_z == 1


# --- schedule -------------------------------------------------------------------


def test_schedule_single_divisor():
    trace = kvv_schedule([1], [0], 3)
    assert [(s.mu, s.lam) for s in trace.steps] == [
        (Fraction(1), Fraction(1)),
        (Fraction(1), Fraction(2)),
        (Fraction(1), Fraction(3)),
    ]


def test_schedule_two_divisors_hand_iteration():
    trace = kvv_schedule([1, 2], [0, 0], 2)
    got = [(s.mu, s.chosen, s.lam, s.delta) for s in trace.steps]
    half = Fraction(1, 2)
    assert got == [
        (half, 2, half, (half, Fraction(0))),
        (half, 1, Fraction(1), (Fraction(0), Fraction(1))),
        (Fraction(0), 2, Fraction(1), (Fraction(0), Fraction(0))),
        (half, 2, Fraction(3, 2), (half, Fraction(0))),
        (half, 1, Fraction(2), (Fraction(0), Fraction(1))),
    ]


def test_schedule_periodic_state_advances_lambda():
    trace = kvv_schedule([1, 2], [0, 0], 5)
    # one unit of lambda per period of three steps
    for k, step in enumerate(trace.steps):
        base = trace.steps[k % 3]
        assert step.lam == base.lam + k // 3
        assert step.delta == base.delta


def test_schedule_near_saturated_start():
    trace = kvv_schedule([2, 3], [Fraction(9, 10), Fraction(0)], 2)
    assert trace.steps[0].mu == Fraction(1, 20)
    assert trace.final_lambda >= 2
    for s in trace.steps:
        assert all(0 <= x <= 1 for x in s.delta)


def test_schedule_reaches_target_on_acceptance_vectors():
    for e in ((1,), (1, 2), (1, 2, 3), (3, 3, 3)):
        trace = kvv_schedule(e, [0] * len(e), 10)
        assert trace.final_lambda >= 10
        for s in trace.steps:
            assert all(0 <= x <= 1 for x in s.delta)


def test_schedule_is_deterministic():
    a = kvv_schedule([1, 2, 3], [0, 0, 0], 10)
    b = kvv_schedule([1, 2, 3], [0, 0, 0], 10)
    assert a == b


def test_schedule_rejects_bad_inputs():
    with pytest.raises(ConeError):
        kvv_schedule([0], [0], 1)
    with pytest.raises(ConeError):
        kvv_schedule([1], [1], 1)
    with pytest.raises(ConeError):
        kvv_schedule([1, 2], [0], 1)


def test_schedule_tiny_first_step_still_diverges():
    # a coefficient just below one forces a tiny first step
    trace = kvv_schedule([1, 1], [Fraction(999, 1000), Fraction(0)], 3)
    assert trace.steps[0].mu == Fraction(1, 1000)
    assert trace.final_lambda >= 3


from hypothesis import given, settings
from hypothesis import strategies as st


@given(
    st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=4),
    st.data(),
)
@settings(max_examples=40, deadline=None)
def test_schedule_invariants_on_random_inputs(e, data):
    delta0 = [
        data.draw(st.fractions(min_value=0, max_value=Fraction(7, 8), max_denominator=8))
        for _ in e
    ]
    trace = kvv_schedule(e, delta0, 10)
    assert trace.final_lambda >= 10
    lam = Fraction(0)
    for s in trace.steps:
        assert s.mu >= 0
        assert s.lam >= lam  # lambda is nondecreasing
        lam = s.lam
        assert all(0 <= x <= 1 for x in s.delta)
        assert s.delta[s.chosen - 1] == 0  # the chosen coefficient resets
