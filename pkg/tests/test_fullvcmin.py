from random import Random

import pytest

from laminarvc import (
    Combo,
    DecompositionCertificate,
    DomainError,
    FullVCMinInstance,
    PsiFamily,
    SignVector,
    ValidationError,
    build_forest,
    dlo_instance,
    eval_psi,
    forest_from_type,
    incremental_count_check,
    p_virtual_space,
    psi_type,
    type_space,
    validate_certificate,
)
from laminarvc.models import OrderModel
from laminarvc.setsystem import ParametrizedFormula


def brute_psi(instance, a1, b, bp, i, j):
    # independent full-scan oracle written directly against the instance formulas
    carrier = instance.carrier
    di, dj = instance.delta0[i], instance.delta0[j]
    return all(
        di.eval_fn(carrier, (x0,), (a1, b))
        for x0 in range(carrier.size)
        if dj.eval_fn(carrier, (x0,), (a1, bp))
    )


# --- psi evaluation ------------------------------------------------------------


def test_eval_psi_reflexive():
    fam = dlo_instance(10).psi_family
    for a1 in (0, 4, 9):
        for b in (1, 7):
            assert eval_psi(fam, a1, b, b, 0, 0)
            assert eval_psi(fam, a1, b, b, 1, 1)


def test_eval_psi_vacuous_on_empty_instance():
    fam = dlo_instance(10).psi_family
    # delta0[0] is x0 < x1; at a1 = 0 its extent is empty, so it implies anything
    assert eval_psi(fam, a1=0, b=3, bp=5, i=1, j=0)


def test_eval_psi_order_oracle():
    inst = dlo_instance(9)
    fam = inst.psi_family
    # psi for x0 < y against itself holds iff b' <= b
    for b in range(9):
        for bp in range(9):
            assert eval_psi(fam, 4, b, bp, 1, 1) == (bp <= b)
            for i in range(2):
                for j in range(2):
                    assert eval_psi(fam, 4, b, bp, i, j) == brute_psi(inst, 4, b, bp, i, j)


def test_psi_family_shape_validation():
    bad = ParametrizedFormula("unary", 1, 1, lambda M, x, p: True)
    with pytest.raises(DomainError):
        PsiFamily(OrderModel(4), (bad,))


# --- psi types ------------------------------------------------------------------


def test_psi_type_one_bit():
    inst = dlo_instance(6)
    fam = PsiFamily(inst.carrier, (inst.delta0[1],))
    p = psi_type(fam, 3, [2])
    assert (p.n_params, p.n_formulas) == (1, 1)
    assert len(p.bits) == 1


def test_psi_type_all_true_when_instances_empty():
    inst = dlo_instance(6)
    fam = PsiFamily(inst.carrier, (inst.delta0[0],))  # x0 < x1 only
    p = psi_type(fam, 0, [1, 4])
    assert set(p.bits) == {1}


def test_psi_type_constant_on_order_intervals():
    fam = dlo_instance(12).psi_family
    B = [2, 5, 9]
    assert psi_type(fam, 3, B).bits == psi_type(fam, 4, B).bits
    assert psi_type(fam, 6, B).bits == psi_type(fam, 8, B).bits
    assert psi_type(fam, 3, B).bits != psi_type(fam, 6, B).bits


# --- forests read off types -------------------------------------------------------


def test_forest_from_type_chain_configuration():
    inst = dlo_instance(8)
    fam = inst.psi_family
    B = [2, 5]
    p = psi_type(fam, 4, B)
    forest = forest_from_type(p, B, 2)
    forest.validate()
    # initial segments are nested, so the class order is a chain
    for a in range(forest.n_classes):
        for b in range(forest.n_classes):
            assert forest.class_leq[a][b] or forest.class_leq[b][a]


def test_forest_from_type_matches_built_forest():
    inst = dlo_instance(14)
    fam = inst.psi_family
    for m, seed in ((2, 0), (4, 1), (6, 2)):
        B = sorted(Random(f"{seed}").sample(range(14), m))
        for a1 in range(14):
            p = psi_type(fam, a1, B)
            read = forest_from_type(p, B, 2)
            built = build_forest([(a1, b) for b in B], inst.delta0, inst.carrier)
            assert read.same_order(built)
            assert read.labels == tuple((bi, di) for bi in range(m) for di in range(2))


def test_equal_types_give_equal_forests_exhaustive():
    inst = dlo_instance(16)
    fam = inst.psi_family
    B = [3, 7, 12]
    groups = {}
    for a1 in range(16):
        groups.setdefault(psi_type(fam, a1, B).bits, []).append(a1)
    assert len(groups) > 1
    for members in groups.values():
        forests = [
            build_forest([(a1, b) for b in B], inst.delta0, inst.carrier) for a1 in members
        ]
        assert all(f.same_order(forests[0]) for f in forests)


def test_forest_from_type_rejects_inconsistent_types():
    # not reflexive
    broken = SignVector(bytes([0]), 1, 1)
    with pytest.raises(ValidationError, match="reflexivity"):
        forest_from_type(broken, [5], 1)
    # two incomparable nodes below a third: chain condition fails
    bits = [0] * 9
    for i, j, v in ((0, 0, 1), (1, 1, 1), (2, 2, 1), (0, 2, 1), (1, 2, 1)):
        bits[(i * 3 + j)] = v
    with pytest.raises(ValidationError, match="chain"):
        forest_from_type(SignVector(bytes(bits), 9, 1), [0, 1, 2], 1)


def test_forest_from_type_shape_mismatch():
    with pytest.raises(DomainError):
        forest_from_type(SignVector(bytes([1]), 1, 1), [1, 2], 1)


# --- virtual spaces -----------------------------------------------------------------


def test_p_virtual_space_empty_params():
    inst = dlo_instance(6)
    p = psi_type(inst.psi_family, 2, [])
    assert p_virtual_space(p, [], 2).count == 1


def test_p_virtual_space_chain_counts():
    inst = dlo_instance(9)
    fam = PsiFamily(inst.carrier, (inst.delta0[1],))  # x0 < y only
    B = [2, 5, 7]
    p = psi_type(fam, 4, B)
    space = p_virtual_space(p, B, 1)
    assert space.count == 4  # three distinct segments plus the root generic


def test_realized_types_contained_in_virtual_space():
    inst = dlo_instance(14)
    fam = inst.psi_family
    for m, seed in ((2, 3), (4, 4), (6, 5)):
        B = sorted(Random(f"{seed}").sample(range(14), m))
        for a1 in range(14):
            p = psi_type(fam, a1, B)
            space = p_virtual_space(p, B, 2)
            assert space.count <= 2 * m + 1
            realized = type_space(inst.delta0, [(a1, b) for b in B], inst.carrier, 1)
            assert realized.vector_set() <= space.entry_set()


# --- certificates and the incremental count -------------------------------------------


def test_builtin_certificate_validates():
    inst = dlo_instance(10)
    validate_certificate(inst, [1, 4, 8])


def test_corrupt_certificate_reports_witness():
    inst = dlo_instance(8)
    good = inst.certificate

    def bad_combo(i, j, b, bp):
        if (i, j) == (0, 1):
            return Combo.const(True)  # wrong: should be an atom
        return good.combo_for(i, j, b, bp)

    broken = FullVCMinInstance(
        inst.carrier, inst.delta0, DecompositionCertificate(good.delta1, bad_combo)
    )
    with pytest.raises(ValidationError, match="psi\\[0\\]\\[1\\]"):
        validate_certificate(broken, [2, 5])
    with pytest.raises(ValidationError):
        incremental_count_check(broken, [2, 5])


def test_incremental_count_single_parameter():
    report = incremental_count_check(dlo_instance(9), [4])
    assert report.all_ok
    assert report.aggregate_bound == 2 * 1 * 2 + 1 * 2 + 1
    assert report.union_size < report.aggregate_bound  # holds with slack


def test_incremental_count_small_instance_quantities():
    report = incremental_count_check(dlo_instance(12), [2, 5, 8, 11])
    assert report.per_step_ok and report.sum_dist_ok and report.aggregate_ok
    assert report.containment_ok
    assert report.sum_dist <= 2 * 16 * 2
    assert report.union_size <= 2 * 16 * 2 + 4 * 2 + 1
    assert report.n_psi_types == len(report.steps) + 1


def test_incremental_count_sizes_four_and_eight():
    for m in (4, 8):
        inst = dlo_instance(3 * m)
        B = sorted(Random(f"acc/{m}").sample(range(inst.carrier.size), m))
        report = incremental_count_check(inst, B)
        assert report.all_ok
        assert report.aggregate_bound == 2 * m * m * 2 + m * 2 + 1
