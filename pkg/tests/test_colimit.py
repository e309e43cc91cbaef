"""Tower transfers, tail-bound arithmetic and class-key round trips."""

from fractions import Fraction

import numpy as np
import pytest

from idemkit.calculus import certify_idempotent, h_bound
from idemkit.colimit import (
    LimitElement,
    colim_norm_bound,
    default_eps,
    k0_colimit_compare,
    level_class_key,
    limit_add,
    limit_distance_bound,
    limit_mul,
    transfer_injective,
    transfer_surjective,
)
from idemkit.errors import TowerTooShallowError
from idemkit.instances import (
    conjugated_projector,
    make_cantor_tower,
    make_uhf_tower,
    random_almost_idempotent,
)

UHF4 = make_uhf_tower(4)
CANTOR5 = make_cantor_tower(5)


def _cert(inst, e, tol=1e-9):
    return certify_idempotent(inst, e, tol)


# ---------------------------------------------------------------------------
# limit-element arithmetic


def test_tail_bounds_add_under_addition():
    x = LimitElement(1, UHF4.levels[1].one(), 0.25)
    y = LimitElement(2, UHF4.levels[2].one(), 0.5)
    z = limit_add(UHF4, x, y)
    assert z.level == 2
    assert z.tail_bound == 0.75


def test_tail_bounds_subadditive_under_multiplication():
    inst = UHF4.levels[1]
    x = LimitElement(1, 2 * inst.one(), 0.1)
    y = LimitElement(1, 3 * inst.one(), 0.2)
    z = limit_mul(UHF4, x, y)
    # tail <= tx * (|y| + ty) + |x| * ty
    assert z.tail_bound == pytest.approx(0.1 * 3.2 + 2 * 0.2)
    assert UHF4.levels[1].distance(z.representative, 6 * inst.one()) == 0


def test_limit_distance_bound_includes_tails():
    inst = UHF4.levels[1]
    x = LimitElement(1, inst.one(), 0.1)
    y = LimitElement(1, inst.zero(), 0.2)
    assert limit_distance_bound(UHF4, x, y) == pytest.approx(1.3)
    assert colim_norm_bound(UHF4, x) == pytest.approx(1.1)


def test_default_eps_keeps_conjugation_feasible():
    assert default_eps(1.0) <= 0.01
    assert default_eps(100.0) > 0


# ---------------------------------------------------------------------------
# surjective transfer


def test_exact_idempotent_at_level_zero_round_trips():
    e = UHF4.levels[0].one()
    result = transfer_surjective(UHF4, LimitElement(0, e, 0.0), eps=0.01)
    assert result.level == 0
    assert np.array_equal(result.idempotent.e, e)
    assert np.array_equal(result.unit.u.representative, UHF4.levels[0].one())
    assert result.cert.valid and result.unit.cert.valid


def test_cantor_cylinder_recovered_exactly():
    lvl3 = CANTOR5.levels[3]
    ind = lvl3.indicator({"010"})
    result = transfer_surjective(CANTOR5, LimitElement(3, ind, 0.0), eps=0.01)
    assert result.level == 3
    assert np.array_equal(result.idempotent.e, ind)
    assert np.allclose(result.unit.u.representative, CANTOR5.levels[3].one())


def test_uhf_rank_two_projector_keeps_normalized_trace():
    tower = make_uhf_tower(6)
    inst = tower.levels[6]
    e = conjugated_projector(inst, 2, np.random.default_rng(0), spread=0.4)
    result = transfer_surjective(tower, LimitElement(6, e, 0.0), eps=0.01)
    assert level_class_key(tower, result.level, result.idempotent.e) == Fraction(2, 64)
    assert result.cert.entry("surjective-transfer").lhs < h_bound(0.01) + 0.01


def test_surjective_transfer_certificate_on_almost_idempotent():
    inst = UHF4.levels[3]
    a = random_almost_idempotent(inst, 1e-4, seed=4)
    t = float(inst.distance(inst.mul(a, a), a))
    two_a = float(inst.norm(inst.sub(inst.int_scale(2, a), inst.one())))
    tail = two_a * ((1 - 4 * t) ** -0.5 - 1) / 2 + 1e-9
    result = transfer_surjective(UHF4, LimitElement(3, a, tail), eps=0.01)
    assert result.cert.valid and result.unit.cert.valid


def test_tower_too_shallow_when_defect_exceeds_eps():
    inst = UHF4.levels[2]
    a = random_almost_idempotent(inst, 0.2, seed=8)
    with pytest.raises(TowerTooShallowError):
        transfer_surjective(UHF4, LimitElement(2, a, 0.0), eps=0.01)


# ---------------------------------------------------------------------------
# injective transfer


def test_injective_trivial_pair():
    inst = UHF4.levels[1]
    e = np.diag([1.0 + 0j, 0j])
    res = transfer_injective(
        UHF4, 1, _cert(inst, e), _cert(inst, e), LimitElement(1, inst.one(), 0.0), eps=0.01
    )
    assert res.level == 1
    assert np.allclose(res.unit.u, np.eye(2))
    assert res.cert.valid


def test_injective_uhf_swap_example():
    inst = UHF4.levels[2]
    e = np.diag([1, 0, 0, 0]).astype(complex)
    f = np.diag([0, 1, 0, 0]).astype(complex)
    swap = np.eye(4, dtype=complex)[[1, 0, 2, 3]]
    res = transfer_injective(
        UHF4, 2, _cert(inst, e), _cert(inst, f), LimitElement(2, swap, 0.0), eps=0.01
    )
    assert res.level == 2
    assert res.cert.valid
    assert res.cert.entry("injective-bound").holds
    j = res.level
    e_j = UHF4.push(e, 2, j)
    f_j = UHF4.push(f, 2, j)
    inst_j = UHF4.levels[j]
    assert inst_j.distance(inst_j.mul(e_j, res.unit.u), inst_j.mul(res.unit.u, f_j)) <= 1e-9


def test_injective_distinct_cylinders_never_conjugate():
    lvl = CANTOR5.levels[2]
    e = lvl.indicator({"00"})
    f = lvl.indicator({"11"})
    with pytest.raises(TowerTooShallowError):
        transfer_injective(
            CANTOR5, 2, _cert(lvl, e), _cert(lvl, f), LimitElement(2, lvl.one(), 0.0), eps=0.01
        )


# ---------------------------------------------------------------------------
# class keys and round trips


def test_cantor_key_reduces_pushed_vectors():
    ind = CANTOR5.levels[2].indicator({"01"})
    pushed = CANTOR5.push(ind, 2, 5)
    assert level_class_key(CANTOR5, 5, pushed) == level_class_key(CANTOR5, 2, ind)


def test_uhf_key_stable_under_pushing():
    inst = UHF4.levels[2]
    e = conjugated_projector(inst, 3, np.random.default_rng(2), spread=0.4)
    assert level_class_key(UHF4, 2, e) == Fraction(3, 4)
    assert level_class_key(UHF4, 4, UHF4.push(e, 2, 4)) == Fraction(3, 4)


def test_compare_on_single_level_tower_is_trivial():
    tower = make_cantor_tower(0)
    report = k0_colimit_compare(tower, 10, seed=1)
    assert report.mismatches == 0
    assert report.all_certificates_valid


def test_compare_uhf_and_cantor_small():
    assert k0_colimit_compare(make_uhf_tower(4), 25, seed=2).mismatches == 0
    assert k0_colimit_compare(make_cantor_tower(6), 25, seed=2).mismatches == 0


def test_compare_report_round_trips_to_json():
    report = k0_colimit_compare(make_uhf_tower(2), 5, seed=3)
    blob = report.to_json()
    assert blob["trials"] == 5
    assert len(blob["records"]) == 5
    assert all("key_in" in rec for rec in blob["records"])
