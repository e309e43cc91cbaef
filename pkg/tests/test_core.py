"""Certificates, norm axioms, coproduct and tensor norms."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idemkit.core import (
    Certificate,
    CertEntry,
    Element,
    GROUP_AXIOM_PREFIXES,
    ScaledIntegers,
    check_norm_axioms,
    l1_coproduct_norm,
    tensor_norm_int,
)
from idemkit.errors import ConfigError
from idemkit.instances import COMPLEX, MatrixAlgebra


# ---------------------------------------------------------------------------
# certificates


def test_certificate_validity_is_recomputable():
    cert = Certificate()
    cert.add("a", 1, 2)
    cert.add("b", 3, 3)
    assert cert.valid
    cert.add("c", 5, 4)
    assert not cert.valid


def test_certificate_slack_applies_to_rhs():
    cert = Certificate(slack=1e-9)
    entry = cert.add("x", 1.0, 1.0)
    assert entry.rhs == 1.0 + 1e-9


def test_certificate_exact_entries_stay_fractions():
    cert = Certificate(slack=0.0)
    entry = cert.add("x", Fraction(1, 3), Fraction(1, 2))
    assert isinstance(entry.rhs, Fraction)


def test_advisory_entries_do_not_affect_validity():
    cert = Certificate()
    cert.add("hard", 1, 2)
    cert.add("soft", 9, 1, advisory=True)
    assert cert.valid
    assert not cert.entry("soft").holds


def test_certificate_json_round_trip():
    cert = Certificate()
    cert.add("float", 0.5, 1.0)
    cert.add("exact", Fraction(1, 3), Fraction(2, 3))
    cert.add("soft", 2, 1, advisory=True)
    back = Certificate.from_json(cert.to_json())
    assert back.to_json() == cert.to_json()
    assert back.entry("exact").lhs == Fraction(1, 3)
    assert back.entry("soft").advisory


def test_cert_entry_from_json_parses_fraction_strings():
    e = CertEntry.from_json({"name": "x", "lhs": "1/3", "rhs": "1/2"})
    assert e.holds and e.lhs == Fraction(1, 3)


# ---------------------------------------------------------------------------
# norm-axiom audit


def test_complex_scalars_pass_all_axioms():
    cert = check_norm_axioms(COMPLEX, [1 + 0j, 1j, 1 + 1j])
    assert cert.valid


def test_scaled_integers_r2_is_group_but_flagged_as_ring():
    cert = check_norm_axioms(ScaledIntegers(2), [1, -1, 3, -3])
    assert cert.valid_for(GROUP_AXIOM_PREFIXES)
    unit = cert.entry("unit-norm")
    assert unit.lhs == 2 and not unit.holds
    assert not cert.valid


def test_scaled_integers_half_fails_submultiplicativity():
    inst = ScaledIntegers(Fraction(1, 2))
    cert = check_norm_axioms(inst, [1, 2, -3])
    assert cert.valid_for(GROUP_AXIOM_PREFIXES)
    # |1*1|/2 = 1/2 > (1/2)*(1/2)
    assert not cert.entry("submul[0,0]").holds
    assert not inst.is_banach_ring


def test_matrix_axioms_on_random_pairs():
    inst = MatrixAlgebra(COMPLEX, 2)
    rng = np.random.default_rng(1)
    samples = [inst.random_element(rng) for _ in range(8)]
    cert = check_norm_axioms(inst, samples)
    assert cert.valid  # 64 ordered pairs; slack 1e-9 absorbs roundoff


# ---------------------------------------------------------------------------
# l1 coproduct norm


def test_l1_coproduct_examples():
    z1 = ScaledIntegers(1)
    zh = ScaledIntegers(Fraction(1, 2))
    assert l1_coproduct_norm([]) == 0
    assert l1_coproduct_norm([(3, z1), (-2, z1)]) == 5
    assert l1_coproduct_norm([(1, zh), (1, zh)]) == 1


@given(st.lists(st.integers(-50, 50), max_size=8), st.lists(st.integers(-50, 50), max_size=8))
def test_l1_coproduct_additive_under_concatenation(xs, ys):
    z1 = ScaledIntegers(1)
    a = [(x, z1) for x in xs]
    b = [(y, z1) for y in ys]
    assert l1_coproduct_norm(a + b) == l1_coproduct_norm(a) + l1_coproduct_norm(b)


# ---------------------------------------------------------------------------
# tensor norm on scaled integers


def test_tensor_norm_trivial_and_derived_values():
    assert tensor_norm_int(0, 1, 1, 3) == 0
    assert tensor_norm_int(1, 1, 1, 4) == 1
    assert tensor_norm_int(6, Fraction(1, 2), 3, 8) == 9


def test_tensor_norm_matches_closed_form_on_sweep():
    scales = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3))
    for m in range(-8, 9):
        for r in scales:
            for s in scales:
                assert tensor_norm_int(m, r, s, 8) == r * s * abs(m)


def test_tensor_norm_monotone_nonincreasing_in_bound():
    values = [tensor_norm_int(6, 1, 1, b) for b in range(1, 9)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_tensor_norm_rejects_zero_bound():
    with pytest.raises(ConfigError):
        tensor_norm_int(1, 1, 1, 0)


# ---------------------------------------------------------------------------
# scaled integers and the element wrapper


@given(st.integers(-10**6, 10**6))
def test_scaled_integers_norm_zero_iff_zero(n):
    inst = ScaledIntegers(Fraction(3, 7))
    assert (inst.norm(n) == 0) == (n == 0)
    assert inst.norm(n) == Fraction(3, 7) * abs(n)


def test_element_wrapper_arithmetic():
    z = ScaledIntegers(2)
    x = Element(z, 3)
    y = Element(z, -1)
    assert (x + y).value == 2
    assert (x * y).value == -3
    assert (-x).value == -3
    assert (x - y).value == 4
    assert x.norm == 6


def test_int_scale_matches_repeated_addition():
    inst = MatrixAlgebra(ScaledIntegers(1), 2)
    x = ((1, 2), (3, 4))
    assert inst.int_scale(5, x) == ((5, 10), (15, 20))
    assert inst.int_scale(0, x) == inst.zero()
    assert inst.int_scale(-2, x) == ((-2, -4), (-6, -8))
