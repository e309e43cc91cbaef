"""Transfer of idempotents and equivalences between tower levels and colimit.

The colimit of a tower is never materialized: an element of it is a
:class:`LimitElement`, a finite-level representative plus a certified tail
bound, and every output is conditional on that promise.  The inequalities
that drive the transfers are evaluated as runtime certificate entries:
``h(eps) + eps`` for pushing an idempotent class down to a finite level,
and ``eps * norm(e) * (eps + norm(u) + norm(u_inv))`` for pulling an
equivalence back.  "Advancing the level" is a deterministic scan from the
current level upward with a measured approximation error per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .calculus import (
    CertifiedIdempotent,
    CertifiedUnit,
    certify_idempotent,
    conjugating_unit,
    conjugation_bound,
    conjugation_threshold,
    h_bound,
    intertwiner,
    lift_idempotent,
    neumann_inverse,
)
from .core import Certificate
from .errors import ConfigError, PreconditionError, TowerTooShallowError
from .instances import MatrixAlgebra, SampledFunctionAlgebra, Tower, conjugated_projector
from .k0 import normalized_trace_key


@dataclass(frozen=True)
class LimitElement:
    """A colimit element: level representative plus certified tail bound.

    ``tail_bound`` bounds the colimit distance between the representative's
    image and the intended limit element; it is the caller's certified
    promise and is carried through arithmetic by subadditivity.
    """

    level: int
    representative: Any
    tail_bound: float = 0.0


def colim_norm_bound(tower: Tower, x: LimitElement) -> float:
    """Certified upper bound for the norm of ``x`` in the colimit."""
    return float(tower.limit_norm_hint(x.level, x.representative)) + x.tail_bound


def _align(tower: Tower, x: LimitElement, y: LimitElement):
    j = max(x.level, y.level)
    return j, tower.push(x.representative, x.level, j), tower.push(y.representative, y.level, j)


def limit_add(tower: Tower, x: LimitElement, y: LimitElement) -> LimitElement:
    j, xv, yv = _align(tower, x, y)
    return LimitElement(j, tower.levels[j].add(xv, yv), x.tail_bound + y.tail_bound)


def limit_mul(tower: Tower, x: LimitElement, y: LimitElement) -> LimitElement:
    j, xv, yv = _align(tower, x, y)
    inst = tower.levels[j]
    tail = x.tail_bound * colim_norm_bound(tower, y) + float(inst.norm(xv)) * y.tail_bound
    return LimitElement(j, inst.mul(xv, yv), tail)


def limit_distance_bound(tower: Tower, x: LimitElement, y: LimitElement) -> float:
    """Certified upper bound for the colimit distance between two elements."""
    j, xv, yv = _align(tower, x, y)
    return float(tower.levels[j].distance(xv, yv)) + x.tail_bound + y.tail_bound


def default_eps(e_norm_bound: float) -> float:
    """Default transfer accuracy: small enough that the final conjugation
    step is guaranteed to pass its proximity threshold."""
    return min(0.01, conjugation_threshold(e_norm_bound) / 2)


# ---------------------------------------------------------------------------
# class keys at tower levels and in the colimit


def level_class_key(tower: Tower, level: int, e):
    """Conjugation-invariant key of a level idempotent, colimit-normalized.

    Doubling matrix towers: the normalized trace as an exact rational.
    Binary-grid function towers: the 0/1 vector reduced to its shortest
    representative (repeated halving of duplicated pairs), which is
    invariant under pushing to deeper levels.
    """
    inst = tower.levels[level]
    if isinstance(inst, MatrixAlgebra):
        return normalized_trace_key(inst, e)
    if isinstance(inst, SampledFunctionAlgebra):
        bits = tuple(int(round(v.real)) for v in np.asarray(e))
        while len(bits) > 1 and bits[::2] == bits[1::2]:
            bits = bits[::2]
        return bits
    raise ConfigError(f"no colimit class key for level kind {inst.kind!r}")


# ---------------------------------------------------------------------------
# surjective transfer: colimit idempotent -> finite level


@dataclass(frozen=True)
class SurjectiveTransfer:
    level: int
    idempotent: CertifiedIdempotent
    unit: CertifiedUnit
    cert: Certificate


def transfer_surjective(
    tower: Tower,
    e: LimitElement,
    eps: Optional[float] = None,
    tol: float = 1e-12,
) -> SurjectiveTransfer:
    """Represent a colimit idempotent by a certified finite-level one.

    Scans levels from ``e.level`` upward for the first whose pushed
    representative ``a`` has ``defect + 2 * tail < eps``, polishes ``a``
    to an exact-level idempotent, certifies the colimit distance against
    ``h(eps) + eps``, and returns the conjugating unit witnessing that
    both define the same class.  The unit's elements are
    :class:`LimitElement` values; its inversion residuals certify the
    representative at its level, and the colimit statements are
    conditional on ``e.tail_bound``.
    """
    if eps is None:
        eps = default_eps(colim_norm_bound(tower, e))
    tail = e.tail_bound
    chosen = None
    for j in range(e.level, tower.depth + 1):
        a_j = tower.push(e.representative, e.level, j)
        inst = tower.levels[j]
        defect = float(inst.distance(inst.mul(a_j, a_j), a_j))
        if defect + 2 * tail < eps:
            chosen = (j, a_j, defect)
            break
    if chosen is None:
        raise TowerTooShallowError(
            f"tower too shallow: no level has defect + 2*tail below eps = {eps}"
        )
    j, a_j, defect = chosen
    inst = tower.levels[j]
    lifted = lift_idempotent(inst, a_j, "corrected", tol)
    e_j = lifted.e

    dist = float(inst.distance(e_j, a_j)) + tail
    b_e = float(inst.norm(e_j))
    norm_e = colim_norm_bound(tower, e)
    cert = inst.certificate()
    cert.add("surjective-transfer", dist, h_bound(eps) + eps)
    cert.extend(lifted.cert, prefix="lift:")

    # conjugating unit between the lifted idempotent's image and e:
    # proximity conjugation applies in the colimit because the certified
    # distance keeps 2*norm*d + d**2 below 1, which is the checkable
    # inequality here (the unit-distance bound itself needs two exact
    # idempotents and is only measurable at a single level, see
    # conjugating_unit)
    bound = conjugation_bound(b_e, dist)
    if bound >= 1:
        raise PreconditionError(
            f"transfer distance {dist} fails the conjugation threshold (bound {bound})"
        )
    u_rep = intertwiner(inst, e_j, a_j)
    tail_u = tail * (b_e + float(inst.norm(inst.sub(inst.one(), e_j))))
    unit_cert = inst.certificate()
    unit_cert.add("conjugation-threshold", bound, 1)
    # the intertwining identity is algebraic: with e idempotent in the
    # colimit, the error is the lifted defect times (2*norm(e) + 1)
    unit_cert.add(
        "intertwine",
        float(lifted.cert.entry("defect").lhs) * (2 * norm_e + 1),
        tol * (1 + b_e + norm_e),
    )
    inverted = neumann_inverse(inst, u_rep, tol)
    unit_cert.extend(inverted.cert)
    nv = float(inst.norm(inverted.u_inv))
    tail_v = _inverse_tail(nv, tail_u)
    unit = CertifiedUnit(
        LimitElement(j, u_rep, tail_u),
        LimitElement(j, inverted.u_inv, tail_v),
        unit_cert,
    )
    return SurjectiveTransfer(level=j, idempotent=lifted, unit=unit, cert=cert)


def _inverse_tail(inv_norm: float, tail: float) -> float:
    """Tail bound for the inverse of a perturbed unit."""
    if tail == 0:
        return 0.0
    if inv_norm * tail >= 1:
        return math.inf
    return inv_norm * inv_norm * tail / (1 - inv_norm * tail)


# ---------------------------------------------------------------------------
# injective transfer: colimit equivalence -> finite level


@dataclass(frozen=True)
class InjectiveTransfer:
    level: int
    unit: CertifiedUnit
    cert: Certificate


def transfer_injective(
    tower: Tower,
    level: int,
    e_i: CertifiedIdempotent,
    f_i: CertifiedIdempotent,
    u: LimitElement,
    eps: Optional[float] = None,
    tol: float = 1e-9,
) -> InjectiveTransfer:
    """Turn a colimit conjugacy into an exact conjugacy at a finite level.

    ``u`` is a unit in the colimit promised to satisfy ``e*u = u*f``.  The
    scan pushes everything to each level ``j`` upward, measures the gap
    ``norm(u_j_inv * e_j * u_j - f_j)`` against the certified bound
    ``eps * norm(e) * (eps + norm(u) + norm(u_inv))``, and closes the
    remaining gap by a proximity conjugation, composing both units into
    one exact-level conjugator.
    """
    inst_u = tower.levels[u.level]
    u_inv_rep = inst_u.try_inverse(u.representative)
    b_e = float(tower.levels[level].norm(e_i.e))
    nu = colim_norm_bound(tower, u)
    nu_inv = float(inst_u.norm(u_inv_rep)) + _inverse_tail(
        float(inst_u.norm(u_inv_rep)), u.tail_bound
    )
    if eps is None:
        eps = max(default_eps(b_e), 2 * u.tail_bound)
    if u.tail_bound >= eps:
        raise TowerTooShallowError(
            f"tower too shallow: unit tail {u.tail_bound} never drops below eps = {eps}"
        )
    bound_rhs = eps * b_e * (eps + nu + nu_inv)

    start = max(level, u.level)
    for j in range(start, tower.depth + 1):
        inst = tower.levels[j]
        e_j = tower.push(e_i.e, level, j)
        f_j = tower.push(f_i.e, level, j)
        u_j = tower.push(u.representative, u.level, j)
        u_j_inv = tower.push(u_inv_rep, u.level, j)
        d = inst.mul(inst.mul(u_j_inv, e_j), u_j)
        gap = float(inst.distance(d, f_j))
        if conjugation_bound(inst.norm(d), gap) >= 1:
            continue
        cert = inst.certificate()
        cert.add("injective-bound", gap, bound_rhs)
        d_cert = certify_idempotent(inst, d, tol)
        f_cert = certify_idempotent(inst, f_j, tol)
        closing = conjugating_unit(inst, d_cert, f_cert, tol)
        total = inst.mul(u_j, closing.u)
        total_inv = inst.mul(closing.u_inv, u_j_inv)
        one = inst.one()
        cert.add(
            "intertwine",
            float(inst.distance(inst.mul(e_j, total), inst.mul(total, f_j))),
            tol * (1 + float(inst.norm(e_j)) + float(inst.norm(f_j))),
        )
        cert.add("residual-left", float(inst.distance(inst.mul(total, total_inv), one)), tol)
        cert.add("residual-right", float(inst.distance(inst.mul(total_inv, total), one)), tol)
        cert.extend(closing.cert, prefix="closing:")
        return InjectiveTransfer(level=j, unit=CertifiedUnit(total, total_inv, cert), cert=cert)
    raise TowerTooShallowError(
        "tower too shallow: the conjugation threshold was never met within depth"
    )


# ---------------------------------------------------------------------------
# Monte-Carlo class-preservation check


@dataclass
class CompareReport:
    tower: dict
    trials: int
    mismatches: int
    all_certificates_valid: bool
    records: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "tower": self.tower,
            "trials": self.trials,
            "mismatches": self.mismatches,
            "all_certificates_valid": self.all_certificates_valid,
            "records": self.records,
        }


def _random_level_idempotent(tower: Tower, level: int, rng, almost: bool):
    """Trial data: a level element and an honest tail bound.

    Exact trials promise tail 0; almost-idempotent trials promise the
    certified distance to the nearest idempotent (the prefactor-aware lift
    bound), since the represented colimit element is that idempotent, not
    the perturbed representative itself.
    """
    inst = tower.levels[level]
    if isinstance(inst, MatrixAlgebra):
        if almost:
            from .instances import random_almost_idempotent

            e = random_almost_idempotent(inst, 1e-4, seed=int(rng.integers(0, 2**31)))
            t = float(inst.distance(inst.mul(e, e), e))
            two_a = float(inst.norm(inst.sub(inst.int_scale(2, e), inst.one())))
            tail = two_a * ((1 - 4 * t) ** -0.5 - 1) / 2 + inst.slack
            return e, tail
        rank = int(rng.integers(0, inst.n + 1))
        return conjugated_projector(inst, rank, rng, spread=0.4), 0.0
    if isinstance(inst, SampledFunctionAlgebra):
        bits = rng.integers(0, 2, inst.size)
        return bits.astype(complex), 0.0
    raise ConfigError(f"no trial generator for level kind {inst.kind!r}")


def k0_colimit_compare(tower: Tower, trials: int, seed: int, eps: float = 0.01) -> CompareReport:
    """Monte-Carlo round trip: limit class -> finite level -> limit class.

    Each trial draws a level idempotent, views it as a colimit element with
    tail 0, transfers it back to a finite level, and compares the
    colimit-normalized class keys.  The mismatch count must be 0.
    """
    report = CompareReport(
        tower=tower.describe(), trials=trials, mismatches=0, all_certificates_valid=True
    )
    for idx in range(trials):
        rng = np.random.default_rng([seed, idx])
        level = int(rng.integers(0, tower.depth + 1))
        almost = isinstance(tower.levels[level], MatrixAlgebra) and idx % 4 == 3
        e, tail = _random_level_idempotent(tower, level, rng, almost)
        key_in = level_class_key(tower, level, e)
        result = transfer_surjective(tower, LimitElement(level, e, tail), eps=eps)
        key_out = level_class_key(tower, result.level, result.idempotent.e)
        ok = key_in == key_out
        valid = result.cert.valid and result.unit.cert.valid
        if not ok:
            report.mismatches += 1
        if not valid:
            report.all_certificates_valid = False
        report.records.append(
            {
                "trial": idx,
                "level_in": level,
                "key_in": str(key_in),
                "level_out": result.level,
                "key_out": str(key_out),
                "match": ok,
                "transfer_certificate": result.cert.to_json(),
                "unit_certificate": result.unit.cert.to_json(),
            }
        )
    return report
