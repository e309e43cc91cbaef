"""Idempotent classes, equivalence testing, direct sums and K0 presentations.

General conjugacy search is undecidable, so equivalence is decided through
complete class keys plus explicit unit construction, never by unbounded
search: integer rank (rounded trace) for complex matrix algebras, the
pointwise 0/1 vector for sampled commutative algebras.  The keys are
conjugation invariants, and on the instances supported here they are
complete.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from .calculus import (
    CertifiedIdempotent,
    CertifiedUnit,
    certify_idempotent,
    conjugating_unit,
    conjugation_bound,
)
from .core import AlgebraInstance, Certificate
from .errors import ConfigError
from .instances import (
    ComplexScalars,
    MatrixAlgebra,
    SampledFunctionAlgebra,
    Tower,
)

#: tolerance at which a rounded trace still counts as the integer rank
RANK_TOL = 1e-6


@dataclass(frozen=True)
class IdempotentClass:
    """A certified idempotent together with its conjugation-invariant key."""

    representative: CertifiedIdempotent
    key: Any
    cert: Certificate


def classify(instance: AlgebraInstance, e: CertifiedIdempotent) -> IdempotentClass:
    """Compute the class key of a certified idempotent.

    Complex matrix algebras: the rank, i.e. the trace rounded to the nearest
    integer, certified both against the hard rounding threshold 0.5 and the
    integrality tolerance ``RANK_TOL``.  Sampled commutative algebras over
    the complex scalars: the gridwise 0/1 vector.  Plain complex scalars:
    the value rounded to 0 or 1.
    """
    cert = instance.certificate()
    if isinstance(instance, MatrixAlgebra) and instance.numeric:
        tr = complex(np.trace(e.e))
        rank = int(round(tr.real))
        gap = abs(tr - rank)
        cert.add("rank-gap", gap, 0.5)
        cert.add("rank-integrality", gap, RANK_TOL)
        return IdempotentClass(e, rank, cert)
    if isinstance(instance, SampledFunctionAlgebra) and instance.numeric:
        values = np.asarray(e.e)
        bits = tuple(int(round(v.real)) for v in values)
        gap = float(max(abs(v - b) for v, b in zip(values, bits)))
        cert.add("grid-gap", gap, RANK_TOL)
        if any(b not in (0, 1) for b in bits):
            raise ConfigError("sampled element is not near a 0/1 vector")
        return IdempotentClass(e, bits, cert)
    if isinstance(instance, ComplexScalars):
        rank = int(round(complex(e.e).real))
        gap = abs(complex(e.e) - rank)
        cert.add("rank-gap", gap, 0.5)
        cert.add("rank-integrality", gap, RANK_TOL)
        return IdempotentClass(e, rank, cert)
    raise ConfigError(f"no complete class key for instance kind {instance.kind!r}")


def normalized_trace_key(instance: MatrixAlgebra, e) -> Fraction:
    """Rank over matrix size, as an exact rational (the tower-level key)."""
    rank = int(round(complex(np.trace(e)).real))
    return Fraction(rank, instance.n)


# ---------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: str  # "yes" | "no" | "unknown"
    unit: Optional[CertifiedUnit] = None
    witness: Optional[dict] = None


def are_equivalent(
    instance: AlgebraInstance,
    e: CertifiedIdempotent,
    f: CertifiedIdempotent,
    tol: float = 1e-9,
) -> EquivalenceResult:
    """Decide conjugacy of two certified idempotents.

    "yes" comes with a certified conjugating unit, obtained either by
    proximity (when ``2*norm(e)*norm(e-f) + norm(e-f)**2 < 1``) or, on
    complex matrix algebras, by an explicit basis-matching unit between
    idempotents of equal rank.  "no" comes with the differing class keys.
    "unknown" is returned when neither route applies.
    """
    try:
        key_e = classify(instance, e).key
        key_f = classify(instance, f).key
        if key_e != key_f:
            return EquivalenceResult("no", witness={"key_e": key_e, "key_f": key_f})
    except ConfigError:
        key_e = key_f = None
    dist = instance.distance(e.e, f.e)
    if conjugation_bound(instance.norm(e.e), dist) < 1:
        return EquivalenceResult("yes", unit=conjugating_unit(instance, e, f, tol))
    if isinstance(instance, MatrixAlgebra) and instance.numeric and key_e is not None:
        return EquivalenceResult(
            "yes", unit=_matrix_conjugator(instance, e, f, int(key_e), tol)
        )
    return EquivalenceResult("unknown")


def _matrix_conjugator(
    instance: MatrixAlgebra,
    e: CertifiedIdempotent,
    f: CertifiedIdempotent,
    rank: int,
    tol: float,
) -> CertifiedUnit:
    """Explicit unit between equal-rank idempotents from range/kernel bases."""
    n = instance.n
    eye = np.eye(n, dtype=complex)

    def basis(p):
        # columns: basis of range(p) then basis of range(1 - p)
        left = np.linalg.svd(np.asarray(p))[0][:, :rank]
        right = np.linalg.svd(eye - np.asarray(p))[0][:, : n - rank]
        return np.hstack([left, right])

    we, wf = basis(e.e), basis(f.e)
    u = we @ np.linalg.inv(wf)
    u_inv = wf @ np.linalg.inv(we)
    cert = instance.certificate()
    ne, nf = instance.norm(e.e), instance.norm(f.e)
    cert.add(
        "intertwine",
        instance.distance(instance.mul(e.e, u), instance.mul(u, f.e)),
        tol * (1 + float(ne) + float(nf)),
    )
    cert.add("residual-left", instance.distance(u @ u_inv, eye), tol)
    cert.add("residual-right", instance.distance(u_inv @ u, eye), tol)
    return CertifiedUnit(u, u_inv, cert)


# ---------------------------------------------------------------------------
# direct sums


def direct_sum(
    instance_e: MatrixAlgebra,
    e: CertifiedIdempotent,
    instance_f: MatrixAlgebra,
    f: CertifiedIdempotent,
    tol: float = 1e-9,
) -> tuple[MatrixAlgebra, CertifiedIdempotent]:
    """Block-diagonal idempotent in the matrix algebra of combined size.

    Both summands must live over the same inner instance and norm; the
    class key is additive under this operation.
    """
    if not isinstance(instance_e, MatrixAlgebra) or not isinstance(instance_f, MatrixAlgebra):
        raise ConfigError("direct_sum needs matrix algebras")
    if instance_e.inner.describe() != instance_f.inner.describe():
        raise ConfigError("direct_sum needs the same inner instance")
    if instance_e.norm_kind != instance_f.norm_kind:
        raise ConfigError("direct_sum needs the same matrix norm")
    m, n = instance_e.n, instance_f.n
    total = MatrixAlgebra(instance_e.inner, m + n, instance_e.norm_kind)
    if instance_e.numeric:
        block = np.zeros((m + n, m + n), dtype=complex)
        block[:m, :m] = e.e
        block[m:, m:] = f.e
    else:
        z = instance_e.inner.zero
        rows = []
        for i in range(m):
            rows.append(tuple(e.e[i][j] if j < m else z() for j in range(m + n)))
        for i in range(n):
            rows.append(tuple(f.e[i][j - m] if j >= m else z() for j in range(m + n)))
        block = tuple(rows)
    return total, certify_idempotent(total, block, tol)


# ---------------------------------------------------------------------------
# K0 presentations


@dataclass(frozen=True)
class K0Presentation:
    """A finitely presented abelian group with a class-key map.

    ``group`` is one of ``"Z"``, ``"Z^k"`` or ``"Z[1/2]"``; ``free_rank``
    is the number of free generators (``None`` for the dyadic colimit).
    """

    group: str
    free_rank: Optional[int]
    generators: tuple
    presentation: str
    class_map: str

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "free_rank": self.free_rank,
            "generators": [str(g) for g in self.generators],
            "presentation": self.presentation,
            "class_map": self.class_map,
        }


def k0_of_instance(instance) -> K0Presentation:
    """K0 presentation for supported instances and towers.

    Complex matrix algebras give the integers generated by the rank-1
    class (size stabilization identifies every matrix class with its
    rank); sampled commutative algebras over the complex scalars give one
    integer per grid point; the doubling matrix tower gives the dyadic
    rationals presented as the colimit of multiplication-by-2 maps, with
    the normalized trace as class map.
    """
    if isinstance(instance, ComplexScalars):
        return K0Presentation(
            "Z", 1, ("[rank 1]",), "free abelian group on the rank-1 class", "rank"
        )
    if isinstance(instance, MatrixAlgebra) and instance.numeric:
        return K0Presentation(
            "Z",
            1,
            ("[rank 1]",),
            "free abelian group on the rank-1 class; size stabilization merges "
            "matrix classes with equal rank",
            "rank",
        )
    if isinstance(instance, SampledFunctionAlgebra) and instance.numeric:
        k = instance.size
        return K0Presentation(
            "Z" if k == 1 else f"Z^{k}",
            k,
            tuple(f"[point {p}]" for p in instance.grid),
            "free abelian group on the grid-point indicators",
            "pointwise 0/1 vector",
        )
    if isinstance(instance, Tower):
        if instance.kind == "uhf":
            return K0Presentation(
                "Z[1/2]",
                None,
                ("[normalized rank 1/2^i at level i]",),
                "colim(Z --*2--> Z --*2--> ...), one copy per tower level",
                "normalized trace, an exact dyadic rational",
            )
        raise ConfigError(
            f"unsupported instance kind for K0: tower {instance.kind!r} "
            "(its colimit presentation is not finitely generated; use a level)"
        )
    raise ConfigError(f"unsupported instance kind for K0: {getattr(instance, 'kind', instance)!r}")
