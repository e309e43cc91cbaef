"""Contracts for normed abelian groups and rings, plus inequality certificates.

Everything numerically produced by this library carries a
:class:`Certificate`: a list of named inequalities ``lhs <= rhs`` that can be
re-checked after the fact.  Instances declare either exact-rational or
floating semantics; certificates built over floating instances add an
explicit absolute slack (default ``1e-9``) to every right-hand side, so that
a valid certificate is a statement about real numbers, not about rounding
luck.

Elements of a completion are never materialized; see
:mod:`idemkit.colimit` for the (finite representative, tail bound) encoding.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

from .errors import ConfigError

#: A norm value: a nonnegative real, exact (``int``/``Fraction``) on exact
#: instances and ``float`` on floating ones.  ``math.inf`` marks the empty
#: infimum of a bounded search.
NormValue = Union[int, Fraction, float]

DEFAULT_FLOAT_SLACK = 1e-9


def as_fraction(x) -> Fraction:
    """Parse an exact rational from int, Fraction or a string like ``"1/2"``."""
    if isinstance(x, bool):
        raise ConfigError("booleans are not rationals")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ConfigError(f"cannot read {x!r} as an exact rational")


def _norm_to_json(v: NormValue):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return v.numerator
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v
    return float(v)


def _norm_from_json(v) -> NormValue:
    if isinstance(v, str):
        return Fraction(v)
    return v


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertEntry:
    """One verified inequality ``lhs <= rhs``.

    Advisory entries are recorded for inspection but excluded from overall
    validity (used for bounds that are reported side by side with the one a
    result is actually keyed on).
    """

    name: str
    lhs: NormValue
    rhs: NormValue
    advisory: bool = False

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_json(self) -> dict:
        d = {"name": self.name, "lhs": _norm_to_json(self.lhs), "rhs": _norm_to_json(self.rhs)}
        if self.advisory:
            d["advisory"] = True
        return d

    @staticmethod
    def from_json(d: dict) -> "CertEntry":
        return CertEntry(
            name=d["name"],
            lhs=_norm_from_json(d["lhs"]),
            rhs=_norm_from_json(d["rhs"]),
            advisory=bool(d.get("advisory", False)),
        )


@dataclass
class Certificate:
    """A recomputable record of named verified inequalities.

    ``slack`` is added to the right-hand side of every entry at insertion
    time (0 for exact instances).  Validity is recomputed from the stored
    entries, never cached.
    """

    entries: list[CertEntry] = field(default_factory=list)
    slack: float = 0.0

    def add(self, name: str, lhs: NormValue, rhs: NormValue, advisory: bool = False) -> CertEntry:
        if self.slack:
            rhs = rhs + self.slack
        entry = CertEntry(name, lhs, rhs, advisory)
        self.entries.append(entry)
        return entry

    def extend(self, other: "Certificate", prefix: str = "") -> None:
        """Absorb another certificate's entries, optionally name-prefixed."""
        for e in other.entries:
            self.entries.append(CertEntry(prefix + e.name, e.lhs, e.rhs, e.advisory))

    @property
    def valid(self) -> bool:
        return all(e.holds for e in self.entries if not e.advisory)

    def entry(self, name: str) -> CertEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def valid_for(self, prefixes: Iterable[str]) -> bool:
        """Validity restricted to entries whose name starts with a prefix."""
        pres = tuple(prefixes)
        return all(e.holds for e in self.entries if e.name.startswith(pres))

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self.entries]

    @staticmethod
    def from_json(entries: list[dict]) -> "Certificate":
        return Certificate([CertEntry.from_json(d) for d in entries])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# instances


class AlgebraInstance(ABC):
    """Operation table realizing a concrete normed ring.

    Elements are plain values (scalars, arrays, tuples) tagged by the
    instance that owns them; all arithmetic goes through this table.  An
    instance declares ``exact = True`` when its arithmetic and norm are
    exact rationals; floating instances carry ``slack``, the absolute
    tolerance added to certified right-hand sides.

    All operations are pure; instances are immutable after construction and
    safe to share between threads.
    """

    kind: str = "abstract"
    exact: bool = False
    slack: float = DEFAULT_FLOAT_SLACK
    #: whether the multiplicative axioms (submultiplicativity, unit norm)
    #: are part of this instance's contract
    is_banach_ring: bool = True

    @abstractmethod
    def add(self, x, y): ...

    @abstractmethod
    def neg(self, x): ...

    @abstractmethod
    def mul(self, x, y): ...

    @abstractmethod
    def one(self): ...

    @abstractmethod
    def zero(self): ...

    @abstractmethod
    def norm(self, x) -> NormValue: ...

    @abstractmethod
    def random_element(self, rng): ...

    @abstractmethod
    def serialize_element(self, x): ...

    @abstractmethod
    def describe(self) -> dict:
        """JSON descriptor, e.g. ``{"kind": "matrix", "n": 4, ...}``."""

    # derived operations

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def distance(self, x, y) -> NormValue:
        return self.norm(self.sub(x, y))

    def eq(self, x, y, tol: float = 0.0) -> bool:
        """Equality within tolerance (exactly, when ``tol`` is 0)."""
        return self.distance(x, y) <= tol

    def int_scale(self, k: int, x):
        """``k``-fold sum of ``x``; instances override with native scaling."""
        if k == 0:
            return self.zero()
        if k < 0:
            return self.neg(self.int_scale(-k, x))
        acc, base = None, x
        while k:
            if k & 1:
                acc = base if acc is None else self.add(acc, base)
            k >>= 1
            if k:
                base = self.add(base, base)
        return acc

    def from_int(self, k: int):
        return self.int_scale(k, self.one())

    def try_inverse(self, x):
        """Direct inverse where the instance supports one; raises otherwise."""
        raise NotImplementedError(f"{self.kind}: no direct inverse")

    def certificate(self) -> Certificate:
        """Fresh certificate with this instance's slack policy."""
        return Certificate(slack=0.0 if self.exact else self.slack)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"


@dataclass(frozen=True)
class Element:
    """Convenience wrapper tagging a value with its instance.

    The module-level operations take ``(instance, value)`` pairs; this
    wrapper is for interactive use and tests, where operator syntax is
    nicer.
    """

    instance: AlgebraInstance
    value: Any

    def _lift(self, other):
        if isinstance(other, Element):
            return other.value
        return other

    def __add__(self, other):
        return Element(self.instance, self.instance.add(self.value, self._lift(other)))

    def __sub__(self, other):
        return Element(self.instance, self.instance.sub(self.value, self._lift(other)))

    def __mul__(self, other):
        return Element(self.instance, self.instance.mul(self.value, self._lift(other)))

    def __neg__(self):
        return Element(self.instance, self.instance.neg(self.value))

    @property
    def norm(self) -> NormValue:
        return self.instance.norm(self.value)


# ---------------------------------------------------------------------------
# scaled integers


class ScaledIntegers(AlgebraInstance):
    """The integers with norm ``r * |n|`` for a positive rational scale ``r``.

    A normed abelian group for every ``r``; the ring axioms (unit norm at
    most 1, submultiplicativity) hold together only for ``r = 1``, and the
    axiom audit flags that honestly.
    """

    kind = "scaled-integers"
    exact = True
    slack = 0.0

    def __init__(self, r=1):
        r = as_fraction(r)
        if r <= 0:
            raise ConfigError("scale must be positive")
        self.r = r
        self.is_banach_ring = r == 1

    def add(self, x: int, y: int) -> int:
        return x + y

    def neg(self, x: int) -> int:
        return -x

    def mul(self, x: int, y: int) -> int:
        return x * y

    def one(self) -> int:
        return 1

    def zero(self) -> int:
        return 0

    def norm(self, x: int) -> Fraction:
        return self.r * abs(x)

    def int_scale(self, k: int, x: int) -> int:
        return k * x

    def random_element(self, rng) -> int:
        return int(rng.integers(-9, 10))

    def serialize_element(self, x: int) -> int:
        return int(x)

    def describe(self) -> dict:
        return {"kind": self.kind, "r": _norm_to_json(self.r)}


# ---------------------------------------------------------------------------
# norm-axiom audit


def check_norm_axioms(instance: AlgebraInstance, samples: Sequence) -> Certificate:
    """Audit the norm axioms on a sample set; failures become invalid entries.

    Entries: ``zero-norm``, per-sample ``symmetry[i]``, per-ordered-pair
    ``triangle[i,j]``, and the ring axioms ``unit-norm`` and ``submul[i,j]``.
    Nothing is raised; a violated axiom is simply an entry with
    ``lhs > rhs``.  ``Certificate.valid_for(("zero-norm", "symmetry",
    "triangle"))`` gives the normed-group verdict when the ring axioms are
    not part of the instance's contract.
    """
    cert = instance.certificate()
    cert.add("zero-norm", instance.norm(instance.zero()), 0)
    for i, x in enumerate(samples):
        nx = instance.norm(x)
        cert.add(f"symmetry[{i}]", abs(instance.norm(instance.neg(x)) - nx), 0)
    for (i, x), (j, y) in itertools.product(enumerate(samples), repeat=2):
        cert.add(
            f"triangle[{i},{j}]",
            instance.norm(instance.add(x, y)),
            instance.norm(x) + instance.norm(y),
        )
    cert.add("unit-norm", instance.norm(instance.one()), 1)
    for (i, x), (j, y) in itertools.product(enumerate(samples), repeat=2):
        cert.add(
            f"submul[{i},{j}]",
            instance.norm(instance.mul(x, y)),
            instance.norm(x) * instance.norm(y),
        )
    return cert


GROUP_AXIOM_PREFIXES = ("zero-norm", "symmetry", "triangle")


# ---------------------------------------------------------------------------
# coproduct and tensor norms on exactly checkable inputs


def l1_coproduct_norm(components: Sequence[tuple[Any, AlgebraInstance]]) -> NormValue:
    """Sum of the component norms: the coproduct norm of a finite tuple.

    Additive under list concatenation; the empty list has norm 0.
    """
    total: NormValue = 0
    for x, inst in components:
        total = total + inst.norm(x)
    return total


@functools.lru_cache(maxsize=None)
def _min_term_cost(b: int) -> dict[int, int]:
    """Min of ``sum |x_i*y_i|`` to write each reachable integer as
    ``sum x_i*y_i`` with at most ``b`` terms and ``|x_i|, |y_i| <= b``."""
    products = sorted({x * y for x in range(-b, b + 1) for y in range(-b, b + 1)} - {0})
    reach = b * b * b
    best: dict[int, int] = {0: 0}
    for _ in range(b):
        nxt = dict(best)
        for v, cost in best.items():
            for p in products:
                w = v + p
                if abs(w) > reach:
                    continue
                c = cost + abs(p)
                if c < nxt.get(w, c + 1):
                    nxt[w] = c
        if nxt == best:
            break
        best = nxt
    return best


def tensor_norm_int(m: int, r, s, support_bound: int) -> NormValue:
    """Projective tensor norm of the integer ``m`` across scales ``r`` and ``s``.

    Brute-force infimum of ``sum_i r|x_i| * s|y_i|`` over decompositions
    ``m = sum_i x_i * y_i`` with at most ``support_bound`` terms and factors
    bounded by ``support_bound``.  This search is an independent oracle: the
    infimum equals ``r*s*|m|`` for any bound large enough to contain the
    one-term decomposition ``m = m * 1``, and the value is monotone
    nonincreasing in the bound.  Returns ``inf`` when the searched set is
    empty.
    """
    if support_bound <= 0:
        raise ConfigError("support_bound must be a positive integer")
    r, s = as_fraction(r), as_fraction(s)
    table = _min_term_cost(int(support_bound))
    if m not in table:
        return math.inf
    return r * s * table[m]
