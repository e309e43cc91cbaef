"""Concrete normed-ring instances and the towers used by colimit experiments.

Matrix algebras over the complex scalars are stored as numpy arrays and use
vectorized kernels; over any other inner instance they fall back to tuples
of tuples with entrywise arithmetic.  The default matrix norm is the
max-column-l1 norm, which realizes matrices as endomorphisms of finite l1
powers and is exactly computable; the spectral norm is available for
complex scalars only.

Infinite spaces are represented only through finite grids; nothing in this
module claims to bound a true supremum over an infinite domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import AlgebraInstance, NormValue, ScaledIntegers, as_fraction
from .errors import ConfigError, IdemkitError


class ComplexScalars(AlgebraInstance):
    """The complex numbers with the modulus norm."""

    kind = "complex"
    exact = False

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def one(self):
        return complex(1)

    def zero(self):
        return complex(0)

    def norm(self, x) -> float:
        return abs(x)

    def int_scale(self, k, x):
        return k * x

    def try_inverse(self, x):
        if x == 0:
            raise IdemkitError("zero is not invertible")
        return 1 / x

    def random_element(self, rng):
        return complex(rng.standard_normal(), rng.standard_normal())

    def serialize_element(self, x):
        return [float(x.real), float(x.imag)]

    def describe(self) -> dict:
        return {"kind": self.kind}


COMPLEX = ComplexScalars()


def _is_complex(instance: AlgebraInstance) -> bool:
    return isinstance(instance, ComplexScalars)


class MatrixAlgebra(AlgebraInstance):
    """Square matrices over an inner instance.

    ``norm_kind`` is ``"col-l1"`` (max over columns of the column sum of
    inner norms; submultiplicative, identity has norm 1) or ``"spectral"``
    (largest singular value; complex scalars only).
    """

    kind = "matrix"

    def __init__(self, inner: AlgebraInstance, n: int, norm_kind: str = "col-l1"):
        if n < 1:
            raise ConfigError("matrix size must be positive")
        if norm_kind not in ("col-l1", "spectral"):
            raise ConfigError(f"unknown matrix norm {norm_kind!r}")
        if norm_kind == "spectral" and not _is_complex(inner):
            raise ConfigError("spectral norm requires complex scalars")
        self.inner = inner
        self.n = n
        self.norm_kind = norm_kind
        self.numeric = _is_complex(inner)
        self.exact = inner.exact
        self.slack = inner.slack

    # numpy path for complex scalars, tuple-of-tuples otherwise

    def add(self, x, y):
        if self.numeric:
            return x + y
        a = self.inner.add
        return tuple(tuple(a(x[i][j], y[i][j]) for j in range(self.n)) for i in range(self.n))

    def neg(self, x):
        if self.numeric:
            return -x
        g = self.inner.neg
        return tuple(tuple(g(v) for v in row) for row in x)

    def mul(self, x, y):
        if self.numeric:
            return x @ y
        add, mul, zero = self.inner.add, self.inner.mul, self.inner.zero
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero()
                for k in range(n):
                    acc = add(acc, mul(x[i][k], y[k][j]))
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def one(self):
        if self.numeric:
            return np.eye(self.n, dtype=complex)
        o, z = self.inner.one, self.inner.zero
        return tuple(tuple(o() if i == j else z() for j in range(self.n)) for i in range(self.n))

    def zero(self):
        if self.numeric:
            return np.zeros((self.n, self.n), dtype=complex)
        z = self.inner.zero
        return tuple(tuple(z() for _ in range(self.n)) for _ in range(self.n))

    def int_scale(self, k, x):
        if self.numeric:
            return k * x
        s = self.inner.int_scale
        return tuple(tuple(s(k, v) for v in row) for row in x)

    def norm(self, x) -> NormValue:
        if self.norm_kind == "spectral":
            return float(np.linalg.norm(np.asarray(x), 2))
        if self.numeric:
            return float(np.abs(x).sum(axis=0).max())
        best: NormValue = 0
        for j in range(self.n):
            col = sum((self.inner.norm(x[i][j]) for i in range(self.n)), start=0)
            if col > best:
                best = col
        return best

    def unit_matrix(self, i: int, j: int, value=None):
        """Matrix with a single nonzero entry (the inner unit by default)."""
        if value is None:
            value = self.inner.one()
        if self.numeric:
            m = np.zeros((self.n, self.n), dtype=complex)
            m[i, j] = value
            return m
        z = self.inner.zero
        return tuple(
            tuple(value if (r, c) == (i, j) else z() for c in range(self.n))
            for r in range(self.n)
        )

    def try_inverse(self, x):
        if not self.numeric:
            raise NotImplementedError("direct inverse only over complex scalars")
        return np.linalg.inv(x)

    def trace(self, x):
        if self.numeric:
            return complex(np.trace(x))
        acc = self.inner.zero()
        for i in range(self.n):
            acc = self.inner.add(acc, x[i][i])
        return acc

    def random_element(self, rng):
        if self.numeric:
            return rng.standard_normal((self.n, self.n)) + 1j * rng.standard_normal((self.n, self.n))
        r = self.inner.random_element
        return tuple(tuple(r(rng) for _ in range(self.n)) for _ in range(self.n))

    def serialize_element(self, x):
        if self.numeric:
            return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(x)]
        return [[self.inner.serialize_element(v) for v in row] for row in x]

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "norm": self.norm_kind,
            "inner": self.inner.describe(),
        }


class SampledFunctionAlgebra(AlgebraInstance):
    """Functions on a finite grid with values in an inner instance.

    Pointwise operations, sup norm over the grid.  This is the honest
    finite stand-in for function rings on infinite spaces: the norm is a
    max over the listed points, nothing more.
    """

    kind = "functions"

    def __init__(self, grid: Sequence, inner: AlgebraInstance):
        if len(grid) == 0:
            raise ConfigError("grid must be nonempty")
        self.grid = tuple(grid)
        self.inner = inner
        self.numeric = _is_complex(inner)
        self.exact = inner.exact
        self.slack = inner.slack

    @property
    def size(self) -> int:
        return len(self.grid)

    def add(self, x, y):
        if self.numeric:
            return x + y
        return tuple(self.inner.add(a, b) for a, b in zip(x, y))

    def neg(self, x):
        if self.numeric:
            return -x
        return tuple(self.inner.neg(a) for a in x)

    def mul(self, x, y):
        if self.numeric:
            return x * y
        return tuple(self.inner.mul(a, b) for a, b in zip(x, y))

    def one(self):
        if self.numeric:
            return np.ones(self.size, dtype=complex)
        return tuple(self.inner.one() for _ in self.grid)

    def zero(self):
        if self.numeric:
            return np.zeros(self.size, dtype=complex)
        return tuple(self.inner.zero() for _ in self.grid)

    def int_scale(self, k, x):
        if self.numeric:
            return k * x
        return tuple(self.inner.int_scale(k, a) for a in x)

    def norm(self, x) -> NormValue:
        if self.numeric:
            return float(np.abs(x).max())
        return max(self.inner.norm(a) for a in x)

    def indicator(self, points):
        """Indicator function of a subset of grid points (an idempotent)."""
        chosen = set(points)
        if self.numeric:
            return np.array([1.0 + 0j if p in chosen else 0j for p in self.grid])
        return tuple(self.inner.one() if p in chosen else self.inner.zero() for p in self.grid)

    def try_inverse(self, x):
        if not self.numeric:
            raise NotImplementedError("direct inverse only over complex scalars")
        if np.any(x == 0):
            raise IdemkitError("function vanishes somewhere; not invertible")
        return 1.0 / x

    def random_element(self, rng):
        if self.numeric:
            return rng.standard_normal(self.size) + 1j * rng.standard_normal(self.size)
        return tuple(self.inner.random_element(rng) for _ in self.grid)

    def serialize_element(self, x):
        if self.numeric:
            return [[float(v.real), float(v.imag)] for v in np.asarray(x)]
        return [self.inner.serialize_element(v) for v in x]

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "points": list(self.grid),
            "inner": self.inner.describe(),
        }


class SequenceAlgebra(AlgebraInstance):
    """Truncated sequence algebras over an inner instance.

    Mode ``"linf"``: sup norm with the coordinatewise product (unit is the
    all-ones sequence).  Mode ``"l1"``: sum norm with the truncated
    convolution product (unit is the delta at index 0); coordinatewise
    multiplication would make the all-ones unit too large for a normed
    ring, while convolution keeps the norm submultiplicative and the unit
    norm equal to the inner unit's.
    """

    kind = "sequence"

    def __init__(self, mode: str, truncation: int, inner: AlgebraInstance):
        if mode not in ("l1", "linf"):
            raise ConfigError(f"unknown sequence mode {mode!r}")
        if truncation < 1:
            raise ConfigError("truncation must be positive")
        self.mode = mode
        self.truncation = truncation
        self.inner = inner
        self.numeric = _is_complex(inner)
        self.exact = inner.exact
        self.slack = inner.slack

    def add(self, x, y):
        if self.numeric:
            return x + y
        return tuple(self.inner.add(a, b) for a, b in zip(x, y))

    def neg(self, x):
        if self.numeric:
            return -x
        return tuple(self.inner.neg(a) for a in x)

    def mul(self, x, y):
        if self.mode == "linf":
            if self.numeric:
                return x * y
            return tuple(self.inner.mul(a, b) for a, b in zip(x, y))
        # l1: truncated convolution, dropping degrees >= truncation
        t = self.truncation
        if self.numeric:
            return np.convolve(x, y)[:t]
        add, mul, zero = self.inner.add, self.inner.mul, self.inner.zero
        out = []
        for k in range(t):
            acc = zero()
            for i in range(k + 1):
                acc = add(acc, mul(x[i], y[k - i]))
            out.append(acc)
        return tuple(out)

    def one(self):
        t = self.truncation
        if self.mode == "linf":
            if self.numeric:
                return np.ones(t, dtype=complex)
            return tuple(self.inner.one() for _ in range(t))
        if self.numeric:
            u = np.zeros(t, dtype=complex)
            u[0] = 1
            return u
        return tuple(self.inner.one() if k == 0 else self.inner.zero() for k in range(t))

    def zero(self):
        if self.numeric:
            return np.zeros(self.truncation, dtype=complex)
        return tuple(self.inner.zero() for _ in range(self.truncation))

    def int_scale(self, k, x):
        if self.numeric:
            return k * x
        return tuple(self.inner.int_scale(k, a) for a in x)

    def norm(self, x) -> NormValue:
        if self.numeric:
            mags = np.abs(x)
            return float(mags.sum()) if self.mode == "l1" else float(mags.max())
        norms = [self.inner.norm(a) for a in x]
        return sum(norms, start=0) if self.mode == "l1" else max(norms)

    def random_element(self, rng):
        if self.numeric:
            return rng.standard_normal(self.truncation) + 1j * rng.standard_normal(self.truncation)
        return tuple(self.inner.random_element(rng) for _ in range(self.truncation))

    def serialize_element(self, x):
        if self.numeric:
            return [[float(v.real), float(v.imag)] for v in np.asarray(x)]
        return [self.inner.serialize_element(v) for v in x]

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "mode": self.mode,
            "truncation": self.truncation,
            "inner": self.inner.describe(),
        }


# ---------------------------------------------------------------------------
# towers


@dataclass
class Tower:
    """A sequence of instances with norm-nonincreasing unital connecting maps.

    Models a sequential colimit of normed rings; the colimit itself is
    never materialized.  ``limit_norm_hint(i, x)`` estimates the norm of a
    level-``i`` element in the colimit; for the towers built here all
    connecting maps are isometric, so the hint is the level norm.
    """

    kind: str
    levels: list[AlgebraInstance]
    _connect: Callable = field(repr=False)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def connect(self, i: int, x):
        """Image of a level-``i`` element at level ``i + 1``."""
        return self._connect(i, x)

    def push(self, x, i: int, j: int):
        """Image of a level-``i`` element at level ``j >= i``."""
        if not 0 <= i <= j <= self.depth:
            raise ConfigError(f"push {i} -> {j} outside tower of depth {self.depth}")
        for k in range(i, j):
            x = self._connect(k, x)
        return x

    def limit_norm_hint(self, i: int, x) -> NormValue:
        return self.levels[i].norm(x)

    def describe(self) -> dict:
        return {"kind": self.kind, "depth": self.depth}


def make_uhf_tower(depth: int) -> Tower:
    """Matrix sizes doubling, connecting map ``a -> diag(a, a)``.

    Levels are complex matrix algebras of size ``2**i`` with the
    max-column-l1 norm; the connecting maps are unital isometries and
    preserve the normalized trace.
    """
    if not 1 <= depth <= 12:
        raise ConfigError("uhf tower depth must be between 1 and 12")
    levels = [MatrixAlgebra(COMPLEX, 2**i) for i in range(depth + 1)]

    def connect(i, a):
        return np.kron(np.eye(2, dtype=complex), a)

    return Tower(kind="uhf", levels=levels, _connect=connect)


def cantor_grid(i: int) -> tuple[str, ...]:
    """All bit strings of length ``i`` in lexicographic order."""
    if i == 0:
        return ("",)
    return tuple(format(k, f"0{i}b") for k in range(2**i))


def make_cantor_tower(depth: int) -> Tower:
    """Function algebras on binary grids, connected by dropping the new bit.

    Level ``i`` is the complex function algebra on the ``2**i`` bit strings
    of length ``i``; the connecting map is precomposition with the
    projection that forgets the last bit, i.e. each value is repeated
    twice.  Commutative, so idempotent classes are literal indicator
    functions.
    """
    if not 0 <= depth <= 16:
        raise ConfigError("cantor tower depth must be between 0 and 16")
    levels = [SampledFunctionAlgebra(cantor_grid(i), COMPLEX) for i in range(depth + 1)]

    def connect(i, v):
        return np.repeat(v, 2)

    return Tower(kind="cantor", levels=levels, _connect=connect)


# ---------------------------------------------------------------------------
# seeded generators

_MAX_GENERATOR_RETRIES = 64


def random_unit(instance: MatrixAlgebra, rng, spread: float = 1.0):
    """Random well-conditioned invertible matrix (complex scalars only)."""
    if not instance.numeric:
        raise ConfigError("random units need complex scalars")
    n = instance.n
    for _ in range(_MAX_GENERATOR_RETRIES):
        s = np.eye(n, dtype=complex) + spread * (
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        ) / max(1.0, math.sqrt(n))
        if np.linalg.cond(s) < 1e3:
            return s
    raise IdemkitError("failed to draw a well-conditioned unit")


def conjugated_projector(instance: MatrixAlgebra, rank: int, rng, spread: float = 1.0):
    """Random idempotent of the given rank: a conjugated 0/1 diagonal."""
    if not instance.numeric:
        raise ConfigError("projector generator needs complex scalars")
    n = instance.n
    if not 0 <= rank <= n:
        raise ConfigError("rank out of range")
    d = np.zeros((n, n), dtype=complex)
    idx = rng.permutation(n)[:rank]
    d[idx, idx] = 1.0
    s = random_unit(instance, rng, spread)
    return s @ d @ np.linalg.inv(s)


def random_almost_idempotent(instance: MatrixAlgebra, t: float, seed: int):
    """Element ``a`` with defect ``norm(a*a - a)`` inside ``[t/2, t]``.

    Built as a conjugated 0/1 diagonal plus a scaled perturbation, with the
    scale found by bisection on the measured defect.  Deterministic for
    equal seeds.  ``t = 0`` returns the exact conjugated projector.
    """
    if not 0 <= t < 0.25:
        raise ConfigError("target defect must lie in [0, 1/4)")
    rng = np.random.default_rng(seed)
    n = instance.n
    defect = lambda a: instance.norm(a @ a - a)
    for _ in range(_MAX_GENERATOR_RETRIES):
        rank = int(rng.integers(0, n + 1))
        base = conjugated_projector(instance, rank, rng, spread=0.5)
        if t == 0:
            return base
        p = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        p /= instance.norm(p)
        # grow the scale until the defect band is bracketed, then bisect
        lo, hi = 0.0, t / 4
        for _ in range(60):
            if defect(base + hi * p) >= t / 2:
                break
            lo, hi = hi, 2 * hi
        else:
            continue
        for _ in range(200):
            d = defect(base + hi * p)
            if t / 2 <= d <= t:
                return base + hi * p
            mid = (lo + hi) / 2
            if defect(base + mid * p) >= t / 2:
                hi = mid
            else:
                lo = mid
    raise IdemkitError("could not reach the requested defect band")


# ---------------------------------------------------------------------------
# descriptors

_TOWER_KINDS = ("uhf", "cantor")


def parse_instance(desc: dict) -> AlgebraInstance:
    """Build an instance from a JSON descriptor.

    Accepts the flat form ``{"kind": "matrix", "n": 4, ...}`` and the
    enveloped form ``{"kind": "matrix", "params": {"n": 4, ...}}``.
    """
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"instance descriptor needs a 'kind': {desc!r}")
    d = dict(desc)
    kind = d.pop("kind")
    if set(d) == {"params"}:
        d = dict(d["params"])
    if kind == "complex":
        _reject_extras(kind, d, ())
        return COMPLEX
    if kind == "scaled-integers":
        _reject_extras(kind, d, ("r",))
        return ScaledIntegers(as_fraction(d.get("r", 1)))
    if kind == "matrix":
        _reject_extras(kind, d, ("n", "norm", "inner"))
        inner = parse_instance(d.get("inner", {"kind": "complex"}))
        return MatrixAlgebra(inner, int(d["n"]), d.get("norm", "col-l1"))
    if kind == "functions":
        _reject_extras(kind, d, ("points", "inner"))
        points = d.get("points", 2)
        grid = tuple(points) if isinstance(points, (list, tuple)) else tuple(range(int(points)))
        return SampledFunctionAlgebra(grid, parse_instance(d.get("inner", {"kind": "complex"})))
    if kind == "sequence":
        _reject_extras(kind, d, ("mode", "truncation", "inner"))
        return SequenceAlgebra(
            d.get("mode", "l1"),
            int(d.get("truncation", 8)),
            parse_instance(d.get("inner", {"kind": "complex"})),
        )
    if kind in _TOWER_KINDS:
        raise ConfigError(f"{kind!r} is a tower descriptor; use parse_tower")
    raise ConfigError(f"unknown instance kind {kind!r}")


def parse_tower(desc: dict) -> Tower:
    """Build a tower from a JSON descriptor like ``{"kind": "uhf", "depth": 6}``."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"tower descriptor needs a 'kind': {desc!r}")
    d = dict(desc)
    kind = d.pop("kind")
    if set(d) == {"params"}:
        d = dict(d["params"])
    _reject_extras(kind, d, ("depth",))
    depth = int(d.get("depth", 4))
    if kind == "uhf":
        return make_uhf_tower(depth)
    if kind == "cantor":
        return make_cantor_tower(depth)
    raise ConfigError(f"unknown tower kind {kind!r}")


def _reject_extras(kind: str, d: dict, allowed: tuple) -> None:
    extras = set(d) - set(allowed)
    if extras:
        raise ConfigError(f"unknown fields for {kind!r}: {sorted(extras)}")


def registered_instances() -> list[AlgebraInstance]:
    """The standard zoo audited by the norm-axiom acceptance test.

    Only instances claiming the full ring contract appear here; scaled
    integers with scale other than 1 are normed groups whose deliberately
    failing ring axioms are exercised separately.
    """
    return [
        COMPLEX,
        ScaledIntegers(1),
        MatrixAlgebra(COMPLEX, 2),
        MatrixAlgebra(COMPLEX, 4),
        MatrixAlgebra(COMPLEX, 2, norm_kind="spectral"),
        MatrixAlgebra(ScaledIntegers(1), 2),
        MatrixAlgebra(MatrixAlgebra(COMPLEX, 2), 2),
        SampledFunctionAlgebra(cantor_grid(2), COMPLEX),
        SequenceAlgebra("l1", 6, COMPLEX),
        SequenceAlgebra("linf", 6, COMPLEX),
    ]
