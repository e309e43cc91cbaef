"""Trivialization of idempotent paths by adaptive interval refinement.

A path of idempotents in a matrix algebra, sampled on demand, is cut into
segments short enough that adjacent samples are conjugate by proximity;
the per-segment units compose into one global unit intertwining the two
endpoints, which is the finite certificate behind the homotopy invariance
of idempotent classes.  The refinement is adaptive (only segments that
violate the proximity threshold are split) rather than uniform dyadic:
this is a deliberate reinterpretation of the usual nested-interval
argument, chosen because it minimizes the number of unit compositions and
with it the accumulated floating error.

Excision-style decompositions of the path ring itself have no finite model
and are out of scope here; this module certifies class constancy along a
path, nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .calculus import CertifiedUnit, certify_idempotent, conjugating_unit
from .core import AlgebraInstance
from .errors import PathError
from .instances import COMPLEX, MatrixAlgebra
from .k0 import classify

#: a segment is accepted when its conjugation bound stays below this margin
SEGMENT_MARGIN = 0.5


@dataclass
class IdempotentPath:
    """A sampled path ``t -> e(t)`` of idempotents with a Lipschitz hint.

    Every sample is defect-checked on first use; the hint is validated on
    every sampled pair, and a violation aborts with a diagnostic rather
    than returning an uncertified unit.
    """

    instance: AlgebraInstance
    sampler: Callable[[float], object]
    lipschitz_hint: float
    sample_tol: float = 1e-9
    _cache: dict = field(default_factory=dict, repr=False)

    def at(self, t: float):
        if t not in self._cache:
            e = self.sampler(t)
            defect = float(self.instance.distance(self.instance.mul(e, e), e))
            if defect > self.sample_tol:
                raise PathError(
                    f"path sample at t={t} fails the idempotent check: defect {defect}"
                )
            self._cache[t] = e
        return self._cache[t]


def segment_threshold(max_norm: float) -> float:
    """Largest adjacent-sample distance accepted by the refinement.

    Solves ``2*B*g + g**2 = SEGMENT_MARGIN`` for the path's running norm
    bound ``B``, keeping every accepted segment well inside the proximity
    conjugation threshold.
    """
    b = float(max_norm)
    return math.sqrt(b * b + SEGMENT_MARGIN) - b


def path_trivialize(path: IdempotentPath, max_depth: int = 24, tol: float = 1e-8) -> CertifiedUnit:
    """Compose per-segment proximity conjugations into one global unit.

    Adaptively bisects until every adjacent pair of samples is within the
    segment threshold, then certifies ``norm(e(0)*u - u*e(1)) <= tol``
    together with the unit's residuals, the per-segment gaps, and the
    segment-count bound ``2*ceil(L/threshold) + 2``.  Raises
    :class:`PathError` when some gap stays above threshold at depth
    ``max_depth`` (the path is too wild for its hint) or when the hint
    itself is violated.
    """
    inst = path.instance
    L = float(path.lipschitz_hint)
    points = [0.0, 1.0]
    max_norm = max(float(inst.norm(path.at(0.0))), float(inst.norm(path.at(1.0))))

    for depth in range(max_depth + 1):
        max_norm = max(max_norm, *(float(inst.norm(path.at(t))) for t in points))
        threshold = segment_threshold(max_norm)
        gaps = [
            float(inst.distance(path.at(s), path.at(t)))
            for s, t in zip(points, points[1:])
        ]
        for (s, t), gap in zip(zip(points, points[1:]), gaps):
            if gap > L * (t - s) + inst.slack:
                raise PathError(
                    f"path violates its Lipschitz hint on [{s}, {t}]: "
                    f"gap {gap} > {L} * {t - s}"
                )
        bad = [k for k, gap in enumerate(gaps) if gap > threshold]
        if not bad:
            break
        if depth == max_depth:
            raise PathError(
                f"path too wild for hint: {len(bad)} segment(s) above threshold "
                f"{threshold} at depth {max_depth}"
            )
        for k in reversed(bad):
            points.insert(k + 1, (points[k] + points[k + 1]) / 2)

    segments = list(zip(points, points[1:]))
    # composition can amplify per-segment residuals by the product of unit
    # norms, so each segment is certified two orders tighter
    seg_tol = tol / (100 * max(1, len(segments)))
    u = inst.one()
    u_inv = inst.one()
    seg_gaps = []
    for s, t in segments:
        ce = certify_idempotent(inst, path.at(s), path.sample_tol)
        cf = certify_idempotent(inst, path.at(t), path.sample_tol)
        unit = conjugating_unit(inst, ce, cf, seg_tol)
        u = inst.mul(u, unit.u)
        u_inv = inst.mul(unit.u_inv, u_inv)
        seg_gaps.append(float(inst.distance(ce.e, cf.e)))

    e0, e1 = path.at(0.0), path.at(1.0)
    one = inst.one()
    cert = inst.certificate()
    cert.add("intertwine", float(inst.distance(inst.mul(e0, u), inst.mul(u, e1))), tol)
    cert.add("residual-left", float(inst.distance(inst.mul(u, u_inv), one)), tol)
    cert.add("residual-right", float(inst.distance(inst.mul(u_inv, u), one)), tol)
    threshold = segment_threshold(max_norm)
    cert.add("segments", len(segments), 2 * math.ceil(L / threshold) + 2)
    for k, gap in enumerate(seg_gaps):
        cert.add(f"segment-gap[{k}]", gap, threshold)
    return CertifiedUnit(u, u_inv, cert)


# ---------------------------------------------------------------------------
# canned paths and the rank-constancy experiment


def rotation_path(instance: MatrixAlgebra, quarter_turns: float = 1.0) -> IdempotentPath:
    """Rank-1 projector conjugated by a rotation in the first two axes."""
    n = instance.n
    if n < 2:
        raise PathError("rotation path needs size at least 2")
    p = np.zeros((n, n), dtype=complex)
    p[0, 0] = 1.0

    def sample(t: float):
        angle = quarter_turns * math.pi * t / 2
        r = np.eye(n, dtype=complex)
        r[0, 0] = r[1, 1] = math.cos(angle)
        r[0, 1] = -math.sin(angle)
        r[1, 0] = math.sin(angle)
        return r @ p @ r.T

    hint = 2.0 * abs(quarter_turns) * math.pi
    return IdempotentPath(instance, sample, lipschitz_hint=hint)


def conjugation_path(instance: MatrixAlgebra, rank: int, seed: int, spread: float = 0.5) -> IdempotentPath:
    """Smooth path ``t -> exp(tX) p exp(-tX)`` for a random direction ``X``."""
    rng = np.random.default_rng(seed)
    n = instance.n
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x *= spread / float(instance.norm(x))
    p = np.zeros((n, n), dtype=complex)
    idx = rng.permutation(n)[:rank]
    p[idx, idx] = 1.0
    nx = float(instance.norm(x))
    max_e = float(instance.norm(p)) * math.exp(2 * nx)

    def sample(t: float):
        g = scipy.linalg.expm(t * x)
        ginv = scipy.linalg.expm(-t * x)
        return g @ p @ ginv

    return IdempotentPath(instance, sample, lipschitz_hint=2 * nx * max_e * 1.5)


@dataclass
class ExperimentReport:
    size: int
    trials: int
    failures: list
    max_segments: list

    @property
    def all_constant(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "trials": self.trials,
            "failures": self.failures,
            "max_segments": self.max_segments,
            "all_constant": self.all_constant,
        }


def homotopy_invariance_experiment(
    n: int, trials: int, seed: int, tol: float = 1e-8
) -> ExperimentReport:
    """Random smooth idempotent paths must preserve the endpoint class key.

    Each trial conjugates a fixed projector by a one-parameter group of
    units, trivializes the path, and compares the integer keys of the two
    endpoints; the failure list must come back empty.
    """
    if n > 8:
        raise PathError("experiment sizes above 8 are not supported")
    inst = MatrixAlgebra(COMPLEX, n)
    report = ExperimentReport(size=n, trials=trials, failures=[], max_segments=[])
    for idx in range(trials):
        rng = np.random.default_rng([seed, idx])
        rank = int(rng.integers(0, n + 1))
        path = conjugation_path(inst, rank, seed=int(rng.integers(0, 2**31)))
        unit = path_trivialize(path, tol=tol)
        key0 = classify(inst, certify_idempotent(inst, path.at(0.0), 1e-8)).key
        key1 = classify(inst, certify_idempotent(inst, path.at(1.0), 1e-8)).key
        report.max_segments.append(int(unit.cert.entry("segments").lhs))
        if key0 != key1 or not unit.cert.valid:
            report.failures.append(
                {"trial": idx, "key0": key0, "key1": key1, "valid": unit.cert.valid}
            )
    return report
