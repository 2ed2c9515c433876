"""Masked scores, baseline priors, links, and evidence-kernel assembly.

Hard exclusions live in an explicit boolean mask. Score arrays hold
finite numbers only; entries that arrive as the JSON token "-inf" are
converted to mask=False at the I/O boundary (see matio) and zeroed
here. Keeping infinities out of the numeric arrays avoids NaN traps in
downstream sums.

A link maps finite scores to strictly positive weights. The exponential
family exp(s/tau) is the one that survives the multiplicative
composition law; the named custom links exist so the admissibility
check has both passing and failing witnesses to chew on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveLinkValue, ShapeMismatch


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got ndim={arr.ndim}")
    arr.setflags(write=False)
    return arr


def _as_mask(mask, shape: tuple[int, int], name: str = "mask") -> np.ndarray:
    arr = np.array(mask, copy=True)
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} entries must be boolean or 0/1")
        arr = arr.astype(bool)
    if arr.shape != shape:
        raise ShapeMismatch(f"{name} shape {arr.shape} != values shape {shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MaskedScore:
    """Dense score matrix plus the admissible relation as a boolean mask.

    Entries are only meaningful where the mask is true; excluded entries
    are stored as 0.0 and never read.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "score values")
        mask = _as_mask(self.mask, values.shape)
        if not np.isfinite(values[mask]).all():
            raise ValueError("score values must be finite on the mask")
        cleaned = np.where(mask, values, 0.0)
        cleaned.setflags(write=False)
        object.__setattr__(self, "values", cleaned)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def dense(cls, values) -> "MaskedScore":
        arr = np.asarray(values, dtype=np.float64)
        return cls(arr, np.ones(arr.shape, dtype=bool))


@dataclass(frozen=True)
class BaselinePrior:
    """Strictly positive prior weights, one per (query, key) pair."""

    values: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "prior values")
        if not np.isfinite(values).all() or (values <= 0).any():
            raise ValueError("prior entries must be finite and strictly positive")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def ones(cls, shape: tuple[int, int]) -> "BaselinePrior":
        return cls(np.ones(shape))


_LINK_KINDS = ("exp", "softplus", "square-plus-one", "exp-with-slope")


@dataclass(frozen=True)
class Link:
    """Map from finite scores to positive weights.

    kind "exp" is exp(s/tau). The remaining kinds are named built-ins
    used by the compositionality check: "exp-with-slope" is another
    member of the exponential family, "softplus" and "square-plus-one"
    are positive but not multiplicative.
    """

    kind: str = "exp"
    tau: float = 1.0
    slope: float = 1.0

    def __post_init__(self):
        if self.kind not in _LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")
        if self.kind == "exp" and not self.tau > 0:
            raise ValueError("temperature tau must be strictly positive")

    @classmethod
    def exponential(cls, tau: float = 1.0) -> "Link":
        return cls(kind="exp", tau=tau)

    def evaluate(self, scores) -> np.ndarray:
        """Apply the link elementwise; raises NonPositiveLinkValue if any
        output fails to be strictly positive."""
        s = np.asarray(scores, dtype=np.float64)
        if self.kind == "exp":
            out = np.exp(s / self.tau)
        elif self.kind == "exp-with-slope":
            out = np.exp(self.slope * s)
        elif self.kind == "softplus":
            out = np.logaddexp(0.0, s)
        else:  # square-plus-one
            out = 1.0 + s * s
        if (out <= 0).any():
            bad = np.asarray(s).flat[int(np.argmin(out))]
            raise NonPositiveLinkValue(
                f"link {self.kind!r} returned a non-positive weight at score {bad}"
            )
        return out


@dataclass(frozen=True)
class EvidenceKernel:
    """Nonnegative kernel whose support equals the admissibility mask."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "kernel values")
        mask = _as_mask(self.mask, values.shape)
        if not np.isfinite(values).all():
            raise ValueError("kernel values must be finite")
        if (values < 0).any():
            raise ValueError("kernel values must be nonnegative")
        if ((values > 0) != mask).any():
            raise ValueError("kernel support must equal the mask exactly")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def assemble_kernel(score: MaskedScore, prior: BaselinePrior | None, link: Link) -> EvidenceKernel:
    """K = prior * link(score) on the mask, exact zero off the mask."""
    if prior is not None and prior.shape != score.shape:
        raise ShapeMismatch(f"prior shape {prior.shape} != score shape {score.shape}")
    mask = score.mask
    out = np.zeros(score.shape)
    weights = link.evaluate(score.values[mask])
    if not np.isfinite(weights).all():
        raise ValueError("link overflowed to a non-finite kernel entry")
    if prior is not None:
        weights = prior.values[mask] * weights
    out[mask] = weights
    return EvidenceKernel(out, mask)


def row_mass(kernel: EvidenceKernel) -> np.ndarray:
    """Total admissible evidence per row; exactly 0 for fully masked rows."""
    return kernel.values.sum(axis=1)


@dataclass(frozen=True)
class CompositionalityReport:
    passed: bool
    max_violation: float
    witness: tuple[float, float] | None = None


def check_link_compositionality(link: Link, grid, tol: float = 1e-12) -> CompositionalityReport:
    """Admissibility check: the evidence factor must be multiplicative.

    The factor in work coordinates is g(w) = link(-w). For every pair
    (w1, w2) on the grid the violation is
    |g(w1+w2) - g(w1) g(w2)| / (1 + |g(w1) g(w2)|); the report carries
    the worst pair. Exponential-family links pass at rounding level,
    anything else is expected to fail visibly.
    """
    grid = [float(w) for w in grid]
    if not grid:
        raise ValueError("grid must be nonempty")

    def g(w: float) -> float:
        return float(link.evaluate(np.array(-w)))

    worst = 0.0
    witness: tuple[float, float] | None = None
    for w1 in grid:
        for w2 in grid:
            lhs = g(w1 + w2)
            rhs = g(w1) * g(w2)
            violation = abs(lhs - rhs) / (1.0 + abs(rhs))
            if violation > worst:
                worst = violation
                witness = (w1, w2)
    return CompositionalityReport(passed=worst <= tol, max_violation=worst, witness=witness)


def score_from_work(work, mask) -> MaskedScore:
    """Identify scores with negative work: S = -W on the mask."""
    arr = np.asarray(work, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch("work matrix must be 2-d")
    mask = _as_mask(mask, arr.shape)
    return MaskedScore(np.where(mask, -arr, 0.0), mask)
