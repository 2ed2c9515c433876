"""SVD truncation, factor extraction, and the anchored score normal form.

The factorization itself is delegated to LAPACK through numpy, kept
behind a thin contract: singular values sorted nonincreasing, a fixed
column sign convention (largest-magnitude entry of each left singular
vector nonnegative) so output is reproducible, and NoConvergence where
the backend gives up.

extract_qk splits the singular values symmetrically across the two
factors. Any invertible r x r map A moves between equivalent factor
pairs (Q A^T, L A^{-1}) without touching the products q(x) . k(y);
reparameterize_chart performs that move and refuses nearly singular
maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, RankOutOfRange, ShapeMismatch, SingularChartMap
from .gauge import center_scores

_DEGENERATE_REL_TOL = 1e-12


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD with orthonormal columns and sorted singular values."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.U, dtype=np.float64)
        s = np.asarray(self.sigma, dtype=np.float64)
        v = np.asarray(self.V, dtype=np.float64)
        p = s.size
        if u.ndim != 2 or v.ndim != 2 or u.shape[1] != p or v.shape[1] != p:
            raise ShapeMismatch("factor shapes disagree with the singular values")
        if (s < 0).any() or (np.diff(s) > 0).any():
            raise ValueError("singular values must be nonnegative and nonincreasing")
        for name, m in (("U", u), ("V", v)):
            gram = m.T @ m
            if np.abs(gram - np.eye(p)).max() > 1e-10:
                raise ValueError(f"{name} columns are not orthonormal")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "V", v)


def svd(matrix) -> SvdResult:
    """Deterministic thin SVD with the package sign convention."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatch("svd input must be a matrix")
    if not np.isfinite(m).all():
        raise ValueError("svd input must be finite")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    v = vt.T.copy()
    u = u.copy()
    for k in range(s.size):
        lead = int(np.argmax(np.abs(u[:, k])))
        if u[lead, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return SvdResult(u, s, v)


def truncate(matrix, rank: int) -> tuple[np.ndarray, float]:
    """Best rank-r approximation in Frobenius norm plus its residual.

    The residual is measured directly as ||M - M_r||_F; it must agree
    with the tail singular values, and the property tests hold it to
    that.
    """
    m = np.asarray(matrix, dtype=np.float64)
    result = svd(m)
    if not 0 <= rank <= result.sigma.size:
        raise RankOutOfRange(f"rank {rank} not in [0, {result.sigma.size}]")
    approx = (result.U[:, :rank] * result.sigma[:rank]) @ result.V[:, :rank].T
    residual = float(np.linalg.norm(m - approx))
    return approx, residual


def degenerate_truncation(sigma, rank: int) -> bool:
    """True when the kept/dropped boundary falls inside a tied singular
    value, in which case the optimal approximation is not unique."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if rank <= 0 or rank >= sigma.size:
        return False
    scale = float(sigma[0]) if sigma.size else 0.0
    return float(sigma[rank - 1] - sigma[rank]) <= _DEGENERATE_REL_TOL * max(scale, 1e-300)


def extract_qk(matrix, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Split the rank-r SVD symmetrically: Q = U sqrt(S), L = V sqrt(S)."""
    m = np.asarray(matrix, dtype=np.float64)
    result = svd(m)
    if not 0 <= rank <= result.sigma.size:
        raise RankOutOfRange(f"rank {rank} not in [0, {result.sigma.size}]")
    root = np.sqrt(result.sigma[:rank])
    return result.U[:, :rank] * root, result.V[:, :rank] * root


def reparameterize_chart(q, l, a) -> tuple[np.ndarray, np.ndarray]:
    """Move to the equivalent factor pair (Q A^T, L A^{-1}).

    Row pairings are preserved: q'(x) . k'(y) = q(x) . k(y). Maps with
    condition number at or above 1e8 are refused, since the inverse
    would shred the product invariance this transform exists for.
    """
    q = np.asarray(q, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    r = q.shape[1]
    if a.shape != (r, r) or l.shape[1] != r:
        raise ShapeMismatch("chart map must be r x r matching both factors")
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond >= 1e8:
        raise SingularChartMap(f"condition number {cond:.3e} too large")
    return q @ a.T, l @ np.linalg.inv(a)


@dataclass(frozen=True)
class LowRankChart:
    """Rank-r factor pair for an interaction matrix, plus the key bias.

    key_bias is the column field that survives row anchoring; Q and L
    hold the query-side and key-side factors of the double-centered
    interaction.
    """

    Q: np.ndarray
    L: np.ndarray
    rank: int
    frobenius_residual: float
    key_bias: np.ndarray | None = None
    degenerate: bool = False


def score_normal_form(scores, rank: int) -> LowRankChart:
    """Double-center, then factor the interaction at the given rank.

    key_bias(y) + Q[x] . L[y] approximates the row-centered scores with
    Frobenius error equal to the truncation residual.
    """
    decomposition = center_scores(scores, mode="double")
    interaction = decomposition.interaction
    result = svd(interaction)
    if not 0 <= rank <= result.sigma.size:
        raise RankOutOfRange(f"rank {rank} not in [0, {result.sigma.size}]")
    root = np.sqrt(result.sigma[:rank])
    q = result.U[:, :rank] * root
    l = result.V[:, :rank] * root
    residual = float(np.linalg.norm(interaction - q @ l.T))
    return LowRankChart(
        Q=q,
        L=l,
        rank=rank,
        frobenius_residual=residual,
        key_bias=decomposition.key_bias,
        degenerate=degenerate_truncation(result.sigma, rank),
    )
