"""Anchoring rules that turn an evidence kernel into a canonical object.

Two families are implemented. Row anchoring normalizes each row of the
kernel into a conditional distribution (the softmax route). Transport
anchoring fits a nonnegative coupling to marginal data by Sinkhorn
scaling, either with hard marginal constraints (balanced) or with KL
penalties on the marginals (unbalanced). Both solvers run in the log
domain so kernels with dynamic range well past 1e12 still scale
cleanly.

The generalized KL divergence both anchors optimize is also here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCol, EmptyRow, Infeasible, ShapeMismatch, ZeroMarginal
from .score import EvidenceKernel, _as_mask, _as_matrix


def _as_positive_vector(values, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1 or arr.size != n:
        raise ShapeMismatch(f"{name} must be a vector of length {n}")
    if not np.isfinite(arr).all() or (arr <= 0).any():
        raise ValueError(f"{name} entries must be finite and strictly positive")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ConditionalFamily:
    """Row-stochastic family supported on the mask.

    Rows whose mask is empty are identically zero; every other row sums
    to 1 within 1e-12.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "conditional values")
        mask = _as_mask(self.mask, values.shape)
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("conditional values must be finite and nonnegative")
        if (values[~mask] != 0).any():
            raise ValueError("conditional values must vanish off the mask")
        sums = values.sum(axis=1)
        nonempty = mask.any(axis=1)
        if (np.abs(sums[nonempty] - 1.0) > 1e-12).any():
            worst = int(np.argmax(np.abs(sums - 1.0) * nonempty))
            raise ValueError(
                f"row {worst} sums to {sums[worst]!r}, not 1 within 1e-12"
            )
        if (sums[~nonempty] != 0).any():
            raise ValueError("rows with empty mask must be zero")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Marginals:
    """Target row and column masses, all strictly positive."""

    mu_out: np.ndarray
    mu_in: np.ndarray

    def __post_init__(self):
        mu_out = np.array(self.mu_out, dtype=np.float64, copy=True)
        mu_in = np.array(self.mu_in, dtype=np.float64, copy=True)
        for name, arr in (("mu_out", mu_out), ("mu_in", mu_in)):
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{name} must be a nonempty vector")
            if not np.isfinite(arr).all() or (arr <= 0).any():
                raise ValueError(f"{name} entries must be finite and strictly positive")
            arr.setflags(write=False)
        object.__setattr__(self, "mu_out", mu_out)
        object.__setattr__(self, "mu_in", mu_in)

    def matched(self, rel_tol: float = 1e-9) -> bool:
        total_out = float(self.mu_out.sum())
        total_in = float(self.mu_in.sum())
        return abs(total_out - total_in) <= rel_tol * total_out


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative coupling with its achieved marginals and solver state."""

    values: np.ndarray
    mask: np.ndarray
    converged: bool
    iterations: int
    marginal_error: float = 0.0
    row_marginal: np.ndarray = field(init=False)
    col_marginal: np.ndarray = field(init=False)

    def __post_init__(self):
        values = _as_matrix(self.values, "plan values")
        mask = _as_mask(self.mask, values.shape)
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("plan values must be finite and nonnegative")
        if (values[~mask] != 0).any():
            raise ValueError("plan places mass off the mask")
        row_marginal = values.sum(axis=1)
        col_marginal = values.sum(axis=0)
        row_marginal.setflags(write=False)
        col_marginal.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "row_marginal", row_marginal)
        object.__setattr__(self, "col_marginal", col_marginal)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def row_anchor(kernel: EvidenceKernel) -> ConditionalFamily:
    """Normalize each kernel row into a conditional distribution.

    Fails hard on rows with no admissible evidence; there is no fallback
    distribution.
    """
    mass = kernel.values.sum(axis=1)
    empty = np.flatnonzero(mass == 0)
    if empty.size:
        raise EmptyRow(int(empty[0]))
    return ConditionalFamily(kernel.values / mass[:, None], kernel.mask)


def generalized_kl(a, b) -> float:
    """Sum of a*log(a/b) - a + b over all entries of nonnegative arrays.

    Uses the conventions 0*log(0/b) = 0 and KL = +inf as soon as some
    entry has a > 0 with b = 0. Infinity is an in-band return value,
    not an error.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} disagree")
    if (a < 0).any() or (b < 0).any():
        raise ValueError("generalized KL is defined for nonnegative arrays")
    pos = a > 0
    if (b[pos] == 0).any():
        return math.inf
    total = float(np.sum(b - a))
    total += float(np.sum(a[pos] * np.log(a[pos] / b[pos])))
    return total


def _log_kernel(kernel: EvidenceKernel) -> np.ndarray:
    out = np.full(kernel.shape, -np.inf)
    m = kernel.mask
    out[m] = np.log(kernel.values[m])
    return out


def _lse_rows(log_m: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp that tolerates -inf entries (empty rows ->
    -inf)."""
    peak = log_m.max(axis=1)
    out = np.full(log_m.shape[0], -np.inf)
    finite = np.isfinite(peak)
    if finite.any():
        shifted = np.exp(log_m[finite] - peak[finite][:, None])
        out[finite] = peak[finite] + np.log(shifted.sum(axis=1))
    return out


def sinkhorn_balanced(
    kernel: EvidenceKernel,
    marginals: Marginals,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> TransportPlan:
    """Fit Pi = diag(a) K diag(b) to both marginals exactly (up to tol).

    Convergence is measured as the L1 error of the achieved marginals
    against the targets. Infeasible masks are diagnosed when that error
    stalls: no improvement by factor 0.999 over 100 consecutive
    iterations.
    """
    n_x, n_y = kernel.shape
    mu_out = _as_positive_vector(marginals.mu_out, n_x, "mu_out")
    mu_in = _as_positive_vector(marginals.mu_in, n_y, "mu_in")
    if not marginals.matched():
        raise Infeasible(
            f"total masses differ: {mu_out.sum()} vs {mu_in.sum()}"
        )
    empty_rows = np.flatnonzero(~kernel.mask.any(axis=1))
    if empty_rows.size:
        raise EmptyRow(int(empty_rows[0]), "masked-out row cannot carry positive marginal")
    empty_cols = np.flatnonzero(~kernel.mask.any(axis=0))
    if empty_cols.size:
        raise EmptyCol(int(empty_cols[0]), "masked-out column cannot carry positive marginal")

    log_k = _log_kernel(kernel)
    log_mu_out = np.log(mu_out)
    log_mu_in = np.log(mu_in)
    f = np.zeros(n_x)
    g = np.zeros(n_y)

    best_error = math.inf
    stalled = 0
    error = math.inf
    iterations = 0
    plan = np.exp(log_k)
    for iterations in range(1, max_iter + 1):
        f = log_mu_out - _lse_rows(log_k + g[None, :])
        g = log_mu_in - _lse_rows((log_k + f[:, None]).T)
        plan = np.exp(f[:, None] + log_k + g[None, :])
        error = float(
            np.abs(plan.sum(axis=1) - mu_out).sum()
            + np.abs(plan.sum(axis=0) - mu_in).sum()
        )
        if error <= tol:
            break
        # Stall detection doubles as the infeasibility diagnosis: a mask
        # that admits no coupling leaves the marginal error bounded away
        # from zero while the scalings drift.
        if error <= 0.999 * best_error:
            best_error = error
            stalled = 0
        else:
            stalled += 1
            if stalled >= 100:
                raise Infeasible(
                    f"marginal error stalled at {error:.3e} after {iterations} iterations"
                )
    return TransportPlan(
        plan,
        kernel.mask,
        converged=error <= tol,
        iterations=iterations,
        marginal_error=error,
    )


def sinkhorn_unbalanced(
    kernel: EvidenceKernel,
    marginals: Marginals,
    lam_out: float,
    lam_in: float,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> TransportPlan:
    """KL-penalized transport anchor via damped Sinkhorn scaling.

    The damped updates
        a <- (mu_out / (K b)) ** (lam_out / (lam_out + 1))
        b <- (mu_in / (K^T a)) ** (lam_in / (lam_in + 1))
    run in the log domain until the scaling vectors move less than tol
    in the max norm. On iteration exhaustion the best iterate is
    returned with converged=False rather than raising.
    """
    if not (lam_out > 0 and lam_in > 0):
        raise ValueError("marginal penalties must be strictly positive")
    n_x, n_y = kernel.shape
    mu_out = _as_positive_vector(marginals.mu_out, n_x, "mu_out")
    mu_in = _as_positive_vector(marginals.mu_in, n_y, "mu_in")
    if not kernel.mask.any():
        raise ValueError("kernel mask is empty; nothing to anchor")

    frac_out = lam_out / (lam_out + 1.0)
    frac_in = lam_in / (lam_in + 1.0)
    log_k = _log_kernel(kernel)
    log_mu_out = np.log(mu_out)
    log_mu_in = np.log(mu_in)
    rows_live = kernel.mask.any(axis=1)
    cols_live = kernel.mask.any(axis=0)

    f = np.zeros(n_x)
    g = np.zeros(n_y)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        f_new = frac_out * (log_mu_out - _lse_rows(log_k + g[None, :]))
        f_new[~rows_live] = 0.0  # dead rows carry no mass either way
        g_new = frac_in * (log_mu_in - _lse_rows((log_k + f_new[:, None]).T))
        g_new[~cols_live] = 0.0
        step = max(
            float(np.abs(f_new - f).max()), float(np.abs(g_new - g).max())
        )
        f, g = f_new, g_new
        if step <= tol:
            converged = True
            break
    plan = np.exp(f[:, None] + log_k + g[None, :])
    error = float(
        np.abs(plan.sum(axis=1) - mu_out).sum()
        + np.abs(plan.sum(axis=0) - mu_in).sum()
    )
    return TransportPlan(
        plan,
        kernel.mask,
        converged=converged,
        iterations=iterations,
        marginal_error=error,
    )


def unbalanced_objective(
    plan_values, kernel: EvidenceKernel, marginals: Marginals, lam_out: float, lam_in: float
) -> float:
    """KL(plan||K) + lam_out KL(row marginal||mu_out) + lam_in KL(col
    marginal||mu_in); the quantity the unbalanced anchor minimizes."""
    plan_values = np.asarray(plan_values, dtype=np.float64)
    return (
        generalized_kl(plan_values, kernel.values)
        + lam_out * generalized_kl(plan_values.sum(axis=1), marginals.mu_out)
        + lam_in * generalized_kl(plan_values.sum(axis=0), marginals.mu_in)
    )


def plan_to_conditional(plan: TransportPlan, mu_out) -> ConditionalFamily:
    """Divide each plan row by its outgoing mass.

    mu_out must be consistent with the plan's achieved row marginal
    (pass plan.row_marginal unless you know better); otherwise the
    row-stochastic invariant fails at construction.
    """
    mu_out = np.asarray(mu_out, dtype=np.float64)
    if mu_out.shape != (plan.shape[0],):
        raise ShapeMismatch(f"mu_out must have length {plan.shape[0]}")
    bad = np.flatnonzero(~(mu_out > 0))
    if bad.size:
        raise ZeroMarginal(int(bad[0]))
    return ConditionalFamily(plan.values / mu_out[:, None], plan.mask)
