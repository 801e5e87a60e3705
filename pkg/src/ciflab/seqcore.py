"""Singular-value sequences and their scale-invariant functionals.

This module is the numeric core shared by every probe: validated
nonincreasing sequences mu(0) >= mu(1) >= ... >= 0, the weak quasi-norm
sup (n+1)^(1/p) mu(n), a logarithmic Cesaro mean, exact constructions for
tensor products against the harmonic profile 1/(n+1) and for direct sums,
and the tail-limit estimator that turns a sequence into an estimate of
lim (n+1) mu(n).

Convention used throughout: the reported product column is
(n+1) * mu(n), the right-endpoint sample of t * mu(t) under the usual
step-function identification. It is exact on harmonic profiles and
bounded by the tensor mass, which plain n * mu(n) is not.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidParameterError

__all__ = [
    "SingularValueSeq",
    "AsymptoticsEstimate",
    "mu_from_eigs",
    "pos_neg_split",
    "weak_quasinorm",
    "dixmier_logmean",
    "tensor_mu",
    "direct_sum_mu",
    "limit_estimator",
]

# Hard cap on exact tensor enumeration (len(alpha) * n_max doubles).
_TENSOR_ENUM_CAP = 200_000_000


class SingularValueSeq:
    """A finite, validated, nonincreasing sequence of nonnegative reals."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        v = np.asarray(values, dtype=float)
        if v.ndim != 1:
            raise InvalidParameterError("sequence must be one-dimensional")
        if v.size and not np.all(np.isfinite(v)):
            raise InvalidParameterError("sequence contains non-finite entries")
        if v.size and v[-1] < 0.0:
            raise InvalidParameterError("sequence contains negative entries")
        if v.size > 1 and np.any(np.diff(v) > 0.0):
            raise InvalidParameterError("sequence is not nonincreasing")
        self.values = v

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, n):
        return self.values[n]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SingularValueSeq):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        head = ", ".join(f"{x:.6g}" for x in self.values[:4])
        tail = ", ..." if len(self) > 4 else ""
        return f"SingularValueSeq([{head}{tail}], len={len(self)})"

    def head(self, n: int) -> "SingularValueSeq":
        """First n entries (prefixes of a valid sequence stay valid)."""
        out = SingularValueSeq.__new__(SingularValueSeq)
        out.values = self.values[: max(int(n), 0)].copy()
        return out

    def products(self) -> np.ndarray:
        """(n+1) * mu(n) for every index."""
        return (np.arange(len(self), dtype=float) + 1.0) * self.values

    def to_json(self) -> str:
        """JSON array of the raw values."""
        return json.dumps(list(map(float, self.values)))

    def write_csv(self, path_or_file) -> None:
        """Write rows (n, mu, n_mu) with header n,mu,n_mu.

        The n_mu column holds (n+1)*mu(n); see the module docstring.
        """
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh)
            writer.writerow(["n", "mu", "n_mu"])
            prods = self.products()
            for n, (mu, p) in enumerate(zip(self.values, prods)):
                writer.writerow([n, repr(float(mu)), repr(float(p))])
        finally:
            if own:
                fh.close()

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass(frozen=True)
class AsymptoticsEstimate:
    """Result of fitting (n+1)mu(n) ~ alpha + beta / ln(n+2) over a tail window.

    samples holds the fitted window as rows (n, mu(n), (n+1)mu(n)).
    """

    alpha_hat: float
    beta_hat: float
    window: tuple[int, int]
    residual: float
    samples: np.ndarray
    fallback_mean: bool = False

    @property
    def n_points(self) -> int:
        return int(self.samples.shape[0])

    def as_dict(self) -> dict:
        """Summary without the sample table (which can run to 10^4 rows)."""
        return {
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "window": list(self.window),
            "residual": self.residual,
            "n_points": self.n_points,
            "fallback_mean": self.fallback_mean,
        }


def mu_from_eigs(eigs) -> SingularValueSeq:
    """Singular values of a Hermitian spectrum: |eigenvalues| sorted descending."""
    e = np.asarray(eigs, dtype=float)
    if e.size and not np.all(np.isfinite(e)):
        raise InvalidParameterError("eigenvalues contain non-finite entries")
    out = SingularValueSeq.__new__(SingularValueSeq)
    out.values = np.sort(np.abs(e.ravel()))[::-1]
    return out


def pos_neg_split(eigs) -> tuple[SingularValueSeq, SingularValueSeq]:
    """Split a Hermitian spectrum into (positive part, negative part).

    Both parts come back as descending sequences of magnitudes; exact
    zeros belong to neither part.
    """
    e = np.asarray(eigs, dtype=float).ravel()
    if e.size and not np.all(np.isfinite(e)):
        raise InvalidParameterError("eigenvalues contain non-finite entries")
    pos = SingularValueSeq.__new__(SingularValueSeq)
    pos.values = np.sort(e[e > 0.0])[::-1]
    neg = SingularValueSeq.__new__(SingularValueSeq)
    neg.values = np.sort(-e[e < 0.0])[::-1]
    return pos, neg


def weak_quasinorm(seq: SingularValueSeq, p: float) -> float:
    """sup over n of (n+1)^(1/p) * mu(n); 0 for the empty sequence."""
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p > 0):
        raise InvalidParameterError(f"p must be a positive real, got {p!r}")
    v = seq.values
    if v.size == 0:
        return 0.0
    n = np.arange(v.size, dtype=float) + 1.0
    return float(np.max(n ** (1.0 / p) * v))


def dixmier_logmean(seq: SingularValueSeq, N: int) -> float:
    """Logarithmic Cesaro mean (1/ln N) * sum_{n<N} mu(n).

    Slowly convergent cross-check for the tail-limit estimate; never used
    as a verdict input.
    """
    N = int(N)
    if not (2 <= N <= len(seq)):
        raise ContractViolationError(f"need 2 <= N <= len(seq), got N={N}, len={len(seq)}")
    return float(np.sum(seq.values[:N]) / math.log(N))


def tensor_mu(alpha, n_max: int) -> SingularValueSeq:
    """First n_max singular values of the tensor product of diag(alpha) with
    the harmonic profile 1/(n+1).

    Exact enumerate-and-sort of {alpha_j / (n+1)}: no stream can contribute
    more than n_max of the top n_max values, so per-stream enumeration up to
    n_max is lossless.
    """
    a = np.asarray(alpha, dtype=float).ravel()
    n_max = int(n_max)
    if a.size == 0:
        raise InvalidParameterError("alpha must be nonempty")
    if not np.all(np.isfinite(a)) or np.any(a < 0.0):
        raise InvalidParameterError("alpha must be finite and nonnegative")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    if a.size * n_max > _TENSOR_ENUM_CAP:
        raise InvalidParameterError("tensor enumeration too large; reduce n_max or alpha")
    denom = np.arange(1, n_max + 1, dtype=float)
    vals = np.concatenate([aj / denom for aj in a])
    vals = np.sort(vals)[::-1][:n_max]
    out = SingularValueSeq.__new__(SingularValueSeq)
    out.values = vals
    return out


def direct_sum_mu(seqs) -> SingularValueSeq:
    """Merge the singular values of a finite family of operators: sorted concat."""
    arrays = [s.values if isinstance(s, SingularValueSeq) else np.asarray(s, float) for s in seqs]
    if not arrays:
        out = SingularValueSeq.__new__(SingularValueSeq)
        out.values = np.empty(0)
        return out
    merged = np.sort(np.concatenate(arrays))[::-1]
    return SingularValueSeq(merged)


def limit_estimator(seq: SingularValueSeq) -> AsymptoticsEstimate:
    """Estimate lim (n+1)mu(n) from the tail of a sequence.

    Least-squares fit of y = alpha + beta * x over the window
    [len/2, len-10), with y = (n+1)mu(n) and x = 1/ln(n+2); the last ten
    indices are excluded because the very end of any finite spectrum is
    untrustworthy. Falls back to the plain window mean when the regressor
    is numerically constant. alpha_hat is clamped at 0.
    """
    length = len(seq)
    if length < 64:
        raise ContractViolationError(f"limit_estimator needs len >= 64, got {length}")
    lo, hi = length // 2, length - 10
    idx = np.arange(lo, hi, dtype=float)
    mu = seq.values[lo:hi]
    y = (idx + 1.0) * mu
    x = 1.0 / np.log(idx + 2.0)
    samples = np.column_stack([idx, mu, y])
    spread = float(x.max() - x.min())
    if spread < 1e-6:
        alpha = float(np.mean(y))
        resid = float(np.sqrt(np.mean((y - alpha) ** 2)))
        return AsymptoticsEstimate(max(alpha, 0.0), 0.0, (lo, hi), resid, samples, True)
    beta, alpha = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (alpha + beta * x)) ** 2)))
    return AsymptoticsEstimate(max(float(alpha), 0.0), float(beta), (lo, hi), resid, samples, False)
