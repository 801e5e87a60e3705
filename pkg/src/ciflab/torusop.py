"""Finite Fourier-lattice truncations of multiplication and weight operators.

The lattice basis collects all integer frequencies inside a Euclidean ball
and orders them by |k|^2 then lexicographically, so the basis for a smaller
cutoff is always a prefix of the basis for a larger one. On that basis the
multiplication operator by f has entries c_f(k - l) (Fourier coefficients),
and the smoothing weight is the diagonal w(k) = (1 + |k|^2)^(-d/4). The
builders assemble the weighted products used throughout:

    symmetric      w(k) * c_f(k-l) * w(l)
    asymmetric     c_f(k-l) * (1 + |l|^2)^(-e)   (default e = d/2)
    commutator     c_f(k-l) * (w(l) - w(k))
    multiplication c_f(k-l)

Coefficients come from a closed form when the function family has one and
from an oversampled midpoint FFT otherwise; the capped radial singularity
additionally gets a dyadic near-origin correction, since a uniform grid
cannot see mass concentrating at scales below its spacing.

Eigenvalues of Hermitian operators are computed through a sign-canonical
wrapper, which makes the spectra of A and -A exact negations of each other
bit for bit. Negating f negates every assembled entry exactly, so whole
reports for f and -f are mirror images, a property the verdict layer relies
on.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from .errors import (
    BuildFailureError,
    ContractViolationError,
    InvalidFunctionError,
    InvalidParameterError,
)
from .orlicz import TorusFunction
from .seqcore import SingularValueSeq, mu_from_eigs

__all__ = [
    "LatticeBasis",
    "FourierTable",
    "TruncatedOperator",
    "fourier_coeffs",
    "build_multiplication",
    "build_symmetric",
    "build_asymmetric",
    "build_commutator",
    "eig_hermitian",
    "singvals",
    "hs_norm",
    "save_matrix",
    "load_matrix",
    "spectrum_csv",
]

_TWO_PI = 2.0 * math.pi

# Near-origin correction geometry for the capped radial family.
_BLOCK_CELLS = 16
_RING_LEVELS = 12
_RING_RES = 32

# Non-Hermitian matrices at and above this size take the Gram route to
# singular values (eigvalsh of A*A is several times faster than full SVD).
_GRAM_CUTOFF = 1024


class LatticeBasis:
    """All k in Z^d with |k| <= cutoff, ordered by |k|^2 then lexicographically."""

    def __init__(self, d: int, cutoff: float):
        d = int(d)
        if d not in (1, 2, 3):
            raise InvalidParameterError(f"dimension must be 1, 2 or 3, got {d}")
        cutoff = float(cutoff)
        if cutoff < 0 or not math.isfinite(cutoff):
            raise InvalidParameterError(f"cutoff must be a finite nonnegative real, got {cutoff}")
        self.d = d
        self.cutoff = cutoff
        m = int(math.floor(cutoff))
        axes = [np.arange(-m, m + 1)] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([g.ravel() for g in mesh])
        norms = np.sum(pts * pts, axis=1)
        keep = norms <= cutoff * cutoff
        pts, norms = pts[keep], norms[keep]
        order = np.lexsort(tuple(pts[:, a] for a in reversed(range(d))) + (norms,))
        self.points = pts[order]
        self.norms_sq = norms[order].astype(float)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.size

    def weights(self, exponent: float) -> np.ndarray:
        """(1 + |k|^2)^(-exponent) along the basis order."""
        return (1.0 + self.norms_sq) ** (-float(exponent))

    def prefix_count(self, cutoff: float) -> int:
        """How many leading basis points lie inside the smaller ball."""
        cutoff = float(cutoff)
        if cutoff > self.cutoff:
            raise InvalidParameterError("prefix cutoff exceeds basis cutoff")
        return int(np.searchsorted(self.norms_sq, cutoff * cutoff, side="right"))

    def max_abs_freq(self) -> int:
        return int(np.max(np.abs(self.points))) if self.size else 0


class FourierTable:
    """Fourier coefficients c(m) on the window max|m_a| <= max_freq."""

    def __init__(self, d: int, max_freq: int, table: np.ndarray, source: str):
        self.d = d
        self.max_freq = max_freq
        self.table = table
        self.source = source

    def get(self, m) -> complex:
        m = np.atleast_1d(np.asarray(m, dtype=int))
        if m.shape != (self.d,):
            raise InvalidParameterError(f"frequency {m} does not match dimension {self.d}")
        if np.any(np.abs(m) > self.max_freq):
            raise InvalidParameterError(f"frequency {tuple(m)} outside table window")
        return complex(self.table[tuple(m + self.max_freq)])

    __getitem__ = get


def _dyadic_ring_cover(W: float, levels: int, ring_res: int):
    """Midpoint points/weights tiling [-W, W]^2 minus the innermost square.

    Each level meshes [-W/2^j, W/2^j]^2 at ring_res per axis and keeps the
    cells outside the next (half-width) square; ring_res divisible by 4
    keeps all boundaries on mesh lines, so the tiling is exact.
    """
    pts, wts = [], []
    for level in range(levels):
        outer = W / 2.0 ** level
        cell = 2.0 * outer / ring_res
        ax = -outer + (np.arange(ring_res) + 0.5) * cell
        ri, rj = np.meshgrid(ax, ax, indexing="ij")
        span = ring_res // 4
        lo, hi = ring_res // 2 - span, ring_res // 2 + span
        mask = np.ones((ring_res, ring_res), dtype=bool)
        mask[lo:hi, lo:hi] = False
        pts.append(np.column_stack([ri[mask], rj[mask]]))
        wts.append(np.full(int(mask.sum()), cell * cell))
    return np.concatenate(pts), np.concatenate(wts)


def _spike_table_correction(f: TorusFunction, max_freq: int, G: int) -> np.ndarray:
    """Replace the coarse near-origin cells by a dyadic fine rule.

    Returns the additive correction to the raw FFT table: fine-rule value
    of the central block integral minus the coarse-cell value, including a
    closed form for the innermost square where even the fine mesh gives up.
    Only the unit-exponent radial family in d = 2 is supported; for it the
    helper relies on the integral of 1/|x| over [-s, s]^2 being
    8 * s * asinh(1).
    """
    cap = float(f.params["cap"])
    h = _TWO_PI / G
    B = min(_BLOCK_CELLS, G // 4)
    W = B * h
    m = np.arange(-max_freq, max_freq + 1)

    # coarse contribution of the central 2B x 2B cells, separable form
    jidx = np.arange(G // 2 - B, G // 2 + B)
    centers = -math.pi + (jidx + 0.5) * h
    ci, cj = np.meshgrid(centers, centers, indexing="ij")
    fblock = f.evaluate(np.column_stack([ci.ravel(), cj.ravel()])).reshape(2 * B, 2 * B)
    E = np.exp(-1j * np.outer(m, centers))
    coarse = (E @ fblock @ E.T) * (h * h) / _TWO_PI**2

    # fine contribution: dyadic rings down to s = W / 2^levels
    pts, wts = _dyadic_ring_cover(W, _RING_LEVELS, _RING_RES)
    fvals = f.evaluate(pts)
    E1 = np.exp(-1j * np.outer(m, pts[:, 0]))
    E2 = np.exp(-1j * np.outer(m, pts[:, 1]))
    fine = ((E1 * (wts * fvals)) @ E2.T) / _TWO_PI**2

    # innermost square: closed form when the cap radius sits inside it,
    # otherwise f is capped (bounded) there and a plain mesh suffices
    s = W / 2.0 ** _RING_LEVELS
    if cap * s >= 1.0:
        inner_mass = 8.0 * s * math.asinh(1.0) - math.pi / cap
        fine += inner_mass / _TWO_PI**2
    else:
        cell = 2.0 * s / _RING_RES
        ax = -s + (np.arange(_RING_RES) + 0.5) * cell
        ii, jj = np.meshgrid(ax, ax, indexing="ij")
        ipts = np.column_stack([ii.ravel(), jj.ravel()])
        ivals = f.evaluate(ipts)
        iE1 = np.exp(-1j * np.outer(m, ipts[:, 0]))
        iE2 = np.exp(-1j * np.outer(m, ipts[:, 1]))
        fine += ((iE1 * (cell * cell * ivals)) @ iE2.T) / _TWO_PI**2

    return fine - coarse


def fourier_coeffs(f: TorusFunction, max_freq: int, oversample: int = 4) -> FourierTable:
    """Coefficients c(m) = (2*pi)^-d * integral of f(x) e^{-i m.x} over the window.

    Uses the family's closed form when present; otherwise a midpoint FFT on
    oversample*(2*max_freq+1) points per axis, with the half-cell phase
    factored out. The convention is f(x) = sum over m of c(m) e^{i m.x}.
    """
    max_freq = int(max_freq)
    if max_freq < 1:
        raise InvalidParameterError(f"max_freq must be >= 1, got {max_freq}")
    oversample = int(oversample)
    if oversample < 2:
        raise InvalidParameterError(f"oversample must be >= 2, got {oversample}")

    width = 2 * max_freq + 1
    if f.exact_fourier is not None:
        table = np.empty((width,) * f.d, dtype=complex)
        rng = range(-max_freq, max_freq + 1)
        for idx in np.ndindex(*table.shape):
            mvec = tuple(rng[i] for i in idx)
            table[idx] = f.exact_fourier(mvec if f.d > 1 else mvec[0])
        return FourierTable(f.d, max_freq, table, "exact")

    G = oversample * width
    samples = f.sample(G)
    if not np.all(np.isfinite(samples)):
        raise InvalidFunctionError(f"{f.family} produced non-finite samples")
    F = np.fft.fftn(samples)
    idx = np.arange(-max_freq, max_freq + 1) % G
    window = F[np.ix_(*([idx] * f.d))] / float(G) ** f.d
    h = _TWO_PI / G
    phase_axis = np.exp(-1j * np.arange(-max_freq, max_freq + 1) * (-math.pi + h / 2.0))
    for a in range(f.d):
        shape = [1] * f.d
        shape[a] = width
        window = window * phase_axis.reshape(shape)

    if f.family == "radial_logspike" and f.d == 2 and f.params.get("exponent") == 1.0:
        window = window + _spike_table_correction(f, max_freq, G)
    return FourierTable(f.d, max_freq, window, f"fft-x{oversample}")


class TruncatedOperator:
    """A dense matrix over a lattice basis, tagged by how it was built."""

    def __init__(self, basis, entries, kind, f_descriptor=None):
        self.basis = basis
        self.entries = np.asarray(entries)
        self.kind = kind
        self.f_descriptor = f_descriptor

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def __repr__(self) -> str:
        return f"TruncatedOperator(kind={self.kind}, dim={self.entries.shape})"


def _descriptor(f: TorusFunction) -> dict:
    return {"family": f.family, "d": f.d, "params": dict(f.params)}


def _coefficient_matrix(f, basis, table, oversample):
    needed = 2 * basis.max_abs_freq()
    if table is None:
        table = fourier_coeffs(f, max(needed, 1), oversample=oversample)
    elif table.max_freq < needed:
        raise InvalidParameterError(
            f"table window {table.max_freq} too small for basis (needs {needed})")
    pts = basis.points
    off = table.max_freq
    T = table.table
    n = basis.size
    A = np.empty((n, n), dtype=complex)
    for i in range(n):
        diff = pts[i] - pts + off
        A[i] = T[tuple(diff[:, a] for a in range(basis.d))]
    return A


def _check_hermitian(A: np.ndarray, what: str, tol: float = 1e-10) -> None:
    scale = float(np.max(np.abs(A))) or 1.0
    defect = float(np.max(np.abs(A - A.conj().T)))
    if defect > tol * scale:
        raise BuildFailureError(f"{what}: Hermiticity defect {defect:.3e} exceeds {tol:.0e} * {scale:.3e}")


def build_multiplication(f: TorusFunction, basis: LatticeBasis, *,
                         table: FourierTable = None, oversample: int = 4) -> TruncatedOperator:
    """Matrix of multiplication by f: entry (k, l) = c_f(k - l)."""
    A = _coefficient_matrix(f, basis, table, oversample)
    return TruncatedOperator(basis, A, "multiplication", _descriptor(f))


def build_symmetric(f: TorusFunction, basis: LatticeBasis, *,
                    table: FourierTable = None, oversample: int = 4) -> TruncatedOperator:
    """Weighted symmetric form: entry (k, l) = w(k) c_f(k-l) w(l)."""
    if not f.is_real:
        raise ContractViolationError("symmetric build requires a real-valued function")
    A = _coefficient_matrix(f, basis, table, oversample)
    w = basis.weights(basis.d / 4.0)
    A *= w[:, None]
    A *= w[None, :]
    _check_hermitian(A, "build_symmetric")
    return TruncatedOperator(basis, A, "symmetric", _descriptor(f))


def build_asymmetric(f: TorusFunction, basis: LatticeBasis, *, weight_exponent: float = None,
                     table: FourierTable = None, oversample: int = 4) -> TruncatedOperator:
    """One-sided form: entry (k, l) = c_f(k-l) (1+|l|^2)^(-e), default e = d/2."""
    if weight_exponent is None:
        weight_exponent = basis.d / 2.0
    A = _coefficient_matrix(f, basis, table, oversample)
    A *= basis.weights(weight_exponent)[None, :]
    return TruncatedOperator(basis, A, "asymmetric", _descriptor(f))


def build_commutator(f: TorusFunction, basis: LatticeBasis, *,
                     table: FourierTable = None, oversample: int = 4) -> TruncatedOperator:
    """Commutator with the weight: entry (k, l) = c_f(k-l) (w(l) - w(k))."""
    A = _coefficient_matrix(f, basis, table, oversample)
    w = basis.weights(basis.d / 4.0)
    A *= w[None, :] - w[:, None]
    if f.is_real:
        # skew-Hermitian by construction; a breach means bad coefficients
        scale = float(np.max(np.abs(A))) or 1.0
        defect = float(np.max(np.abs(A + A.conj().T)))
        if defect > 1e-10 * scale:
            raise BuildFailureError(f"commutator skew defect {defect:.3e}")
    return TruncatedOperator(basis, A, "commutator", _descriptor(f))


def _entries_of(op) -> np.ndarray:
    return op.entries if isinstance(op, TruncatedOperator) else np.asarray(op)


def _canonical_sign(A: np.ndarray) -> float:
    """+1 or -1, flipping with A, so that sign*A is identical for A and -A."""
    flat = A.ravel()
    if flat.size == 0:
        return 1.0
    pivot = flat[int(np.argmax(np.abs(flat)))]
    re, im = float(np.real(pivot)), float(np.imag(pivot))
    if re != 0.0:
        return 1.0 if re > 0 else -1.0
    if im != 0.0:
        return 1.0 if im > 0 else -1.0
    return 1.0


def eig_hermitian(op) -> np.ndarray:
    """All eigenvalues of a Hermitian operator, sorted descending.

    The matrix is normalized by a canonical sign before the solve, so the
    spectra of A and -A come out as exact bitwise negations: pipelines that
    compare a function against its negation see a perfect swap instead of
    solver-level noise.
    """
    A = _entries_of(op)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolationError("eig_hermitian needs a square matrix")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if A.size and float(np.max(np.abs(A - A.conj().T))) > 1e-10 * max(scale, 1e-300):
        raise ContractViolationError("matrix is not Hermitian within 1e-10")
    if np.iscomplexobj(A) and not np.any(A.imag):
        A = A.real  # real symmetric solver is several times faster
    s = _canonical_sign(A)
    vals = s * np.linalg.eigvalsh(s * A)
    return np.sort(vals)[::-1]


def singvals(op) -> SingularValueSeq:
    """Singular values, nonincreasing.

    Hermitian input goes through the canonical eigensolve (absolute values
    of eigenvalues); skew-Hermitian input is rotated by i to the Hermitian
    case; anything else takes an SVD, or the Gram route above the size
    cutoff where eigvalsh of A*A is markedly cheaper than a full SVD.
    """
    A = _entries_of(op)
    if A.ndim != 2:
        raise InvalidParameterError("singvals needs a matrix")
    if A.size == 0:
        return SingularValueSeq([])
    scale = max(float(np.max(np.abs(A))), 1e-300)
    if A.shape[0] == A.shape[1]:
        if float(np.max(np.abs(A - A.conj().T))) <= 1e-10 * scale:
            return mu_from_eigs(eig_hermitian(A))
        if float(np.max(np.abs(A + A.conj().T))) <= 1e-10 * scale:
            return mu_from_eigs(eig_hermitian(1j * A))
    if min(A.shape) >= _GRAM_CUTOFF:
        gram = A.conj().T @ A
        ev = np.linalg.eigvalsh(gram)
        return SingularValueSeq(np.sqrt(np.clip(ev, 0.0, None))[::-1])
    return SingularValueSeq(np.linalg.svd(A, compute_uv=False))


def hs_norm(op) -> float:
    """Frobenius norm of the entries (l2 norm of the singular values)."""
    return float(np.linalg.norm(_entries_of(op)))


# ---------------------------------------------------------------------------
# export


def save_matrix(op, path) -> None:
    """Binary container: two uint64 little-endian dims, then row-major complex128."""
    A = np.ascontiguousarray(_entries_of(op), dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", A.shape[0], A.shape[1]))
        fh.write(A.tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise InvalidParameterError(f"{path}: truncated header")
        rows, cols = struct.unpack("<QQ", header)
        payload = fh.read()
    if len(payload) != rows * cols * 16:
        raise InvalidParameterError(
            f"{path}: expected {rows * cols * 16} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.complex128).reshape(rows, cols).copy()


def spectrum_csv(seq: SingularValueSeq, path_or_file) -> None:
    """Spectrum dump with header rank,singular_value."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        fh.write("rank,singular_value\n")
        for rank, value in enumerate(seq.values):
            fh.write(f"{rank},{float(value)!r}\n")
    finally:
        if own:
            fh.close()
