"""Ulam discretisation of the transfer operator and its spectrum.

Column ``l`` of the matrix is the image of the normalised indicator of
source bin ``l``: ``M[k, l] = |I_l ∩ U^{-1}(I_k) ∩ (-beta, beta]| / |I_l|``.
The preimages are exact: each inverse branch ``h_j`` is an increasing
Moebius map, so ``h_j((a, b]) = (h_j(a), h_j(b)]``.
"""
from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import digamma

from . import kernels
from .errors import ConvergenceError, ParameterError
from .gaussmap import MapParams

DENSE_LIMIT = 4096
POWER_MAXITER = 100_000
POWER_TOL = 1e-12
_EPS = np.finfo(float).eps


def default_cutoff(n_bins: int, params: MapParams) -> int:
    """Smallest cutoff (at least 200) whose omitted branches sit in the bins at 0."""
    w = 2.0 * params.p / n_bins
    need = params.beta / w if n_bins % 2 == 0 else 2.0 * params.beta / w
    return max(200, int(math.ceil((need - 1.0) / 2.0)) + 1)


@dataclass
class UlamMatrix:
    """Sub-stochastic Ulam matrix (column action, densities as columns)."""

    params: MapParams
    n_bins: int
    J: int
    entries: sp.csr_matrix
    tail_mass_bound: float
    tail_lumped: bool = field(default=False)

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.entries.sum(axis=0)).ravel()

    @property
    def edges(self) -> np.ndarray:
        p = self.params.p
        return -p + np.arange(self.n_bins + 1) * (2.0 * p / self.n_bins)

    # -- serialisation --------------------------------------------------
    _MAGIC = b"HUPULAM1"
    _HEADER = struct.Struct("<qdqqd")

    def to_bytes(self) -> bytes:
        """Binary form: magic, little-endian header, row-major float64 entries."""
        head = self._HEADER.pack(self.params.p, self.params.beta, self.n_bins,
                                 self.J, self.tail_mass_bound)
        body = np.ascontiguousarray(self.dense(), dtype="<f8").tobytes()
        return self._MAGIC + head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "UlamMatrix":
        if data[:8] != cls._MAGIC:
            raise ValueError("not an Ulam matrix file (bad magic)")
        p, beta, n, J, tail = cls._HEADER.unpack_from(data, 8)
        off = 8 + cls._HEADER.size
        dense = np.frombuffer(data, dtype="<f8", count=n * n, offset=off).reshape(n, n)
        return cls(MapParams(p, beta), n, J, sp.csr_matrix(dense), tail)

    def to_csv(self) -> str:
        """CSV form: header row, parameter row, then ``n_bins`` entry rows."""
        buf = io.StringIO()
        buf.write("p,beta,n_bins,J,tail_mass_bound\n")
        buf.write(f"{self.params.p},{self.params.beta:.17g},{self.n_bins},{self.J},"
                  f"{self.tail_mass_bound:.17g}\n")
        for row in self.dense():
            buf.write(",".join(f"{v:.17g}" for v in row))
            buf.write("\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "UlamMatrix":
        lines = text.strip().splitlines()
        if lines[0].strip() != "p,beta,n_bins,J,tail_mass_bound":
            raise ValueError("unexpected Ulam CSV header")
        p, beta, n, J, tail = lines[1].split(",")
        n = int(n)
        dense = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:2 + n]])
        return cls(MapParams(int(p), float(beta)), n, int(J), sp.csr_matrix(dense), float(tail))


def _lump_tail(n, params, J):
    """Exact contribution of branches ``|j| > J`` when they sit in the bins at 0.

    Returns ``(rows, cols, vals)`` or ``None`` when the omitted branch
    region straddles a bin edge other than 0.
    """
    p, beta = params.p, params.beta
    w = 2.0 * p / n
    r = beta / (2 * J + 1)
    if n % 2 == 0:
        ok = r <= w
        pos_bin, neg_bin = n // 2, n // 2 - 1
    else:
        ok = r <= w / 2.0
        pos_bin = neg_bin = n // 2
    if not ok:
        return None
    a = -p + np.arange(n) * w
    b = a + w
    # sum_{j>J} [h_j(b) - h_j(a)] and the mirror sum over j < -J
    pos = 0.5 * beta * (digamma(J + 1 - a / (2 * p)) - digamma(J + 1 - b / (2 * p)))
    neg = 0.5 * beta * (digamma(J + 1 + b / (2 * p)) - digamma(J + 1 + a / (2 * p)))
    k = np.arange(n)
    rows = np.concatenate([k, k])
    cols = np.concatenate([np.full(n, pos_bin), np.full(n, neg_bin)])
    return rows, cols, np.concatenate([pos, neg]) / w


def ulam_assemble(n_bins: int, params: MapParams, J: int | None = None) -> UlamMatrix:
    """Assemble the Ulam matrix on ``n_bins`` equal bins of ``(-p, p]``.

    Branches ``0 < |j| <= J`` are intersected bin by bin.  When all omitted
    branches lie inside the bin(s) adjacent to 0 their total contribution
    is added in closed form (digamma sums), which makes the matrix exact up
    to rounding; otherwise it is dropped and ``tail_mass_bound`` reports
    the largest per-column loss.
    """
    if n_bins < 2:
        raise ParameterError("n_bins must be >= 2")
    if J is None:
        J = default_cutoff(n_bins, params)
    if J < 2:
        raise ParameterError("branch cutoff J must be >= 2")
    p, beta = params.p, params.beta
    slots = int(math.ceil(beta / p)) + 1
    rows, cols, vals = kernels.ulam_coo(int(n_bins), float(p), beta, int(J), slots)
    keep = rows >= 0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    lump = _lump_tail(n_bins, params, J)
    w = 2.0 * p / n_bins
    rounding = 4.0 * (2 * J + 2) * _EPS
    if lump is not None:
        rows = np.concatenate([rows, lump[0]])
        cols = np.concatenate([cols, lump[1]])
        vals = np.concatenate([vals, lump[2]])
        tail = rounding
    else:
        r = beta / (2 * J + 1)
        edges = -p + np.arange(n_bins + 1) * w
        lost = np.clip(np.minimum(edges[1:], r) - np.maximum(edges[:-1], -r), 0.0, None) / w
        tail = float(lost.max()) + rounding
    M = sp.coo_matrix((vals, (rows, cols)), shape=(n_bins, n_bins)).tocsr()
    M.sum_duplicates()
    return UlamMatrix(params, int(n_bins), int(J), M, tail, tail_lumped=lump is not None)


@dataclass
class SpectrumReport:
    """Top eigenvalues by modulus and the normalised leading eigenvector."""

    eigenvalues: np.ndarray
    leading_vector: np.ndarray
    spectral_radius: float
    method: str
    residual: float = 0.0
    iterations: int = 0


def _order(vals):
    # modulus descending, then argument, for reproducible tie breaking
    return np.lexsort((np.round(np.angle(vals), 12), -np.round(np.abs(vals), 13)))


def _perron(vec):
    v = np.real(vec)
    s = v.sum()
    if s == 0.0:
        s = v[np.argmax(np.abs(v))]
    v = v / s
    return np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum()


def _as_matrix(M):
    return M.entries if isinstance(M, UlamMatrix) else M


def spectral_top(M, k: int = 2, method: str = "auto",
                 tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> SpectrumReport:
    """Leading ``k`` eigenvalues of an Ulam (or any square) matrix.

    ``method="auto"`` uses a dense eigensolver up to ``DENSE_LIMIT`` rows
    and orthogonal (block power) iteration with locking above it.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    A = _as_matrix(M)
    n = A.shape[0]
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "power"
    if method == "dense":
        dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        vals, vecs = np.linalg.eig(dense)
        idx = _order(vals)[:k]
        ev = vals[idx]
        return SpectrumReport(ev, _perron(vecs[:, idx[0]]), float(abs(ev[0])), "dense")
    if method == "power":
        return _block_power(A, k, tol, maxiter)
    raise ParameterError(f"unknown method {method!r}")


def _block_power(A, k, tol, maxiter):
    """Orthogonal iteration: block power steps, each column deflated against the previous ones.

    Convergence is declared when the leading ``k`` columns span an invariant
    subspace to ``tol`` (relative residual); ``k`` is widened by one when it
    would split a complex-conjugate pair.
    """
    n = A.shape[0]
    b = min(n, k + 3)
    rng = np.random.default_rng(0)
    start = np.column_stack([np.ones(n), rng.standard_normal((n, b - 1))])
    Q = np.linalg.qr(start)[0]
    if sp.issparse(A):
        norm_a = float(abs(A).sum(axis=0).max())
    else:
        norm_a = float(np.abs(A).sum(axis=0).max())
    norm_a = max(norm_a, 1e-300)
    res = np.inf
    ritz = np.zeros(k, dtype=complex)
    for it in range(1, maxiter + 1):
        Q = np.linalg.qr(A @ Q)[0]
        if it % 5 and it != maxiter:
            continue
        AQ = A @ Q
        H = Q.T @ AQ
        full = np.linalg.eigvals(H)
        full = full[_order(full)]
        ke = k
        if ke < b and abs(full[ke - 1].imag) > 0 and np.isclose(full[ke], np.conj(full[ke - 1])):
            ke += 1
        Hk = H[:ke, :ke]
        res = float(np.linalg.norm(AQ[:, :ke] - Q[:, :ke] @ Hk) / norm_a)
        ritz = np.linalg.eigvals(Hk)
        if res < tol:
            break
    else:
        raise ConvergenceError(
            f"orthogonal iteration did not converge in {maxiter} iterations",
            estimate=ritz[_order(ritz)][:k], residual=res)
    vals = ritz[_order(ritz)][:k]
    return SpectrumReport(vals, _perron(Q[:, 0]), float(abs(vals[0])), "power",
                          residual=res, iterations=it)
