"""Sequential-SVD ring factorization and the minimum-storage search.

The factorization peels cores off one unfolding at a time.  Each SVD is
truncated against an error budget; the budgets are chosen so that their
squares sum to (eps * |W|_F)^2, which bounds the final relative error
by eps.  The search then sweeps every cyclic mode rotation and every
admissible boundary rank, keeping the candidate with the fewest stored
entries.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from tensorring.dense import DenseTensor, as_tensor, circular_shift
from tensorring.errors import DivisorError, TensorRingError
from tensorring.ring import TRCores, param_count, rotate_left, tr_reconstruct


def _svd(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but sturdier
        from scipy.linalg import svd as scipy_svd

        return scipy_svd(m, full_matrices=False, lapack_driver="gesvd")


@dataclass(frozen=True)
class TruncatedSVD:
    """Rank-r factors of a matrix plus the energy the truncation dropped."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    rank: int
    discarded_energy: float


def truncated_svd(m: np.ndarray, delta: float) -> TruncatedSVD:
    """SVD truncated to the smallest rank whose tail energy is <= delta^2.

    Singular values at or below the numerical-noise floor
    (sigma_1 * max(m, n) * macheps) never count toward the rank, so a
    delta of zero recovers the numerical rank rather than min(m, n).
    At least one singular triple is always kept.
    """
    if delta < 0:
        raise TensorRingError(f"truncation budget must be >= 0, got {delta}")
    u, s, vt = _svd(np.ascontiguousarray(m, dtype=np.float64))
    tails = np.concatenate([np.cumsum((s * s)[::-1])[::-1], [0.0]])
    r_tail = int(np.argmax(tails <= delta * delta))
    floor = float(s[0]) * max(m.shape) * np.finfo(np.float64).eps
    r_noise = int(np.count_nonzero(s > floor))
    r = max(1, min(r_tail, r_noise))
    return TruncatedSVD(
        u=np.ascontiguousarray(u[:, :r]),
        s=np.ascontiguousarray(s[:r]),
        vt=np.ascontiguousarray(vt[:r]),
        rank=r,
        discarded_energy=float(tails[r]),
    )


def delta_schedule(eps: float, norm: float, order: int) -> tuple[float, ...]:
    """Per-SVD truncation budgets for an order-N factorization.

    The first split carries the boundary rank on both ends of the chain
    and gets a 2/N share of the squared budget; each of the N-2 interior
    splits gets 1/N.  The squares sum to (eps * norm)^2.
    """
    if eps < 0:
        raise TensorRingError(f"eps must be >= 0, got {eps}")
    if order < 3:
        raise TensorRingError(f"order must be >= 3, got {order}")
    total = eps * norm
    first = np.sqrt(2.0 / order) * total
    inner = np.sqrt(1.0 / order) * total
    return (float(first),) + (float(inner),) * (order - 2)


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    if n < 1:
        raise TensorRingError(f"n must be >= 1, got {n}")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _chain_from_first(first: TruncatedSVD, first_rank: int, deltas, dims) -> list[np.ndarray]:
    """Finish the core chain given the already-truncated first SVD."""
    r = first.rank
    if r % first_rank != 0:
        raise DivisorError(
            f"boundary rank {first_rank} does not divide the truncated rank {r}"
        )
    n = len(dims)
    r2 = r // first_rank
    # split the r columns as (boundary, chain): column c = b * r2 + q
    g1 = first.u.reshape(dims[0], first_rank, r2).transpose(1, 0, 2)
    cores = [np.ascontiguousarray(g1)]
    rest = (first.s[:, None] * first.vt).reshape(first_rank, r2, *dims[1:])
    rest = np.moveaxis(rest, 0, -1)  # (r2, J2, ..., JN, boundary)
    cur = r2
    for k in range(1, n - 1):
        mat = rest.reshape(cur * dims[k], -1)
        t = truncated_svd(mat, deltas[k])
        cores.append(t.u.reshape(cur, dims[k], t.rank))
        rest = (t.s[:, None] * t.vt).reshape(t.rank, *dims[k + 1 :], first_rank)
        cur = t.rank
    cores.append(np.ascontiguousarray(rest.reshape(cur, dims[n - 1], first_rank)))
    return cores


def tr_svd(w, eps: float, shift: int = 0, first_rank: int = 1) -> TRCores:
    """Ring-factorize a tensor after rotating its modes left by ``shift``.

    ``first_rank`` fixes the boundary rank R_1; it must divide the rank
    the first truncated SVD settles on, otherwise :class:`DivisorError`
    is raised.  Cores come back in the input dtype; all arithmetic runs
    in binary64.
    """
    w = as_tensor(w)
    if first_rank < 1:
        raise DivisorError(f"first_rank must be >= 1, got {first_rank}")
    n = w.order
    ws = circular_shift(w, shift)
    dims = ws.dims
    deltas = delta_schedule(eps, w.norm(), n)
    first = truncated_svd(ws.data.reshape(dims[0], -1), deltas[0])
    cores = _chain_from_first(first, first_rank, deltas, dims)
    tr = TRCores(tuple(cores), shift, w.dims)
    return tr.astype(w.dtype)


def relative_error(w, tr: TRCores) -> float:
    """|W - reconstruction|_F / |W|_F in binary64 (0 for a zero tensor)."""
    w = as_tensor(w)
    ref = w.data.astype(np.float64, copy=False)
    rec = tr_reconstruct(tr.astype(np.float64)).data
    denom = float(np.linalg.norm(ref))
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(ref - rec) / denom)


@dataclass(frozen=True)
class Candidate:
    """One (shift, boundary-rank) point visited by the search."""

    shift: int
    first_rank: int
    ranks: tuple[int, ...]
    storage: int


@dataclass(frozen=True)
class SearchResult:
    """Winner of the minimum-storage sweep plus the full candidate table."""

    tr: TRCores
    storage: int
    shift: int
    first_rank: int
    achieved_rel_error: float
    eps: float
    candidates: tuple[Candidate, ...]

    @property
    def candidates_evaluated(self) -> int:
        return len(self.candidates)


def _shift_worker(w64: np.ndarray, shift: int, deltas) -> list[tuple[Candidate, list[np.ndarray]]]:
    n = w64.ndim
    dims = rotate_left(w64.shape, shift)
    ws = np.ascontiguousarray(w64.transpose(rotate_left(range(n), shift)))
    first = truncated_svd(ws.reshape(dims[0], -1), deltas[0])
    out = []
    for r1 in divisors(first.rank):
        cores = _chain_from_first(first, r1, deltas, dims)
        ranks = tuple(c.shape[0] for c in cores)
        storage = int(sum(c.size for c in cores))
        out.append((Candidate(shift, r1, ranks, storage), cores))
    return out


def min_storage_search(w, eps: float, shifts=None, threads: int = 1) -> SearchResult:
    """Exhaustive sweep over cyclic rotations and admissible boundary ranks.

    For every rotation the first SVD is computed once and reused across
    all boundary ranks (the divisors of its truncated rank).  The winner
    minimizes stored entries, with ties broken by smaller shift, then
    smaller boundary rank, so the outcome is order-independent.  The
    reported relative error is measured on the winner only.
    """
    w = as_tensor(w)
    n = w.order
    if shifts is None:
        shifts = range(n)
    shifts = [int(s) % n for s in shifts]
    if not shifts:
        raise TensorRingError("at least one shift must be searched")
    w64 = w.data.astype(np.float64, copy=False)
    deltas = delta_schedule(eps, w.norm(), n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda k: _shift_worker(w64, k, deltas), shifts))
    else:
        batches = [_shift_worker(w64, k, deltas) for k in shifts]

    candidates: list[Candidate] = []
    best: tuple[Candidate, list[np.ndarray]] | None = None
    for batch in batches:
        for cand, cores in batch:
            candidates.append(cand)
            if best is None or (cand.storage, cand.shift, cand.first_rank) < (
                best[0].storage,
                best[0].shift,
                best[0].first_rank,
            ):
                best = (cand, cores)
    assert best is not None
    cand, cores = best
    tr64 = TRCores(tuple(cores), cand.shift, w.dims)
    err = relative_error(w, tr64)
    return SearchResult(
        tr=tr64.astype(w.dtype),
        storage=cand.storage,
        shift=cand.shift,
        first_rank=cand.first_rank,
        achieved_rel_error=err,
        eps=eps,
        candidates=tuple(candidates),
    )
