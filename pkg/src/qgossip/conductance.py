"""
Exact conductance, k-conductance and mean conductance.

Values come from enumerating every vertex subset as a bitmask, so the
exhaustive routines are capped at ``n <= ENUMERATION_CAP``. Rings also have
an O(n) arc scan that is used as an independent cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvalidParameter
from .graph import gen_ring
from .transition import TransitionMatrix, validate

ENUMERATION_CAP = 20
TIE_TOL = 1e-12
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ConductanceReport:
    value: float
    argmin: tuple[int, ...]
    k: int

    def to_json(self) -> dict:
        return {"value": self.value, "argmin": list(self.argmin), "k": self.k}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def cut_ratio(P: TransitionMatrix, subset) -> float:
    """Boundary probability mass of ``subset`` divided by its size."""
    s = sorted(set(int(v) for v in subset))
    if not s:
        raise InvalidParameter("the ratio is undefined for the empty set")
    inside = np.zeros(P.n, dtype=bool)
    inside[s] = True
    return float(P.entries[np.ix_(inside, ~inside)].sum() / len(s))


def _mask_to_set(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def _lex_smallest(masks: np.ndarray) -> int:
    """Bitmask whose sorted vertex tuple is lexicographically smallest."""
    rem = np.unique(masks.astype(np.int64))
    prefix = 0
    while True:
        if (rem == 0).any():
            return prefix
        low = rem & -rem
        best = low.min()
        keep = low == best
        rem = rem[keep] ^ best
        prefix |= int(best)


def _check_input(P: TransitionMatrix):
    diag = validate(P)
    if diag is not None:
        raise InvalidParameter(f"invalid transition matrix: {diag}")
    if P.n > ENUMERATION_CAP:
        raise CapacityError(
            f"n={P.n} exceeds the exhaustive enumeration cap of {ENUMERATION_CAP}; "
            "use circulant_arc_conductance for rings or reduce n"
        )


def _size_minima(P: TransitionMatrix, kmax: int):
    """Minimum ratio for each subset size ``1..kmax`` with tied candidate masks."""
    n = P.n
    off = np.array(P.entries, dtype=float)
    np.fill_diagonal(off, 0.0)
    shifts = np.arange(n, dtype=np.int64)
    best = np.full(kmax + 1, np.inf)
    cands: list[list[tuple[np.ndarray, np.ndarray]]] = [[] for _ in range(kmax + 1)]
    total = 1 << n
    for lo in range(1, total, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        sizes = bits.sum(axis=1)
        sel = sizes <= kmax
        if not sel.any():
            continue
        masks, bits, sizes = masks[sel], bits[sel], sizes[sel]
        # mass flowing from S into each vertex, kept only for vertices outside S
        inflow = bits.astype(float) @ off
        cut = np.where(bits, 0.0, inflow).sum(axis=1)
        ratio = cut / sizes
        for s in range(1, kmax + 1):
            at = sizes == s
            if not at.any():
                continue
            r = ratio[at]
            best[s] = min(best[s], r.min())
            near = r <= best[s] + TIE_TOL
            cands[s].append((masks[at][near], r[near]))
    out = []
    for s in range(1, kmax + 1):
        ms = np.concatenate([m for m, _ in cands[s]])
        rs = np.concatenate([r for _, r in cands[s]])
        out.append((float(best[s]), ms[rs <= best[s] + TIE_TOL]))
    return out


def _report_from_minima(P, minima, k) -> ConductanceReport:
    vals = np.array([m for m, _ in minima[:k]])
    overall = vals.min()
    pool = np.concatenate([c for (m, c) in minima[:k] if m <= overall + TIE_TOL])
    arg = _mask_to_set(_lex_smallest(pool))
    return ConductanceReport(float(overall), arg, k)


def k_conductance(P: TransitionMatrix, k: int) -> ConductanceReport:
    """Exact minimum of the boundary ratio over nonempty sets of size at most ``k``.

    Ties are broken by the lexicographically smallest sorted vertex tuple.
    """
    _check_input(P)
    if not 1 <= k <= P.n // 2:
        raise InvalidParameter(f"k must satisfy 1 <= k <= {P.n // 2}, got {k}")
    # always enumerate to n//2 so every k reads the same per-size minima
    return _report_from_minima(P, _size_minima(P, P.n // 2), k)


def conductance(P: TransitionMatrix) -> ConductanceReport:
    return k_conductance(P, P.n // 2)


def k_conductance_profile(P: TransitionMatrix) -> list[ConductanceReport]:
    """``[k_conductance(P, k) for k in 1..n//2]`` from a single enumeration."""
    _check_input(P)
    half = P.n // 2
    if half < 1:
        raise InvalidParameter("conductance needs n >= 2")
    minima = _size_minima(P, half)
    return [_report_from_minima(P, minima, k) for k in range(1, half + 1)]


def mean_conductance(P: TransitionMatrix) -> float:
    """Sum of ``k / Phi_eff(k)`` for ``k = 1..n-1``.

    For ``k > n/2`` the k-conductance is not defined directly; we use
    ``Phi_eff(k) = Phi_min(k, n-k)``, relying on the cut being symmetric
    under complement.
    """
    profile = k_conductance_profile(P)
    n = P.n
    total = 0.0
    for k in range(1, n):
        phi = profile[min(k, n - k) - 1].value
        if phi <= 0.0:
            raise InvalidParameter(
                f"k-conductance is zero at k={min(k, n - k)}: the matrix support is disconnected"
            )
        total += k / phi
    return total


def _require_ring(P: TransitionMatrix):
    n = P.n
    if n < 3 or P.graph != gen_ring(n):
        raise InvalidParameter("circulant arc conductance needs a matrix over a ring graph")
    a = P.entries
    idx = np.arange(n)
    nxt = (idx + 1) % n
    if not (np.allclose(a[idx, nxt], a[0, 1], rtol=0, atol=TIE_TOL)
            and np.allclose(a[nxt, idx], a[0, 1], rtol=0, atol=TIE_TOL)
            and np.allclose(np.diag(a), a[0, 0], rtol=0, atol=TIE_TOL)):
        raise InvalidParameter("circulant arc conductance needs a circulant ring matrix")


def circulant_arc_conductance(P: TransitionMatrix) -> ConductanceReport:
    """Conductance of a circulant ring matrix from contiguous arcs only, in O(n).

    Every arc of length ``s < n`` has the same two boundary edges, so only
    the arcs starting at vertex 0 are scanned; a shorter arc wins a tie.
    """
    _require_ring(P)
    n = P.n
    w = float(P.entries[0, 1])
    best, best_s = np.inf, 0
    for s in range(1, n // 2 + 1):
        r = 2.0 * w / s
        if r < best - TIE_TOL:
            best, best_s = r, s
    arg = tuple(range(best_s))
    return ConductanceReport(cut_ratio(P, arg), arg, n // 2)


def circulant_mean_conductance(P: TransitionMatrix) -> float:
    """Mean conductance of a circulant ring matrix from arc k-conductances."""
    _require_ring(P)
    n = P.n
    w = float(P.entries[0, 1])
    if w <= 0:
        raise InvalidParameter("k-conductance is zero: the matrix support is disconnected")
    # shortest-arc minimum over sizes <= k is the arc of size k itself
    return sum(k / (2.0 * w / min(k, n - k)) for k in range(1, n))
