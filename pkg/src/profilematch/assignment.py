"""Maximum-total-similarity one-to-one assignment (Hungarian method)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .datamodel import SimilarityMatrix


@dataclass(frozen=True)
class Assignment:
    """Matched (row, col) index pairs with their similarity scores."""

    matches: tuple[tuple[int, int], ...]
    scores: tuple[float, ...]
    total_score: float

    def __len__(self) -> int:
        return len(self.matches)


@dataclass(frozen=True)
class IdAssignment:
    """Matched (aux_id, target_id) pairs with scores, dummies removed."""

    matches: tuple[tuple[str, str], ...]
    scores: tuple[float, ...]
    total_score: float

    def __len__(self) -> int:
        return len(self.matches)

    def score_of(self) -> dict[tuple[str, str], float]:
        return dict(zip(self.matches, self.scores))


def pad_matrix(Z: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Square up ``Z`` with zero-similarity dummy rows or columns.

    Returns the padded matrix and the number of real rows and columns; indices
    at or beyond those counts are dummies."""
    Z = np.asarray(Z, dtype=float)
    n_rows, n_cols = Z.shape
    n = max(n_rows, n_cols)
    if n_rows == n_cols:
        return Z, n_rows, n_cols
    out = np.zeros((n, n))
    out[:n_rows, :n_cols] = Z
    return out, n_rows, n_cols


def hungarian_solve(Z: np.ndarray) -> Assignment:
    """Perfect matching of a square matrix maximising total similarity.

    Shortest-augmenting-path Hungarian method with row/column potentials on
    the negated matrix, O(N^3).  Among equally short augmenting steps the
    lowest column index is taken, so results are deterministic."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError(f"hungarian_solve needs a square matrix, got shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("similarity matrix has non-finite entries")
    n = Z.shape[0]
    if n == 0:
        return Assignment((), (), 0.0)
    cost = -Z
    # 1-based bookkeeping; index 0 is the virtual source column
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (cur < minv[1:])
            idx = np.flatnonzero(better) + 1
            minv[idx] = cur[idx - 1]
            way[idx] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[p[1:] - 1] = np.arange(n)
    matches = tuple((r, int(row_to_col[r])) for r in range(n))
    scores = tuple(float(Z[r, c]) for r, c in matches)
    return Assignment(matches, scores, math.fsum(scores))


def solve_rectangular(Z: np.ndarray) -> Assignment:
    """Pad, solve and drop dummy matches."""
    padded, n_rows, n_cols = pad_matrix(Z)
    full = hungarian_solve(padded)
    keep = [(m, s) for m, s in zip(full.matches, full.scores) if m[0] < n_rows and m[1] < n_cols]
    scores = tuple(s for _, s in keep)
    return Assignment(tuple(m for m, _ in keep), scores, math.fsum(scores))


def match_profiles(
    Z: SimilarityMatrix | np.ndarray,
    aux_ids: Sequence[str] | None = None,
    tgt_ids: Sequence[str] | None = None,
) -> IdAssignment:
    if isinstance(Z, SimilarityMatrix):
        aux_ids = Z.rows if aux_ids is None else aux_ids
        tgt_ids = Z.cols if tgt_ids is None else tgt_ids
        Z = Z.Z
    if aux_ids is None or tgt_ids is None:
        raise ValueError("ids are required for a bare matrix")
    if np.shape(Z) != (len(aux_ids), len(tgt_ids)):
        raise ValueError("matrix shape does not match id lists")
    a = solve_rectangular(Z)
    pairs = tuple((aux_ids[r], tgt_ids[c]) for r, c in a.matches)
    return IdAssignment(pairs, a.scores, a.total_score)


def save_assignment(assignment: IdAssignment, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["aux_id", "target_id", "score"])
        for (a, t), s in sorted(zip(assignment.matches, assignment.scores)):
            w.writerow([a, t, repr(float(s))])


def load_assignment(path: str | Path) -> IdAssignment:
    matches, scores = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["aux_id", "target_id", "score"]:
            raise ValueError(f"{path}: expected header aux_id,target_id,score")
        for row in reader:
            if row:
                matches.append((row[0], row[1]))
                scores.append(float(row[2]))
    return IdAssignment(tuple(matches), tuple(scores), math.fsum(scores))
