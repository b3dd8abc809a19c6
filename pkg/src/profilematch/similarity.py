"""Per-attribute similarity metrics, similarity vectors and the batched
pairwise kernels used to fill large similarity matrices."""

from __future__ import annotations

import bisect
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np
from numba import njit

from . import nlp
from .datamodel import ATTRIBUTES, Dataset, Location, Profile, SimilarityMatrix, SimilarityVector
from .graph import (
    DEFAULT_BIN_SIZE,
    DEFAULT_LENGTH,
    GraphFeatureVector,
    SocialGraph,
    degree_feature_vector,
    graph_from_neighbors,
    sim_graph,
)

if TYPE_CHECKING:
    from .learner import MatchModel

EARTH_RADIUS_KM = 6371.0
DEFAULT_TAU_KM = 50.0
DEFAULT_TAU_SECS = 3600.0


# ---------------------------------------------------------------------------
# Lookup tables


@dataclass(frozen=True)
class Gazetteer:
    entries: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        for name, (lat, lon) in self.entries.items():
            if not (-90 <= lat <= 90 and -180 <= lon <= 180):
                raise ValueError(f"gazetteer entry {name!r} has invalid coordinates")

    def lookup(self, text: str) -> tuple[float, float] | None:
        return self.entries.get(text.strip().lower())


def load_gazetteer(path: str | Path) -> Gazetteer:
    entries = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "name"):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected name,lat,lon")
            entries[row[0].strip().lower()] = (float(row[1]), float(row[2]))
    return Gazetteer(entries)


@dataclass(frozen=True)
class NameGenderTable:
    counts: Mapping[str, tuple[int, int]]  # name -> (female, male)

    def __post_init__(self):
        for name, (f, m) in self.counts.items():
            if f < 0 or m < 0 or f + m == 0:
                raise ValueError(f"name {name!r} needs non-negative counts, one positive")

    def p_female(self, name: str) -> float | None:
        entry = self.counts.get(name.lower())
        if entry is None:
            return None
        f, m = entry
        return f / (f + m)


def load_name_table(paths: str | Path | Iterable[str | Path]) -> NameGenderTable:
    """Read one or more SSA ``yobXXXX.txt`` files (``Name,F|M,count``), summing years."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    counts: dict[str, list[int]] = {}
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                if len(row) != 3 or row[1] not in ("F", "M"):
                    raise ValueError(f"{path}:{lineno}: expected Name,F|M,count")
                slot = counts.setdefault(row[0].strip().lower(), [0, 0])
                slot[0 if row[1] == "F" else 1] += int(row[2])
    return NameGenderTable({k: (v[0], v[1]) for k, v in counts.items()})


# ---------------------------------------------------------------------------
# Scalar metrics


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def sim_username(n_a: str, n_b: str) -> float:
    a, b = n_a.lower(), n_b.lower()
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def resolve_location(loc: Location | None, gaz: Gazetteer | None) -> tuple[float, float] | None:
    """Coordinates verbatim when given, else a gazetteer lookup of the text."""
    if loc is None:
        return None
    if loc.has_coords:
        return (loc.lat, loc.lon)
    if loc.text and gaz is not None:
        return gaz.lookup(loc.text)
    return None


def haversine_km(c_a: tuple[float, float], c_b: tuple[float, float]) -> float:
    lat1, lon1 = map(math.radians, c_a)
    lat2, lon2 = map(math.radians, c_b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def sim_location(c_a, c_b, tau_km: float = DEFAULT_TAU_KM) -> float:
    return math.exp(-haversine_km(c_a, c_b) / tau_km)


def infer_gender(p: Profile, tbl: NameGenderTable | None) -> float | None:
    """Probability the profile is female: stated gender wins, otherwise the
    leading alphabetic run of the username is looked up in the name table."""
    if p.gender == "female":
        return 1.0
    if p.gender == "male":
        return 0.0
    if tbl is None or not p.username or not p.username.split():
        return None
    token = p.username.split()[0]
    lead = []
    for ch in token:
        if not ch.isalpha():
            break
        lead.append(ch)
    if not lead:
        return None
    return tbl.p_female("".join(lead))


def sim_gender(g_a: float, g_b: float) -> float:
    return 1.0 - abs(g_a - g_b)


def sim_photo(e_a: Sequence[float], e_b: Sequence[float]) -> float | None:
    a = np.asarray(e_a, dtype=float)
    b = np.asarray(e_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("embeddings have different dimensions")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return None
    c = float(np.dot(a, b) / (na * nb))
    return min(max((c + 1.0) / 2.0, 0.0), 1.0)


def sim_freetext(v_a: Sequence[int], v_b: Sequence[int]) -> float | None:
    a = np.asarray(v_a, dtype=float)
    b = np.asarray(v_b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return None
    return min(max(float(np.dot(a, b) / (na * nb)), 0.0), 1.0)


def _mean_nearest_gap(src: Sequence[int], ref: Sequence[int]) -> float:
    total = 0.0
    for t in src:
        k = bisect.bisect_left(ref, t)
        best = math.inf
        if k < len(ref):
            best = ref[k] - t
        if k > 0:
            best = min(best, t - ref[k - 1])
        total += best
    return total / len(src)


def sim_activity(a_a: Sequence[int], a_b: Sequence[int], tau_secs: float = DEFAULT_TAU_SECS) -> float | None:
    """exp(-m / tau) where m is the mean gap from each timestamp of the shorter
    list to its nearest timestamp in the other list.  Equal lengths average
    both directions so the metric stays symmetric."""
    if not a_a or not a_b:
        return None
    a, b = sorted(a_a), sorted(a_b)
    if len(a) < len(b):
        m = _mean_nearest_gap(a, b)
    elif len(b) < len(a):
        m = _mean_nearest_gap(b, a)
    else:
        m = 0.5 * (_mean_nearest_gap(a, b) + _mean_nearest_gap(b, a))
    return math.exp(-m / tau_secs)


# ---------------------------------------------------------------------------
# Resources and per-profile features


@dataclass
class Resources:
    gazetteer: Gazetteer | None = None
    names: NameGenderTable | None = None
    entities: nlp.EntityGazetteers | None = None
    lda: nlp.LdaModel | None = None
    sentiment: nlp.SentimentModel | None = None
    graphs: dict[str, SocialGraph] = field(default_factory=dict)
    tau_km: float = DEFAULT_TAU_KM
    tau_secs: float = DEFAULT_TAU_SECS
    graph_length: int = DEFAULT_LENGTH
    graph_bin: int = DEFAULT_BIN_SIZE
    _graph_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def graph_vector(self, network: str, pid: str) -> GraphFeatureVector | None:
        g = self.graphs.get(network)
        if g is None or pid not in g.adjacency:
            return None
        key = (network, pid)
        if key not in self._graph_cache:
            self._graph_cache[key] = degree_feature_vector(g, pid, self.graph_length, self.graph_bin)
        return self._graph_cache[key]


@dataclass
class ProfileFeatures:
    username: str | None = None
    coords: tuple[float, float] | None = None
    gender: float | None = None
    photo: np.ndarray | None = None
    entities: np.ndarray | None = None
    activities: tuple[int, ...] = ()
    topics: np.ndarray | None = None
    sentiment: dict[str, float] = field(default_factory=dict)
    graph: GraphFeatureVector | None = None


def profile_features(p: Profile, resources: Resources, network: str = "auxiliary") -> ProfileFeatures:
    topics = None
    if resources.lda is not None and p.posts:
        topics = nlp.infer_topics(resources.lda, [post.text for post in p.posts])
    sentiment = {}
    if resources.sentiment is not None and p.posts:
        sentiment = nlp.daily_profile(resources.sentiment, p.posts)
    entities = None
    if p.freetext:
        entities = nlp.extract_entities(p.freetext, resources.entities)
    photo = None
    if p.photo_embedding is not None:
        photo = np.asarray(p.photo_embedding, dtype=float)
    return ProfileFeatures(
        username=p.username or None,
        coords=resolve_location(p.location, resources.gazetteer),
        gender=infer_gender(p, resources.names),
        photo=photo,
        entities=entities,
        activities=tuple(p.activities),
        topics=topics,
        sentiment=sentiment,
        graph=resources.graph_vector(network, p.id),
    )


def features_similarity(fa: ProfileFeatures, fb: ProfileFeatures, resources: Resources) -> SimilarityVector:
    def both(x, y):
        return x is not None and y is not None

    return SimilarityVector(
        username=sim_username(fa.username, fb.username) if both(fa.username, fb.username) else None,
        location=sim_location(fa.coords, fb.coords, resources.tau_km) if both(fa.coords, fb.coords) else None,
        gender=sim_gender(fa.gender, fb.gender) if both(fa.gender, fb.gender) else None,
        photo=sim_photo(fa.photo, fb.photo) if both(fa.photo, fb.photo) else None,
        freetext=sim_freetext(fa.entities, fb.entities) if both(fa.entities, fb.entities) else None,
        activity=sim_activity(fa.activities, fb.activities, resources.tau_secs),
        interest=nlp.interest_similarity(fa.topics, fb.topics) if both(fa.topics, fb.topics) else None,
        sentiment=nlp.sentiment_similarity(fa.sentiment, fb.sentiment),
        graph=sim_graph(fa.graph, fb.graph) if both(fa.graph, fb.graph) else None,
    )


def compute_similarity_vector(p_a: Profile, p_b: Profile, resources: Resources) -> SimilarityVector:
    """All nine attribute similarities for an (auxiliary, target) pair."""
    return features_similarity(
        profile_features(p_a, resources, "auxiliary"),
        profile_features(p_b, resources, "target"),
        resources,
    )


# ---------------------------------------------------------------------------
# Columnar feature tables and batched kernels


@njit(cache=True)
def _levenshtein_pairs(codes_a, len_a, codes_b, len_b, ia, ib, out):
    width = codes_a.shape[1] if codes_a.shape[1] > codes_b.shape[1] else codes_b.shape[1]
    prev = np.empty(width + 1, dtype=np.int64)
    cur = np.empty(width + 1, dtype=np.int64)
    for p in range(ia.shape[0]):
        i = ia[p]
        j = ib[p]
        la = len_a[i]
        lb = len_b[j]
        if la == 0 or lb == 0:
            out[p] = np.nan
            continue
        for c in range(lb + 1):
            prev[c] = c
        for r in range(1, la + 1):
            cur[0] = r
            ca = codes_a[i, r - 1]
            for c in range(1, lb + 1):
                cost = 0 if ca == codes_b[j, c - 1] else 1
                v = prev[c - 1] + cost
                if prev[c] + 1 < v:
                    v = prev[c] + 1
                if cur[c - 1] + 1 < v:
                    v = cur[c - 1] + 1
                cur[c] = v
            for c in range(lb + 1):
                prev[c] = cur[c]
        longest = la if la > lb else lb
        out[p] = 1.0 - prev[lb] / longest


@njit(cache=True)
def _gap_mean(src, s0, s1, ref, r0, r1):
    total = 0.0
    k = r0
    for q in range(s0, s1):
        t = src[q]
        while k < r1 and ref[k] < t:
            k += 1
        best = np.inf
        if k < r1:
            best = ref[k] - t
        if k > r0 and t - ref[k - 1] < best:
            best = t - ref[k - 1]
        total += best
    return total / (s1 - s0)


@njit(cache=True)
def _activity_pairs(flat_a, off_a, flat_b, off_b, ia, ib, tau, out):
    for p in range(ia.shape[0]):
        i = ia[p]
        j = ib[p]
        a0, a1 = off_a[i], off_a[i + 1]
        b0, b1 = off_b[j], off_b[j + 1]
        na = a1 - a0
        nb = b1 - b0
        if na == 0 or nb == 0:
            out[p] = np.nan
            continue
        if na < nb:
            m = _gap_mean(flat_a, a0, a1, flat_b, b0, b1)
        elif nb < na:
            m = _gap_mean(flat_b, b0, b1, flat_a, a0, a1)
        else:
            m = 0.5 * (_gap_mean(flat_a, a0, a1, flat_b, b0, b1) + _gap_mean(flat_b, b0, b1, flat_a, a0, a1))
        out[p] = np.exp(-m / tau)


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = mat / norms
    out[(norms[:, 0] == 0) | np.isnan(norms[:, 0])] = np.nan
    return out


class FeatureTable:
    """Columnar per-profile features for one side of a pairing."""

    def __init__(self, ids: Sequence[str], feats: Sequence[ProfileFeatures]):
        self.ids = list(ids)
        n = len(feats)
        names = [f.username.lower() if f.username else "" for f in feats]
        width = max((len(s) for s in names), default=0) or 1
        self.name_codes = np.zeros((n, width), dtype=np.int64)
        self.name_len = np.zeros(n, dtype=np.int64)
        for r, s in enumerate(names):
            self.name_codes[r, : len(s)] = [ord(c) for c in s]
            self.name_len[r] = len(s)
        self.coords = np.array([f.coords if f.coords else (np.nan, np.nan) for f in feats], dtype=float).reshape(n, 2)
        self.gender = np.array([np.nan if f.gender is None else f.gender for f in feats], dtype=float)
        dim = next((len(f.photo) for f in feats if f.photo is not None), 1)
        photo = np.full((n, dim), np.nan)
        for r, f in enumerate(feats):
            if f.photo is not None:
                photo[r] = f.photo
        self.photo = _unit_rows(photo)
        ent = np.full((n, len(nlp.ENTITY_CATEGORIES)), np.nan)
        for r, f in enumerate(feats):
            if f.entities is not None:
                ent[r] = f.entities
        self.entities = _unit_rows(ent)
        self.act_offsets = np.zeros(n + 1, dtype=np.int64)
        self.act_offsets[1:] = np.cumsum([len(f.activities) for f in feats])
        self.act_flat = np.array([t for f in feats for t in sorted(f.activities)], dtype=np.float64)
        K = next((len(f.topics) for f in feats if f.topics is not None), 1)
        self.topics = np.full((n, K), np.nan)
        for r, f in enumerate(feats):
            if f.topics is not None:
                self.topics[r] = f.topics
        self.sentiment = [f.sentiment for f in feats]
        glen = next((f.graph.length for f in feats if f.graph is not None), 1)
        graph = np.full((n, glen), np.nan)
        for r, f in enumerate(feats):
            if f.graph is not None:
                graph[r] = f.graph.counts
        self.graph = _unit_rows(graph)

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_dataset(cls, ds: Dataset, resources: Resources, ids: Sequence[str] | None = None) -> "FeatureTable":
        ids = ds.ids if ids is None else list(ids)
        res = resources
        if ds.network_label not in resources.graphs and any(ds[i].neighbors for i in ids):
            res = _with_graph(resources, ds)
        return cls(ids, [profile_features(ds[i], res, ds.network_label) for i in ids])


def _with_graph(resources: Resources, ds: Dataset) -> Resources:
    g = graph_from_neighbors({p.id: p.neighbors for p in ds})
    graphs = dict(resources.graphs)
    graphs[ds.network_label] = g
    return Resources(
        resources.gazetteer, resources.names, resources.entities, resources.lda, resources.sentiment,
        graphs, resources.tau_km, resources.tau_secs, resources.graph_length, resources.graph_bin,
    )


def _cosine_rows(ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", ua, ub)


def _jsd_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    m = 0.5 * (p + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        kp = np.where(p > 0, p * np.log2(p / m), 0.0).sum(axis=1)
        kq = np.where(q > 0, q * np.log2(q / m), 0.0).sum(axis=1)
    out = np.clip(0.5 * kp + 0.5 * kq, 0.0, 1.0)
    out[np.isnan(p[:, 0]) | np.isnan(q[:, 0])] = np.nan
    return out


def _sentiment_pairs(sa: list[dict], sb: list[dict], ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    days = sorted({d for s in sa for d in s} | {d for s in sb for d in s})
    if not days:
        return np.full(len(ia), np.nan)
    col = {d: k for k, d in enumerate(days)}

    def dense(profiles):
        mat = np.full((len(profiles), len(days)), np.nan)
        for r, s in enumerate(profiles):
            for d, v in s.items():
                mat[r, col[d]] = v
        return mat

    A, B = dense(sa), dense(sb)
    va, vb = A[ia], B[ib]
    common = ~np.isnan(va) & ~np.isnan(vb)
    n = common.sum(axis=1)
    diff = np.where(common, np.abs(va - vb), 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 1.0 - diff / n
    out[n == 0] = np.nan
    return np.clip(out, 0.0, 1.0)


def _haversine_rows(ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    lat1, lon1 = np.radians(ca[:, 0]), np.radians(ca[:, 1])
    lat2, lon2 = np.radians(cb[:, 0]), np.radians(cb[:, 1])
    h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def pair_similarities(
    ta: FeatureTable,
    tb: FeatureTable,
    ia: np.ndarray,
    ib: np.ndarray,
    tau_km: float = DEFAULT_TAU_KM,
    tau_secs: float = DEFAULT_TAU_SECS,
) -> np.ndarray:
    """(len(ia), 9) array of similarities in ATTRIBUTES order, NaN = MISSING."""
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    out = np.full((len(ia), len(ATTRIBUTES)), np.nan)
    col = ATTRIBUTES.index

    user = np.empty(len(ia))
    _levenshtein_pairs(ta.name_codes, ta.name_len, tb.name_codes, tb.name_len, ia, ib, user)
    out[:, col("username")] = user

    out[:, col("location")] = np.exp(-_haversine_rows(ta.coords[ia], tb.coords[ib]) / tau_km)
    out[:, col("gender")] = 1.0 - np.abs(ta.gender[ia] - tb.gender[ib])
    if ta.photo.shape[1] == tb.photo.shape[1]:
        out[:, col("photo")] = np.clip((_cosine_rows(ta.photo[ia], tb.photo[ib]) + 1.0) / 2.0, 0.0, 1.0)
    out[:, col("freetext")] = np.clip(_cosine_rows(ta.entities[ia], tb.entities[ib]), 0.0, 1.0)

    act = np.empty(len(ia))
    _activity_pairs(ta.act_flat, ta.act_offsets, tb.act_flat, tb.act_offsets, ia, ib, float(tau_secs), act)
    out[:, col("activity")] = act

    if ta.topics.shape[1] == tb.topics.shape[1]:
        out[:, col("interest")] = 1.0 - _jsd_rows(ta.topics[ia], tb.topics[ib])
    out[:, col("sentiment")] = _sentiment_pairs(ta.sentiment, tb.sentiment, ia, ib)
    if ta.graph.shape[1] == tb.graph.shape[1]:
        out[:, col("graph")] = np.clip(_cosine_rows(ta.graph[ia], tb.graph[ib]), 0.0, 1.0)
    return out


def similarity_tensor(
    ta: FeatureTable,
    tb: FeatureTable,
    tau_km: float = DEFAULT_TAU_KM,
    tau_secs: float = DEFAULT_TAU_SECS,
    jobs: int = 1,
    chunk_pairs: int = 50_000,
) -> np.ndarray:
    """(len(ta), len(tb), 9) similarities for every pair."""
    na, nb = len(ta), len(tb)
    out = np.empty((na, nb, len(ATTRIBUTES)))
    if na == 0 or nb == 0:
        return out
    rows_per_chunk = max(1, chunk_pairs // nb)
    starts = list(range(0, na, rows_per_chunk))

    def work(r0: int) -> None:
        r1 = min(na, r0 + rows_per_chunk)
        ia = np.repeat(np.arange(r0, r1), nb)
        ib = np.tile(np.arange(nb), r1 - r0)
        out[r0:r1] = pair_similarities(ta, tb, ia, ib, tau_km, tau_secs).reshape(r1 - r0, nb, -1)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, starts))
    else:
        for r0 in starts:
            work(r0)
    return out


def build_similarity_matrix(
    aux_ids: Sequence[str],
    tgt_ids: Sequence[str],
    model: "MatchModel",
    resources: Resources,
    aux: Dataset,
    tgt: Dataset,
    jobs: int = 1,
) -> SimilarityMatrix:
    """Learned pair scores for every (auxiliary, target) combination."""
    from .learner import score_array

    ta = FeatureTable.from_dataset(aux, resources, aux_ids)
    tb = FeatureTable.from_dataset(tgt, resources, tgt_ids)
    sims = similarity_tensor(ta, tb, resources.tau_km, resources.tau_secs, jobs)
    Z = score_array(model, sims.reshape(-1, len(ATTRIBUTES))).reshape(len(ta), len(tb))
    return SimilarityMatrix(tuple(aux_ids), tuple(tgt_ids), Z)
