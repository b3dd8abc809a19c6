"""Text-derived attributes: LDA interests, naive-Bayes sentiment and a
rule/gazetteer entity tagger for profile freetext."""

from __future__ import annotations

import json
import math
import re
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from numba import njit

from .datamodel import Post

ENTITY_CATEGORIES = ("location", "person", "organization", "money", "percent", "date", "time")

_TOKEN_RE = re.compile(r"[^\W_]+")


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = importlib_resources.files("profilematch").joinpath("data/stopwords.txt").read_text()
    return frozenset(w.strip() for w in text.split() if w.strip())


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stopwords."""
    stop = stopwords()
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 3 and t not in stop]


# ---------------------------------------------------------------------------
# LDA


@dataclass(frozen=True)
class LdaModel:
    K: int
    vocabulary: Mapping[str, int]
    topic_word: np.ndarray = field(repr=False)
    alpha: float
    beta: float
    rng_seed: int
    iterations: int = 0

    def to_json(self) -> dict:
        words = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "K": self.K,
            "alpha": self.alpha,
            "beta": self.beta,
            "rng_seed": self.rng_seed,
            "iterations": self.iterations,
            "vocabulary": words,
            "topic_word": self.topic_word.tolist(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "LdaModel":
        return cls(
            K=int(obj["K"]),
            vocabulary={w: i for i, w in enumerate(obj["vocabulary"])},
            topic_word=np.asarray(obj["topic_word"], dtype=float),
            alpha=float(obj["alpha"]),
            beta=float(obj["beta"]),
            rng_seed=int(obj["rng_seed"]),
            iterations=int(obj.get("iterations", 0)),
        )

    def encode(self, text: str) -> np.ndarray:
        voc = self.vocabulary
        return np.array([voc[t] for t in tokenize(text) if t in voc], dtype=np.int64)


@njit(cache=True)
def _lda_gibbs(words, docs, n_docs, K, V, alpha, beta, iterations, seed):
    np.random.seed(seed)
    n = words.shape[0]
    z = np.empty(n, dtype=np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    ndk = np.zeros((n_docs, K), dtype=np.int64)
    nk = np.zeros(K, dtype=np.int64)
    for i in range(n):
        k = np.random.randint(0, K)
        z[i] = k
        nkw[k, words[i]] += 1
        ndk[docs[i], k] += 1
        nk[k] += 1
    cum = np.empty(K)
    vbeta = V * beta
    for _ in range(iterations):
        for i in range(n):
            w = words[i]
            d = docs[i]
            k = z[i]
            nkw[k, w] -= 1
            ndk[d, k] -= 1
            nk[k] -= 1
            total = 0.0
            for t in range(K):
                total += (nkw[t, w] + beta) / (nk[t] + vbeta) * (ndk[d, t] + alpha)
                cum[t] = total
            r = np.random.random() * total
            k = 0
            while k < K - 1 and cum[k] <= r:
                k += 1
            z[i] = k
            nkw[k, w] += 1
            ndk[d, k] += 1
            nk[k] += 1
    return nkw, ndk


@njit(cache=True)
def _lda_infer(words, offsets, seeds, phi, alpha, sweeps):
    """Held-out inference per document with topic-word probabilities fixed.
    Returns per-document topic distributions averaged over the second half of
    the sweeps."""
    K = phi.shape[0]
    n_docs = offsets.shape[0] - 1
    out = np.zeros((n_docs, K))
    cum = np.empty(K)
    burn = sweeps // 2
    for d in range(n_docs):
        np.random.seed(seeds[d])
        lo = offsets[d]
        hi = offsets[d + 1]
        m = hi - lo
        z = np.empty(m, dtype=np.int64)
        nd = np.zeros(K)
        for i in range(m):
            k = np.random.randint(0, K)
            z[i] = k
            nd[k] += 1
        acc = np.zeros(K)
        kept = 0
        for s in range(sweeps):
            for i in range(m):
                w = words[lo + i]
                nd[z[i]] -= 1
                total = 0.0
                for t in range(K):
                    total += phi[t, w] * (nd[t] + alpha)
                    cum[t] = total
                r = np.random.random() * total
                k = 0
                while k < K - 1 and cum[k] <= r:
                    k += 1
                z[i] = k
                nd[k] += 1
            if s >= burn:
                for t in range(K):
                    acc[t] += (nd[t] + alpha) / (m + K * alpha)
                kept += 1
        for t in range(K):
            out[d, t] = acc[t] / kept
    return out


def train_lda(
    corpus: Sequence[str],
    K: int = 20,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
) -> LdaModel:
    """Collapsed Gibbs sampling over the tokenised corpus."""
    if K < 2:
        raise ValueError("K must be at least 2")
    if alpha is None:
        alpha = 50.0 / K
    docs_tokens = [tokenize(d) for d in corpus]
    docs_tokens = [d for d in docs_tokens if d]
    if not corpus or not docs_tokens:
        raise ValueError("corpus is empty after tokenisation")
    vocab: dict[str, int] = {}
    for doc in docs_tokens:
        for t in doc:
            if t not in vocab:
                vocab[t] = len(vocab)
    words = np.array([vocab[t] for doc in docs_tokens for t in doc], dtype=np.int64)
    docs = np.repeat(np.arange(len(docs_tokens)), [len(d) for d in docs_tokens]).astype(np.int64)
    nkw, _ = _lda_gibbs(words, docs, len(docs_tokens), K, len(vocab), float(alpha), float(beta),
                        int(iterations), int(seed) % (2**32))
    phi = (nkw + beta) / (nkw.sum(axis=1, keepdims=True) + len(vocab) * beta)
    phi /= phi.sum(axis=1, keepdims=True)
    return LdaModel(K, vocab, phi, float(alpha), float(beta), int(seed), int(iterations))


def _doc_seed(model_seed: int, ids: np.ndarray) -> int:
    return zlib.crc32(ids.astype("<i8").tobytes(), model_seed % (2**32))


def infer_post_topics(model: LdaModel, texts: Sequence[str], sweeps: int = 100) -> np.ndarray:
    """Topic distribution per text (rows), NaN rows for texts with no known token."""
    encoded = [model.encode(t) for t in texts]
    keep = [i for i, e in enumerate(encoded) if len(e)]
    out = np.full((len(texts), model.K), np.nan)
    if not keep:
        return out
    words = np.concatenate([encoded[i] for i in keep])
    offsets = np.zeros(len(keep) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(encoded[i]) for i in keep])
    seeds = np.array([_doc_seed(model.rng_seed, encoded[i]) for i in keep], dtype=np.int64)
    theta = _lda_infer(words, offsets, seeds, model.topic_word, model.alpha, int(sweeps))
    theta /= theta.sum(axis=1, keepdims=True)
    out[keep] = theta
    return out


def infer_topics(model: LdaModel, user_posts: Iterable[str], sweeps: int = 100) -> np.ndarray | None:
    """Mean of the per-post topic distributions; ``None`` when no post has an
    in-vocabulary token."""
    texts = list(user_posts)
    if not texts:
        return None
    theta = infer_post_topics(model, texts, sweeps)
    theta = theta[~np.isnan(theta[:, 0])]
    if len(theta) == 0:
        return None
    mean = theta.mean(axis=0)
    return mean / mean.sum()


def jensen_shannon(p: np.ndarray, q: np.ndarray) -> float:
    """Base-2 Jensen-Shannon divergence, in [0, 1]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = 0.5 * (p + q)

    def kl(a):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / m[mask])))

    return min(max(0.5 * kl(p) + 0.5 * kl(q), 0.0), 1.0)


def interest_similarity(d_a: np.ndarray, d_b: np.ndarray) -> float:
    if len(d_a) != len(d_b):
        raise ValueError("topic distributions have different K")
    return 1.0 - jensen_shannon(d_a, d_b)


def save_lda(model: LdaModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_json()))


def load_lda(path: str | Path) -> LdaModel:
    return LdaModel.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Sentiment


@dataclass(frozen=True)
class SentimentModel:
    vocabulary: Mapping[str, int]
    log_prob: np.ndarray = field(repr=False)  # (2, V): row 0 negative, row 1 positive
    log_prior: np.ndarray = field(repr=False)  # (2,)
    smoothing: float = 1.0

    def score(self, text: str) -> float:
        """Posterior probability that ``text`` is positive."""
        idx = [self.vocabulary[t] for t in tokenize(text) if t in self.vocabulary]
        logp = self.log_prior + self.log_prob[:, idx].sum(axis=1)
        return float(1.0 / (1.0 + math.exp(logp[0] - logp[1])))

    def classify(self, text: str) -> str:
        return "pos" if self.score(text) > 0.5 else "neg"

    def to_json(self) -> dict:
        words = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "vocabulary": words,
            "log_prob": self.log_prob.tolist(),
            "log_prior": self.log_prior.tolist(),
            "smoothing": self.smoothing,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SentimentModel":
        return cls(
            {w: i for i, w in enumerate(obj["vocabulary"])},
            np.asarray(obj["log_prob"], dtype=float),
            np.asarray(obj["log_prior"], dtype=float),
            float(obj.get("smoothing", 1.0)),
        )


def train_sentiment(labeled: Iterable[tuple[str, str]], smoothing: float = 1.0) -> SentimentModel:
    """Multinomial naive Bayes with Laplace smoothing."""
    rows = [(tokenize(text), label) for text, label in labeled]
    for _, label in rows:
        if label not in ("pos", "neg"):
            raise ValueError(f"label must be 'pos' or 'neg', got {label!r}")
    labels = {label for _, label in rows}
    if labels != {"pos", "neg"}:
        raise ValueError("sentiment corpus needs both positive and negative examples")
    vocab: dict[str, int] = {}
    for toks, _ in rows:
        for t in toks:
            vocab.setdefault(t, len(vocab))
    counts = np.zeros((2, len(vocab)))
    docs = np.zeros(2)
    for toks, label in rows:
        c = 1 if label == "pos" else 0
        docs[c] += 1
        for t in toks:
            counts[c, vocab[t]] += 1
    smoothed = counts + smoothing
    log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    log_prior = np.log(docs / docs.sum())
    return SentimentModel(vocab, log_prob, log_prior, smoothing)


def load_sentiment_corpus(path: str | Path) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep or label not in ("pos", "neg"):
                raise ValueError(f"{path}:{lineno}: expected 'pos|neg<TAB>text'")
            out.append((text, label))
    return out


def save_sentiment(model: SentimentModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_json()))


def load_sentiment(path: str | Path) -> SentimentModel:
    return SentimentModel.from_json(json.loads(Path(path).read_text()))


def utc_day(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).date().isoformat()


def daily_profile(model: SentimentModel, posts: Iterable[Post]) -> dict[str, float]:
    """Mean positive probability per UTC day."""
    by_day: dict[str, list[float]] = {}
    for post in posts:
        by_day.setdefault(utc_day(post.ts), []).append(model.score(post.text))
    return {day: sum(v) / len(v) for day, v in sorted(by_day.items())}


def sentiment_similarity(s_a: Mapping[str, float], s_b: Mapping[str, float]) -> float | None:
    common = sorted(set(s_a) & set(s_b))
    if not common:
        return None
    diff = sum(abs(s_a[d] - s_b[d]) for d in common) / len(common)
    return min(max(1.0 - diff, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Entity tagging


@dataclass(frozen=True)
class EntityGazetteers:
    locations: frozenset[str] = frozenset()
    given_names: frozenset[str] = frozenset()
    organizations: frozenset[str] = frozenset()

    @property
    def max_ngram(self) -> int:
        names = list(self.locations) + list(self.organizations)
        return max((len(n.split()) for n in names), default=1)


_MONTHS = r"(?:jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec)[a-z]*"
_PATTERNS = [
    ("money", re.compile(r"\$\s?\d[\d,]*(?:\.\d+)?|\b\d[\d,]*(?:\.\d+)?\s?(?:dollars?|usd|euros?)\b", re.I)),
    ("percent", re.compile(r"\b\d+(?:\.\d+)?\s?(?:%|percent\b)", re.I)),
    ("time", re.compile(r"\b(?:[01]?\d|2[0-3]):[0-5]\d(?:\s?[ap]\.?m\.?)?|\b(?:1[0-2]|0?[1-9])\s?[ap]\.?m\b", re.I)),
    ("date", re.compile(
        r"\b\d{4}-\d{1,2}-\d{1,2}\b|\b\d{1,2}/\d{1,2}/\d{2,4}\b"
        r"|\b" + _MONTHS + r"\.?\s+\d{1,2}(?:st|nd|rd|th)?(?:,?\s+\d{4})?\b"
        r"|\b(?:19|20)\d{2}\b", re.I)),
]
_WORD_RE = re.compile(r"[^\W\d_][^\W_]*(?:['\-][^\W\d_]+)*")


def extract_entities(text: str, gazetteers: EntityGazetteers | None = None) -> np.ndarray:
    """Counts over (location, person, organization, money, percent, date, time)."""
    counts = dict.fromkeys(ENTITY_CATEGORIES, 0)
    if text:
        chars = list(text)
        for name, pattern in _PATTERNS:
            masked = "".join(chars)
            for m in pattern.finditer(masked):
                counts[name] += 1
                chars[m.start():m.end()] = " " * (m.end() - m.start())
        rest = "".join(chars)
        if gazetteers is not None:
            _count_named(rest, gazetteers, counts)
    return np.array([counts[c] for c in ENTITY_CATEGORIES], dtype=np.int64)


def _count_named(text: str, gaz: EntityGazetteers, counts: dict[str, int]) -> None:
    words = _WORD_RE.findall(text)
    lower = [w.lower() for w in words]
    max_n = gaz.max_ngram
    i = 0
    while i < len(words):
        for n in range(min(max_n, len(words) - i), 0, -1):
            phrase = " ".join(lower[i:i + n])
            if phrase in gaz.locations:
                counts["location"] += 1
                break
            if phrase in gaz.organizations:
                counts["organization"] += 1
                break
        else:
            if words[i][0].isupper() and lower[i] in gaz.given_names:
                counts["person"] += 1
            n = 1
        i += n


def load_organizations(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())
