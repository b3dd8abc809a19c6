"""Synthetic persons and two noisy profile views of each.

Every experiment runs on data produced here: latent persons carry the "true"
attributes, and each network view is a perturbed, partially observed copy.
The generator also writes the lookup resources the pipeline needs (gazetteer,
name table, organisation list, sentiment and LDA corpora).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .datamodel import (
    Dataset,
    GroundTruth,
    Location,
    Post,
    Profile,
    save_ground_truth,
    save_profiles,
)
from .graph import SocialGraph, generate_synthetic_graph, save_edge_list, split_graph
from .nlp import EntityGazetteers, stopwords
from .similarity import Gazetteer, NameGenderTable

EPOCH0 = 1_500_000_000  # 2017-07-14 UTC
DAY = 86_400
MISSING_KEYS = ("username", "location", "gender", "photo", "freetext", "activity", "posts")

POSITIVE_WORDS = (
    "good great happy love lovely awesome excellent wonderful amazing nice fantastic "
    "brilliant enjoy enjoyed fun glad best perfect beautiful delightful superb cheerful "
    "thrilled grateful excited pleasant smile joy win winning proud"
).split()
NEGATIVE_WORDS = (
    "bad terrible awful hate horrible sad angry worst boring annoying poor disappointing "
    "ugly nasty upset tired broken fail failed miserable lousy gloomy painful sick "
    "lonely worried stressed crying losing dreadful"
).split()

_ONSETS = "b c d f g h j k l m n p r s t v w z br ch cr dr gr kr pl pr sh st tr".split()
_VOWELS = "a e i o u ai ea io ou".split()
_CODAS = ["", "", "", "n", "r", "s", "l", "m", "t"]


@dataclass(frozen=True)
class NoiseConfig:
    """Perturbation applied to one network view."""

    missing: Mapping[str, float] = field(default_factory=lambda: dict.fromkeys(MISSING_KEYS, 0.0))
    username_edits: int = 0
    location_jitter_km: float = 0.0
    location_text_prob: float = 0.0
    activity_keep: float = 1.0
    activity_offset_secs: float = 0.0
    activity_extra: int = 0
    topic_drift: float = 0.0
    sentiment_drift: float = 0.0
    embedding_noise: float = 0.0
    gender_flip: float = 0.0
    freetext_drop: float = 0.0
    private_prob: float = 0.0
    posts_per_profile: int = 10
    seed: int = 0

    def __post_init__(self):
        for key, p in self.missing.items():
            if key not in MISSING_KEYS:
                raise ValueError(f"unknown attribute {key!r} in missing probabilities")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"missing probability for {key} outside [0, 1]")
        for name in ("location_text_prob", "activity_keep", "gender_flip", "freetext_drop", "topic_drift",
                     "private_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("username_edits", "location_jitter_km", "activity_offset_secs", "activity_extra",
                     "sentiment_drift", "embedding_noise", "posts_per_profile"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def p_missing(self, key: str) -> float:
        return float(self.missing.get(key, 0.0))

    def to_json(self) -> dict:
        out = asdict(self)
        out["missing"] = {k: float(self.missing.get(k, 0.0)) for k in MISSING_KEYS}
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "NoiseConfig":
        return cls(**{**obj, "missing": dict(obj.get("missing", {}))})


def _noise(missing: float, **kw) -> NoiseConfig:
    return NoiseConfig(missing=dict.fromkeys(MISSING_KEYS, missing), **kw)


ZERO_NOISE = _noise(0.0)

PRESETS: dict[str, NoiseConfig] = {
    "zero": ZERO_NOISE,
    "low": _noise(
        0.05, username_edits=1, location_jitter_km=5.0, location_text_prob=0.2,
        activity_keep=0.8, activity_offset_secs=600.0, activity_extra=2, topic_drift=0.1,
        sentiment_drift=0.05, embedding_noise=0.03, gender_flip=0.01, freetext_drop=0.1,
    ),
    "medium": _noise(
        0.05, username_edits=2, location_jitter_km=25.0, location_text_prob=0.3,
        activity_keep=0.6, activity_offset_secs=1800.0, activity_extra=5, topic_drift=0.3,
        sentiment_drift=0.1, embedding_noise=0.05, gender_flip=0.05, freetext_drop=0.3,
        private_prob=0.25,
    ),
    "high": _noise(
        0.45, username_edits=6, location_jitter_km=80.0, location_text_prob=0.4,
        activity_keep=0.4, activity_offset_secs=5400.0, activity_extra=10, topic_drift=0.5,
        sentiment_drift=0.2, embedding_noise=0.2, gender_flip=0.1, freetext_drop=0.5,
        private_prob=0.35,
    ),
}


def preset(name: str, seed: int = 0) -> NoiseConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown noise preset {name!r}; choose from {sorted(PRESETS)}")
    return replace(PRESETS[name], seed=seed)


# ---------------------------------------------------------------------------
# Vocabularies and lookup resources


def _pseudo_words(rng: np.random.Generator, count: int, taken: set[str], min_len: int = 4) -> list[str]:
    stop = stopwords()
    out = []
    while len(out) < count:
        n_syl = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl)) + _CODAS[rng.integers(len(_CODAS))]
        if len(w) >= min_len and w not in taken and w not in stop:
            taken.add(w)
            out.append(w)
    return out


@dataclass(frozen=True)
class Vocabularies:
    female_names: tuple[str, ...]
    male_names: tuple[str, ...]
    unisex_names: tuple[str, ...]
    surnames: tuple[str, ...]
    cities: Mapping[str, tuple[float, float]]
    organizations: tuple[str, ...]
    topics: tuple[tuple[str, ...], ...]
    background: tuple[str, ...]

    @property
    def gazetteer(self) -> Gazetteer:
        return Gazetteer({c.lower(): xy for c, xy in self.cities.items()})

    @property
    def name_table(self) -> NameGenderTable:
        counts = {}
        for k, n in enumerate(self.female_names):
            counts[n.lower()] = (5000 + 37 * k, 3 + k % 7)
        for k, n in enumerate(self.male_names):
            counts[n.lower()] = (2 + k % 5, 4000 + 41 * k)
        for k, n in enumerate(self.unisex_names):
            counts[n.lower()] = (900 + 13 * k, 1100 - 7 * k)
        return NameGenderTable(counts)

    @property
    def entity_gazetteers(self) -> EntityGazetteers:
        return EntityGazetteers(
            locations=frozenset(c.lower() for c in self.cities),
            given_names=frozenset(self.name_table.counts),
            organizations=frozenset(o.lower() for o in self.organizations),
        )


def make_vocabularies(seed: int = 0, n_topics: int = 10, words_per_topic: int = 40) -> Vocabularies:
    rng = np.random.default_rng([seed, 101])
    taken = set(POSITIVE_WORDS) | set(NEGATIVE_WORDS)
    cap = str.capitalize
    female = tuple(cap(w) for w in _pseudo_words(rng, 150, taken))
    male = tuple(cap(w) for w in _pseudo_words(rng, 150, taken))
    unisex = tuple(cap(w) for w in _pseudo_words(rng, 30, taken))
    surnames = tuple(_pseudo_words(rng, 600, taken))
    city_names = [cap(w) for w in _pseudo_words(rng, 150, taken, min_len=5)]
    lat = rng.uniform(30.0, 48.0, len(city_names))
    lon = rng.uniform(-122.0, -72.0, len(city_names))
    cities = {c: (round(float(a), 4), round(float(o), 4)) for c, a, o in zip(city_names, lat, lon)}
    orgs = tuple(f"{cap(w)} {s}" for w, s in zip(_pseudo_words(rng, 60, taken),
                                                    np.resize(["Corp", "Labs", "Group", "Partners"], 60)))
    topics = tuple(tuple(_pseudo_words(rng, words_per_topic, taken)) for _ in range(n_topics))
    background = tuple(_pseudo_words(rng, 120, taken))
    return Vocabularies(female, male, unisex, surnames, cities, orgs, topics, background)


def _edge_distance_km(lat: float, km_north: float, km_east: float) -> tuple[float, float]:
    dlat = km_north / 111.32
    dlon = km_east / (111.32 * max(math.cos(math.radians(lat)), 1e-6))
    return dlat, dlon


# ---------------------------------------------------------------------------
# Persons


@dataclass(frozen=True)
class Person:
    index: int
    given: str
    surname: str
    username: str
    gender: str
    home: tuple[float, float]
    city: str
    embedding: np.ndarray = field(repr=False)
    freetext_parts: tuple[tuple[str, str], ...]
    activities: np.ndarray = field(repr=False)
    topic_mixture: np.ndarray = field(repr=False)
    daily_mood: np.ndarray = field(repr=False)


def generate_persons(
    count: int,
    vocab: Vocabularies | None = None,
    seed: int = 0,
    embedding_dim: int = 128,
    days: int = 14,
    base_activities: int = 30,
) -> list[Person]:
    if count < 1:
        raise ValueError("count must be at least 1")
    vocab = vocab or make_vocabularies(seed)
    rng = np.random.default_rng([seed, 202])
    n_topics = len(vocab.topics)
    cities = list(vocab.cities)
    persons = []
    used: set[str] = set()
    for k in range(count):
        roll = rng.random()
        if roll < 0.45:
            gender, given = "female", vocab.female_names[rng.integers(len(vocab.female_names))]
        elif roll < 0.9:
            gender, given = "male", vocab.male_names[rng.integers(len(vocab.male_names))]
        else:
            gender = "female" if rng.random() < 0.5 else "male"
            given = vocab.unisex_names[rng.integers(len(vocab.unisex_names))]
        surname = vocab.surnames[rng.integers(len(vocab.surnames))]
        sep = "_."[int(rng.integers(2))]
        base = f"{given.lower()}{sep}{surname}{int(rng.integers(10, 100))}"
        username, suffix = base, 0
        while username in used:
            suffix += 1
            username = f"{base}{suffix}"
        used.add(username)

        city = cities[rng.integers(len(cities))]
        clat, clon = vocab.cities[city]
        dlat, dlon = _edge_distance_km(clat, *rng.uniform(-15.0, 15.0, 2))
        home = (float(np.clip(clat + dlat, -90, 90)), float(np.clip(clon + dlon, -180, 180)))

        emb = rng.normal(size=embedding_dim)
        emb /= np.linalg.norm(emb)

        parts = _freetext_parts(rng, vocab, city, given)

        # habits: a few preferred hours of the day, spread over the window
        hours = rng.choice(24, size=3, replace=False)
        day_idx = rng.integers(0, days, base_activities)
        hour = hours[rng.integers(0, 3, base_activities)]
        secs = day_idx * DAY + hour * 3600 + rng.integers(0, 3600, base_activities)
        activities = np.sort(EPOCH0 + secs)

        mixture = rng.dirichlet(np.full(n_topics, 0.2))
        base_mood = rng.uniform(0.15, 0.85)
        mood = np.clip(base_mood + rng.normal(0.0, 0.15, days), 0.02, 0.98)
        persons.append(Person(k, given, surname, username, gender, home, city, emb, parts,
                              activities, mixture, mood))
    return persons


def _freetext_parts(rng, vocab: Vocabularies, city: str, given: str) -> tuple[tuple[str, str], ...]:
    options = [
        ("location", f"Living in {city}."),
        ("organization", f"Working at {vocab.organizations[rng.integers(len(vocab.organizations))]}."),
        ("person", f"Friend of {vocab.female_names[rng.integers(len(vocab.female_names))]}."),
        ("date", f"Since {int(rng.integers(1985, 2016))}."),
        ("money", f"Saved ${int(rng.integers(5, 500))} this month."),
        ("percent", f"Running at {int(rng.integers(1, 100))}% today."),
        ("time", f"Up at {int(rng.integers(5, 11))}:{int(rng.integers(0, 6))}0 every day."),
    ]
    n = int(rng.integers(2, 6))
    pick = sorted(rng.choice(len(options), size=n, replace=False))
    return tuple(options[i] for i in pick)


# ---------------------------------------------------------------------------
# Views


def _mutate_username(name: str, edits: int, rng: np.random.Generator) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789_"
    s = list(name)
    for _ in range(edits):
        op = rng.integers(3) if len(s) > 1 else 1
        pos = int(rng.integers(len(s) + (op == 1)))
        if op == 0:
            del s[pos]
        elif op == 1:
            s.insert(pos, alphabet[rng.integers(len(alphabet))])
        else:
            s[pos] = alphabet[rng.integers(len(alphabet))]
    return "".join(s) or name


def _pseudonym(rng: np.random.Generator, vocab: Vocabularies) -> str:
    a = vocab.surnames[rng.integers(len(vocab.surnames))]
    b = vocab.background[rng.integers(len(vocab.background))]
    return f"{a}{b}{int(rng.integers(100, 1000))}"


def _post_text(rng, vocab: Vocabularies, mixture: np.ndarray, mood: float, length: int = 12) -> str:
    topics = rng.choice(len(mixture), size=length, p=mixture)
    words = []
    for t in topics:
        if rng.random() < 0.2:
            words.append(vocab.background[rng.integers(len(vocab.background))])
        else:
            words.append(vocab.topics[t][rng.integers(len(vocab.topics[t]))])
    for _ in range(int(rng.integers(1, 4))):
        pool = POSITIVE_WORDS if rng.random() < mood else NEGATIVE_WORDS
        words.insert(int(rng.integers(len(words) + 1)), pool[rng.integers(len(pool))])
    return " ".join(words)


def make_view(
    person: Person,
    pid: str,
    noise: NoiseConfig,
    vocab: Vocabularies,
    rng: np.random.Generator,
) -> Profile:
    # a private view withholds its identifying fields and uses an unrelated handle
    private = rng.random() < noise.private_prob
    withheld = ("location", "gender", "photo", "freetext") if private else ()
    miss = lambda key: key in withheld or rng.random() < noise.p_missing(key)  # noqa: E731

    username = None
    if not miss("username"):
        if private:
            username = _pseudonym(rng, vocab)
        else:
            username = _mutate_username(person.username, int(rng.integers(0, noise.username_edits + 1)), rng)

    location = None
    if not miss("location"):
        if rng.random() < noise.location_text_prob:
            location = Location(text=person.city)
        else:
            dlat, dlon = _edge_distance_km(person.home[0], *rng.normal(0.0, noise.location_jitter_km, 2))
            location = Location(lat=float(np.clip(person.home[0] + dlat, -90, 90)),
                                lon=float(np.clip(person.home[1] + dlon, -180, 180)))

    gender = "unstated"
    if not miss("gender"):
        gender = person.gender
        if rng.random() < noise.gender_flip:
            gender = "male" if gender == "female" else "female"

    photo = None
    if not miss("photo"):
        e = person.embedding + rng.normal(0.0, noise.embedding_noise, len(person.embedding))
        photo = tuple(float(round(v, 6)) for v in e / np.linalg.norm(e))

    freetext = None
    if not miss("freetext"):
        kept = [text for _, text in person.freetext_parts if rng.random() >= noise.freetext_drop]
        freetext = " ".join(kept) if kept else None

    acts: list[int] = []
    if not miss("activity"):
        keep = person.activities[rng.random(len(person.activities)) < noise.activity_keep]
        shifted = keep + np.rint(rng.normal(0.0, noise.activity_offset_secs, len(keep))).astype(np.int64)
        days = len(person.daily_mood)
        extra = EPOCH0 + rng.integers(0, days * DAY, noise.activity_extra)
        acts = sorted(int(a) for a in np.concatenate([shifted, extra]))

    posts: list[Post] = []
    if not miss("posts") and noise.posts_per_profile > 0:
        drift = rng.dirichlet(np.full(len(person.topic_mixture), 0.5))
        mixture = (1.0 - noise.topic_drift) * person.topic_mixture + noise.topic_drift * drift
        mixture = mixture / mixture.sum()
        days = len(person.daily_mood)
        n_posts = max(1, int(rng.poisson(noise.posts_per_profile)))
        times = np.sort(EPOCH0 + rng.integers(0, days * DAY, n_posts))
        for ts in times:
            d = min(int((ts - EPOCH0) // DAY), days - 1)
            mood = float(np.clip(person.daily_mood[d] + rng.normal(0.0, noise.sentiment_drift), 0.0, 1.0))
            posts.append(Post(int(ts), _post_text(rng, vocab, mixture, mood)))

    return Profile(
        id=pid,
        username=username,
        location=location,
        gender=gender,
        photo_embedding=photo,
        freetext=freetext,
        activities=tuple(acts),
        posts=tuple(posts),
    )


@dataclass
class SynthViews:
    aux: Dataset
    tgt: Dataset
    gt: GroundTruth
    aux_person: dict[str, int]
    tgt_person: dict[str, int]


def emit_views(
    persons: list[Person],
    noise_aux: NoiseConfig,
    noise_tgt: NoiseConfig,
    uncoupled_extra: int = 0,
    vocab: Vocabularies | None = None,
    seed: int = 0,
    role: str = "training",
    n_uncoupled: int | None = None,
    embedding_dim: int = 128,
    id_prefix: str = "",
) -> SynthViews:
    """One profile per person per view.  The last ``2 * uncoupled_extra``
    persons are split so each appears in only one view.  Ground truth couples
    same-person pairs and samples ``n_uncoupled`` cross-person pairs
    (default: as many as coupled)."""
    vocab = vocab or make_vocabularies(seed)
    if 2 * uncoupled_extra > len(persons):
        raise ValueError("not enough persons for the requested extras")
    n_coupled = len(persons) - 2 * uncoupled_extra
    coupled_p = persons[:n_coupled]
    aux_only = persons[n_coupled:n_coupled + uncoupled_extra]
    tgt_only = persons[n_coupled + uncoupled_extra:]
    aux_people = coupled_p + aux_only
    tgt_people = coupled_p + tgt_only

    order_rng = np.random.default_rng([seed, noise_aux.seed, noise_tgt.seed, 303])
    aux_perm = order_rng.permutation(len(aux_people))
    tgt_perm = order_rng.permutation(len(tgt_people))
    rng_a = np.random.default_rng([noise_aux.seed, seed, 1])
    rng_t = np.random.default_rng([noise_tgt.seed, seed, 2])

    aux_profiles, tgt_profiles = [], []
    aux_person, tgt_person = {}, {}
    for slot, k in enumerate(aux_perm):
        pid = f"{id_prefix}a{slot:05d}"
        aux_person[pid] = aux_people[k].index
    for slot, k in enumerate(tgt_perm):
        pid = f"{id_prefix}t{slot:05d}"
        tgt_person[pid] = tgt_people[k].index
    by_index = {p.index: p for p in persons}
    for pid in sorted(aux_person):
        aux_profiles.append(make_view(by_index[aux_person[pid]], pid, noise_aux, vocab, rng_a))
    for pid in sorted(tgt_person):
        tgt_profiles.append(make_view(by_index[tgt_person[pid]], pid, noise_tgt, vocab, rng_t))

    aux = Dataset.from_profiles(aux_profiles, "auxiliary", role, embedding_dim)
    tgt = Dataset.from_profiles(tgt_profiles, "target", role, embedding_dim)
    t_of_person = {v: k for k, v in tgt_person.items()}
    coupled = frozenset((a, t_of_person[p]) for a, p in aux_person.items() if p in t_of_person)

    n_unc = len(coupled) if n_uncoupled is None else n_uncoupled
    uncoupled: set[tuple[str, str]] = set()
    aux_ids, tgt_ids = sorted(aux_person), sorted(tgt_person)
    pair_rng = np.random.default_rng([seed, 404])
    max_pairs = len(aux_ids) * len(tgt_ids) - len(coupled)
    n_unc = min(n_unc, max_pairs)
    while len(uncoupled) < n_unc:
        a = aux_ids[pair_rng.integers(len(aux_ids))]
        t = tgt_ids[pair_rng.integers(len(tgt_ids))]
        if aux_person[a] != tgt_person[t]:
            uncoupled.add((a, t))
    return SynthViews(aux, tgt, GroundTruth(coupled, frozenset(uncoupled)), aux_person, tgt_person)


# ---------------------------------------------------------------------------
# Whole experiments


@dataclass
class SynthExperiment:
    vocab: Vocabularies
    train: SynthViews
    eval: SynthViews
    lda_corpus: list[str]
    sentiment_corpus: list[tuple[str, str]]
    noise_aux: NoiseConfig
    noise_tgt: NoiseConfig
    settings: dict


def sentiment_corpus(vocab: Vocabularies, size: int = 2000, seed: int = 0) -> list[tuple[str, str]]:
    rng = np.random.default_rng([seed, 505])
    out = []
    for k in range(size):
        label = "pos" if k % 2 == 0 else "neg"
        mixture = rng.dirichlet(np.full(len(vocab.topics), 0.3))
        out.append((_post_text(rng, vocab, mixture, 0.9 if label == "pos" else 0.1, length=8), label))
    return out


def make_experiment(
    preset_name: str = "medium",
    seed: int = 0,
    n_train_coupled: int = 1500,
    n_train_uncoupled: int = 1500,
    n_eval: int = 1000,
    n_eval_coupled: int = 500,
    lda_docs: int = 3000,
    noise_aux: NoiseConfig | None = None,
    noise_tgt: NoiseConfig | None = None,
) -> SynthExperiment:
    """Training views (coupled + sampled uncoupled pairs) and disjoint
    evaluation views with ``n_eval`` profiles per side, ``n_eval_coupled`` of
    them belonging to persons present in both."""
    if not 0 <= n_eval_coupled <= n_eval:
        raise ValueError("n_eval_coupled must lie in [0, n_eval]")
    vocab = make_vocabularies(seed)
    noise_aux = noise_aux or preset(preset_name, seed=2 * seed + 11)
    noise_tgt = noise_tgt or preset(preset_name, seed=2 * seed + 12)
    extras = n_eval - n_eval_coupled
    total = n_train_coupled + n_eval_coupled + 2 * extras
    persons = generate_persons(total, vocab, seed)
    train_p = persons[:n_train_coupled]
    eval_p = persons[n_train_coupled:]
    train = emit_views(train_p, noise_aux, noise_tgt, 0, vocab, seed, "training",
                       n_uncoupled=n_train_uncoupled, id_prefix="tr")
    ev = emit_views(eval_p, noise_aux, noise_tgt, extras, vocab, seed + 1, "evaluation",
                    n_uncoupled=0, id_prefix="ev")
    # topic-model corpus from the training side's posts, as a crawler would collect
    posts = [post.text for ds in (train.aux, train.tgt) for p in ds for post in p.posts]
    rng = np.random.default_rng([seed, 606])
    if len(posts) > lda_docs:
        posts = [posts[i] for i in sorted(rng.choice(len(posts), lda_docs, replace=False))]
    settings = {
        "preset": preset_name, "seed": seed, "n_train_coupled": n_train_coupled,
        "n_train_uncoupled": n_train_uncoupled, "n_eval": n_eval, "n_eval_coupled": n_eval_coupled,
        "lda_docs": lda_docs,
    }
    return SynthExperiment(vocab, train, ev, posts, sentiment_corpus(vocab, seed=seed),
                           noise_aux, noise_tgt, settings)


def write_experiment(exp: SynthExperiment, out: str | Path) -> dict[str, str]:
    """Write datasets, ground truth and resources; returns the file map."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "aux_train": "aux_train.jsonl", "tgt_train": "tgt_train.jsonl", "gt_train": "gt_train.csv",
        "aux_eval": "aux_eval.jsonl", "tgt_eval": "tgt_eval.jsonl", "gt_eval": "gt_eval.csv",
        "gazetteer": "gazetteer.csv", "names": "names.csv", "organizations": "organizations.txt",
        "sentiment_corpus": "sentiment.tsv", "lda_corpus": "lda_corpus.txt",
        "noise_aux": "noise_aux.json", "noise_tgt": "noise_tgt.json",
    }
    save_profiles(exp.train.aux, out / files["aux_train"])
    save_profiles(exp.train.tgt, out / files["tgt_train"])
    save_ground_truth(exp.train.gt, out / files["gt_train"])
    save_profiles(exp.eval.aux, out / files["aux_eval"])
    save_profiles(exp.eval.tgt, out / files["tgt_eval"])
    save_ground_truth(exp.eval.gt, out / files["gt_eval"])
    write_resources(exp.vocab, out, files)
    with open(out / files["sentiment_corpus"], "w", encoding="utf-8") as fh:
        for text, label in exp.sentiment_corpus:
            fh.write(f"{label}\t{text}\n")
    with open(out / files["lda_corpus"], "w", encoding="utf-8") as fh:
        for doc in exp.lda_corpus:
            fh.write(doc.replace("\n", " ") + "\n")
    (out / files["noise_aux"]).write_text(json.dumps(exp.noise_aux.to_json(), indent=2, sort_keys=True) + "\n")
    (out / files["noise_tgt"]).write_text(json.dumps(exp.noise_tgt.to_json(), indent=2, sort_keys=True) + "\n")
    return files


def write_resources(vocab: Vocabularies, out: Path, files: Mapping[str, str]) -> None:
    with open(out / files["gazetteer"], "w", encoding="utf-8") as fh:
        fh.write("name,lat,lon\n")
        for name, (lat, lon) in sorted(vocab.cities.items()):
            fh.write(f"{name},{lat},{lon}\n")
    with open(out / files["names"], "w", encoding="utf-8") as fh:
        for name, (f, m) in sorted(vocab.name_table.counts.items()):
            if f:
                fh.write(f"{name.capitalize()},F,{f}\n")
            if m:
                fh.write(f"{name.capitalize()},M,{m}\n")
    with open(out / files["organizations"], "w", encoding="utf-8") as fh:
        for org in vocab.organizations:
            fh.write(org + "\n")


# ---------------------------------------------------------------------------
# Graph-only experiments


@dataclass
class GraphExperiment:
    aux_graph: SocialGraph
    tgt_graph: SocialGraph
    train: SynthViews
    eval: SynthViews


def make_graph_experiment(
    num_nodes: int = 5000,
    attach_m: int = 5,
    edge_overlap: float = 0.9,
    seed: int = 0,
    n_train_coupled: int = 1500,
    n_train_uncoupled: int = 1500,
    n_eval: int = 1000,
    n_eval_coupled: int = 500,
    graph: SocialGraph | None = None,
) -> GraphExperiment:
    """Split one preferential-attachment graph into two views and build
    profiles carrying only neighbour lists.  Target node ids are relabelled
    by a random permutation so ids leak nothing about the coupling."""
    g = graph or generate_synthetic_graph(num_nodes, attach_m, seed)
    g_aux, g_tgt = split_graph(g, edge_overlap, 1.0, seed=seed + 1)
    nodes = sorted(g.nodes, key=int) if all(n.isdigit() for n in g.nodes) else sorted(g.nodes)
    rng = np.random.default_rng([seed, 707])
    relabel = {n: f"t{k:05d}" for n, k in zip(nodes, rng.permutation(len(nodes)))}
    aux_name = {n: f"a{k:05d}" for n, k in zip(nodes, rng.permutation(len(nodes)))}
    aux_graph = SocialGraph.from_edges(((aux_name[u], aux_name[v]) for u, v in g_aux.edges()),
                                       aux_name.values())
    tgt_graph = SocialGraph.from_edges(((relabel[u], relabel[v]) for u, v in g_tgt.edges()),
                                       relabel.values())
    extras = n_eval - n_eval_coupled
    need = n_train_coupled + n_eval_coupled + 2 * extras
    if need > len(nodes):
        raise ValueError(f"graph has {len(nodes)} nodes, experiment needs {need}")
    chosen = [nodes[k] for k in rng.permutation(len(nodes))[:need]]
    train_nodes = chosen[:n_train_coupled]
    eval_coupled = chosen[n_train_coupled:n_train_coupled + n_eval_coupled]
    aux_only = chosen[n_train_coupled + n_eval_coupled:n_train_coupled + n_eval_coupled + extras]
    tgt_only = chosen[n_train_coupled + n_eval_coupled + extras:]

    def views(aux_nodes, tgt_nodes, role, n_unc, sub_seed):
        aux = Dataset.from_profiles(
            (Profile(aux_name[n], neighbors=tuple(sorted(aux_graph.adjacency[aux_name[n]])))
             for n in sorted(aux_nodes, key=aux_name.get)), "auxiliary", role)
        tgt = Dataset.from_profiles(
            (Profile(relabel[n], neighbors=tuple(sorted(tgt_graph.adjacency[relabel[n]])))
             for n in sorted(tgt_nodes, key=relabel.get)), "target", role)
        aset = set(aux_nodes)
        coupled = frozenset((aux_name[n], relabel[n]) for n in tgt_nodes if n in aset)
        unc: set[tuple[str, str]] = set()
        prng = np.random.default_rng([seed, sub_seed])
        a_list, t_list = list(aux_nodes), list(tgt_nodes)
        while len(unc) < n_unc:
            a = a_list[prng.integers(len(a_list))]
            t = t_list[prng.integers(len(t_list))]
            if a != t:
                unc.add((aux_name[a], relabel[t]))
        return SynthViews(aux, tgt, GroundTruth(coupled, frozenset(unc)),
                          {aux_name[n]: int(n) if n.isdigit() else 0 for n in aux_nodes},
                          {relabel[n]: int(n) if n.isdigit() else 0 for n in tgt_nodes})

    train = views(train_nodes, train_nodes, "training", n_train_uncoupled, 808)
    ev = views(eval_coupled + aux_only, eval_coupled + tgt_only, "evaluation", 0, 909)
    return GraphExperiment(aux_graph, tgt_graph, train, ev)


def write_graph_views(aux_graph: SocialGraph, tgt_graph: SocialGraph, out: str | Path) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(aux_graph, out / "aux_edges.txt")
    save_edge_list(tgt_graph, out / "tgt_edges.txt")
