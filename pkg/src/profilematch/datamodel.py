"""Profiles, datasets, ground truth and similarity containers.

Profiles are read from JSONL (one object per line) and ground truth from a
``aux_id,target_id,label`` CSV.  Everything here is immutable after load.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

ATTRIBUTES: tuple[str, ...] = (
    "username",
    "location",
    "gender",
    "photo",
    "freetext",
    "activity",
    "interest",
    "sentiment",
    "graph",
)

STRONG_ATTRIBUTES = ("username", "location", "gender", "photo")
WEAK_ATTRIBUTES = ("activity", "freetext", "interest", "sentiment")
GRAPH_ATTRIBUTES = ("graph",)

ATTRIBUTE_SETS: dict[str, tuple[str, ...]] = {
    "all": ATTRIBUTES,
    "strong": STRONG_ATTRIBUTES,
    "weak": WEAK_ATTRIBUTES,
    "graph": GRAPH_ATTRIBUTES,
}

NETWORK_LABELS = ("auxiliary", "target")
ROLES = ("training", "evaluation")
GENDERS = ("male", "female", "unstated")
DEFAULT_EMBEDDING_DIM = 128


class DataError(ValueError):
    """Raised when an input file or object violates the data invariants."""


@dataclass(frozen=True)
class Location:
    text: str | None = None
    lat: float | None = None
    lon: float | None = None

    @property
    def has_coords(self) -> bool:
        return self.lat is not None and self.lon is not None


@dataclass(frozen=True)
class Post:
    ts: int
    text: str


@dataclass(frozen=True)
class Profile:
    id: str
    username: str | None = None
    location: Location | None = None
    gender: str = "unstated"
    photo_embedding: tuple[float, ...] | None = None
    freetext: str | None = None
    activities: tuple[int, ...] = ()
    posts: tuple[Post, ...] = ()
    neighbors: tuple[str, ...] = ()

    def validate(self, embedding_dim: int | None = None) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise DataError("profile id must be a non-empty string")
        if any(b < a for a, b in zip(self.activities, self.activities[1:])):
            raise DataError(f"profile {self.id!r}: activities must be sorted non-decreasing")
        if self.gender not in GENDERS:
            raise DataError(f"profile {self.id!r}: bad gender {self.gender!r}")
        if self.photo_embedding is not None:
            if embedding_dim is not None and len(self.photo_embedding) != embedding_dim:
                raise DataError(
                    f"profile {self.id!r}: photo_embedding has dimension "
                    f"{len(self.photo_embedding)}, expected {embedding_dim}"
                )
            if not all(math.isfinite(v) for v in self.photo_embedding):
                raise DataError(f"profile {self.id!r}: non-finite photo_embedding")
        loc = self.location
        if loc is not None:
            if (loc.lat is None) != (loc.lon is None):
                raise DataError(f"profile {self.id!r}: location needs both lat and lon")
            if loc.lat is not None and not -90.0 <= loc.lat <= 90.0:
                raise DataError(f"profile {self.id!r}: latitude {loc.lat} out of range")
            if loc.lon is not None and not -180.0 <= loc.lon <= 180.0:
                raise DataError(f"profile {self.id!r}: longitude {loc.lon} out of range")
        if self.id in self.neighbors:
            raise DataError(f"profile {self.id!r}: lists itself as a neighbor")

    # JSON round trip ---------------------------------------------------

    @classmethod
    def from_json(cls, obj: Mapping) -> "Profile":
        if not isinstance(obj, Mapping):
            raise DataError("profile record must be a JSON object")
        if "id" not in obj:
            raise DataError("profile record has no 'id'")
        loc = obj.get("location")
        location = None
        if loc is not None:
            if not isinstance(loc, Mapping):
                raise DataError("location must be an object")
            lat, lon = loc.get("lat"), loc.get("lon")
            location = Location(
                text=loc.get("text"),
                lat=None if lat is None else float(lat),
                lon=None if lon is None else float(lon),
            )
            if location.text is None and not location.has_coords and lat is None and lon is None:
                location = None
        emb = obj.get("photo_embedding")
        posts = tuple(Post(int(p["ts"]), str(p["text"])) for p in obj.get("posts") or ())
        return cls(
            id=obj["id"],
            username=obj.get("username"),
            location=location,
            gender=obj.get("gender") or "unstated",
            photo_embedding=None if emb is None else tuple(float(v) for v in emb),
            freetext=obj.get("freetext"),
            activities=tuple(int(a) for a in obj.get("activities") or ()),
            posts=posts,
            neighbors=tuple(str(n) for n in obj.get("neighbors") or ()),
        )

    def to_json(self) -> dict:
        out: dict = {"id": self.id}
        if self.username is not None:
            out["username"] = self.username
        if self.location is not None:
            loc = {}
            if self.location.text is not None:
                loc["text"] = self.location.text
            if self.location.lat is not None:
                loc["lat"] = self.location.lat
                loc["lon"] = self.location.lon
            out["location"] = loc
        if self.gender != "unstated":
            out["gender"] = self.gender
        if self.photo_embedding is not None:
            out["photo_embedding"] = list(self.photo_embedding)
        if self.freetext is not None:
            out["freetext"] = self.freetext
        if self.activities:
            out["activities"] = list(self.activities)
        if self.posts:
            out["posts"] = [{"ts": p.ts, "text": p.text} for p in self.posts]
        if self.neighbors:
            out["neighbors"] = list(self.neighbors)
        return out


@dataclass(frozen=True)
class Dataset:
    network_label: str
    role: str
    profiles: Mapping[str, Profile]
    embedding_dim: int = DEFAULT_EMBEDDING_DIM

    def __post_init__(self):
        if self.network_label not in NETWORK_LABELS:
            raise DataError(f"unknown network label {self.network_label!r}")
        if self.role not in ROLES:
            raise DataError(f"unknown role {self.role!r}")
        if self.embedding_dim < 1:
            raise DataError("embedding_dim must be positive")

    @classmethod
    def from_profiles(
        cls,
        profiles: Iterable[Profile],
        network_label: str,
        role: str,
        embedding_dim: int = DEFAULT_EMBEDDING_DIM,
    ) -> "Dataset":
        table: dict[str, Profile] = {}
        for p in profiles:
            p.validate(embedding_dim)
            if p.id in table:
                raise DataError(f"duplicate profile id {p.id!r}")
            table[p.id] = p
        return cls(network_label, role, table, embedding_dim)

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self) -> Iterator[Profile]:
        return iter(self.profiles.values())

    def __contains__(self, pid: str) -> bool:
        return pid in self.profiles

    def __getitem__(self, pid: str) -> Profile:
        return self.profiles[pid]

    @property
    def ids(self) -> list[str]:
        return list(self.profiles)

    def subset(self, ids: Sequence[str], role: str | None = None) -> "Dataset":
        missing = [i for i in ids if i not in self.profiles]
        if missing:
            raise DataError(f"unknown profile id {missing[0]!r}")
        return Dataset(
            self.network_label,
            role or self.role,
            {i: self.profiles[i] for i in ids},
            self.embedding_dim,
        )


@dataclass(frozen=True)
class GroundTruth:
    coupled: frozenset[tuple[str, str]] = frozenset()
    uncoupled: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        both = self.coupled & self.uncoupled
        if both:
            raise DataError(f"pair {sorted(both)[0]} is both coupled and uncoupled")
        seen_a: set[str] = set()
        seen_t: set[str] = set()
        for a, t in sorted(self.coupled):
            if a in seen_a:
                raise DataError(f"auxiliary id {a!r} is coupled twice")
            if t in seen_t:
                raise DataError(f"target id {t!r} is coupled twice")
            seen_a.add(a)
            seen_t.add(t)

    def partner_of_target(self) -> dict[str, str]:
        return {t: a for a, t in self.coupled}

    def restrict(self, aux_ids: Iterable[str], tgt_ids: Iterable[str]) -> "GroundTruth":
        aset, tset = set(aux_ids), set(tgt_ids)
        keep = lambda pairs: frozenset((a, t) for a, t in pairs if a in aset and t in tset)  # noqa: E731
        return GroundTruth(keep(self.coupled), keep(self.uncoupled))


@dataclass(frozen=True)
class SimilarityVector:
    """Per-attribute similarities for one (auxiliary, target) pair; ``None`` is MISSING."""

    username: float | None = None
    location: float | None = None
    gender: float | None = None
    photo: float | None = None
    freetext: float | None = None
    activity: float | None = None
    interest: float | None = None
    sentiment: float | None = None
    graph: float | None = None

    def __post_init__(self):
        for name in ATTRIBUTES:
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} similarity {v} outside [0, 1]")

    def as_array(self, order: Sequence[str] = ATTRIBUTES) -> np.ndarray:
        """Values in ``order`` with NaN for MISSING."""
        return np.array(
            [np.nan if getattr(self, a) is None else getattr(self, a) for a in order],
            dtype=float,
        )

    @classmethod
    def from_array(cls, values: Sequence[float], order: Sequence[str] = ATTRIBUTES):
        kw = {}
        for name, v in zip(order, values):
            kw[name] = None if v is None or np.isnan(v) else float(v)
        return cls(**kw)

    def present(self) -> dict[str, float]:
        return {a: getattr(self, a) for a in ATTRIBUTES if getattr(self, a) is not None}


@dataclass(frozen=True)
class SimilarityMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    Z: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.Z.shape != (len(self.rows), len(self.cols)):
            raise ValueError(
                f"matrix shape {self.Z.shape} does not match {len(self.rows)}x{len(self.cols)} ids"
            )
        if not np.all(np.isfinite(self.Z)):
            raise ValueError("similarity matrix has non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.Z.shape


# ---------------------------------------------------------------------------
# File IO


def load_profiles(
    path: str | Path,
    network_label: str,
    role: str,
    embedding_dim: int = DEFAULT_EMBEDDING_DIM,
) -> Dataset:
    table: dict[str, Profile] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                profile = Profile.from_json(json.loads(line))
                profile.validate(embedding_dim)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            except (DataError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if profile.id in table:
                raise DataError(f"{path}:{lineno}: duplicate profile id {profile.id!r}")
            table[profile.id] = profile
    return Dataset(network_label, role, table, embedding_dim)


def save_profiles(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in dataset:
            fh.write(json.dumps(p.to_json(), separators=(",", ":")) + "\n")


def load_ground_truth(path: str | Path, aux: Dataset, tgt: Dataset) -> GroundTruth:
    coupled: set[tuple[str, str]] = set()
    uncoupled: set[tuple[str, str]] = set()
    used_a: dict[str, int] = {}
    used_t: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return GroundTruth()
        if [h.strip() for h in header] != ["aux_id", "target_id", "label"]:
            raise DataError(f"{path}: expected header aux_id,target_id,label, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns")
            a, t, label = (c.strip() for c in row)
            if a not in aux:
                raise DataError(f"{path}:{lineno}: unknown auxiliary id {a!r}")
            if t not in tgt:
                raise DataError(f"{path}:{lineno}: unknown target id {t!r}")
            if label == "1":
                if a in used_a:
                    raise DataError(f"{path}:{lineno}: auxiliary id {a!r} coupled twice")
                if t in used_t:
                    raise DataError(f"{path}:{lineno}: target id {t!r} coupled twice")
                used_a[a] = used_t[t] = lineno
                coupled.add((a, t))
            elif label == "0":
                uncoupled.add((a, t))
            else:
                raise DataError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
    return GroundTruth(frozenset(coupled), frozenset(uncoupled))


def save_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["aux_id", "target_id", "label"])
        for a, t in sorted(gt.coupled):
            w.writerow([a, t, 1])
        for a, t in sorted(gt.uncoupled):
            w.writerow([a, t, 0])
