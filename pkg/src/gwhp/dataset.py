"""Normalization, quarter-turn augmentation, and split construction for
training the surrogate on simulator output."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import fieldio
from .simulate import Sample

T_OFFSET = 10.0  # degC subtracted from temperature before normalization
_UNIT_SLACK = 1e-9


@dataclass(frozen=True)
class NormStats:
    """Per-channel affine map x -> (x - center) / scale with center/scale from
    channel extrema, so in-range values land in [-1, 1]."""

    qx_center: float
    qx_scale: float
    qy_center: float
    qy_scale: float
    t_center: float
    t_scale: float

    def __post_init__(self):
        for name in ("qx_scale", "qy_scale", "t_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    def to_json(self) -> dict:
        return {"qx": [self.qx_center, self.qx_scale],
                "qy": [self.qy_center, self.qy_scale],
                "t": [self.t_center, self.t_scale]}

    @classmethod
    def from_json(cls, doc: dict) -> "NormStats":
        unknown = set(doc) - {"qx", "qy", "t"}
        if unknown:
            raise ValueError(f"unknown NormStats keys: {sorted(unknown)}")
        try:
            (qxc, qxs), (qyc, qys), (tc, ts) = doc["qx"], doc["qy"], doc["t"]
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed NormStats document: {exc}") from exc
        return cls(qxc, qxs, qyc, qys, tc, ts)


@dataclass(frozen=True)
class TrainingPair:
    input: np.ndarray    # (2, ny, nx) normalized qx, qy
    target: np.ndarray   # (1, ny, nx) normalized (T - 10 degC)
    source_id: str
    rotation: int = 0    # degrees, multiple of 90
    out_of_range: bool = False

    def __post_init__(self):
        inp = np.asarray(self.input, dtype=float)
        tgt = np.asarray(self.target, dtype=float)
        if inp.ndim != 3 or inp.shape[0] != 2:
            raise ValueError(f"input must be (2, ny, nx), got {inp.shape}")
        if tgt.shape != (1,) + inp.shape[1:]:
            raise ValueError(f"target must be (1, ny, nx) matching input, got {tgt.shape}")
        if self.rotation % 90 != 0:
            raise ValueError("rotation must be a multiple of 90 degrees")
        object.__setattr__(self, "input", inp)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "rotation", int(self.rotation) % 360)


def _channel_stats(lo: float, hi: float) -> tuple[float, float]:
    center = 0.5 * (hi + lo)
    scale = 0.5 * (hi - lo)
    return center, (scale if scale > 0 else 1.0)


def fit_norm_stats(samples: list[Sample]) -> NormStats:
    """Extrema-based stats over the given samples; T is offset before fitting."""
    if not samples:
        raise ValueError("fit_norm_stats needs at least one sample")
    qx = [s.velocity.x_values for s in samples]
    qy = [s.velocity.y_values for s in samples]
    t = [s.temperature.values - T_OFFSET for s in samples]
    qxc, qxs = _channel_stats(min(a.min() for a in qx), max(a.max() for a in qx))
    qyc, qys = _channel_stats(min(a.min() for a in qy), max(a.max() for a in qy))
    tc, ts = _channel_stats(min(a.min() for a in t), max(a.max() for a in t))
    return NormStats(qxc, qxs, qyc, qys, tc, ts)


def preprocess(sample: Sample, stats: NormStats) -> TrainingPair:
    inp = np.stack([
        (sample.velocity.x_values - stats.qx_center) / stats.qx_scale,
        (sample.velocity.y_values - stats.qy_center) / stats.qy_scale,
    ])
    tgt = ((sample.temperature.values - T_OFFSET) - stats.t_center) / stats.t_scale
    tgt = tgt[np.newaxis]
    oor = max(np.abs(inp).max(), np.abs(tgt).max()) > 1.0 + _UNIT_SLACK
    return TrainingPair(input=inp, target=tgt, source_id=sample.spec.scenario_id,
                        rotation=0, out_of_range=bool(oor))


def denormalize_target(target: np.ndarray, stats: NormStats) -> np.ndarray:
    """Normalized target channel -> absolute temperature (degC)."""
    t = np.asarray(target, dtype=float)
    if t.ndim == 3:
        t = t[0]
    return t * stats.t_scale + stats.t_center + T_OFFSET


def denormalize_input(inp: np.ndarray, stats: NormStats) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(inp, dtype=float)
    return (a[0] * stats.qx_scale + stats.qx_center,
            a[1] * stats.qy_scale + stats.qy_center)


def _rot_image(a: np.ndarray, quarter_turns: int) -> np.ndarray:
    """Counterclockwise geometric rotation of an (..., ny, nx) array laid out
    with row index = y. np.rot90's positive direction is clockwise under this
    axis convention, hence the sign flip."""
    return np.rot90(a, k=-quarter_turns, axes=(-2, -1))


def augment_rotate(pair: TrainingPair, quarter_turns: int) -> TrainingPair:
    """Rotate the pair counterclockwise by 90 deg * quarter_turns: images move
    and the velocity components co-rotate ((qx, qy) -> (-qy, qx) per turn)."""
    if quarter_turns not in (0, 1, 2, 3):
        raise ValueError("quarter_turns must be in {0, 1, 2, 3}")
    ny, nx = pair.input.shape[1:]
    if nx != ny:
        raise ValueError("rotation augmentation requires a square grid")
    if quarter_turns == 0:
        return pair
    qx, qy = pair.input[0], pair.input[1]
    for _ in range(quarter_turns):
        qx, qy = -qy, qx
    inp = np.stack([_rot_image(qx, quarter_turns), _rot_image(qy, quarter_turns)])
    tgt = _rot_image(pair.target, quarter_turns)
    return replace(pair, input=inp, target=np.ascontiguousarray(tgt),
                   rotation=(pair.rotation + 90 * quarter_turns) % 360)


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[TrainingPair, ...]
    validation: tuple[TrainingPair, ...]
    test: tuple[TrainingPair, ...]
    stats: NormStats | None = None

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "validation", tuple(self.validation))
        object.__setattr__(self, "test", tuple(self.test))
        names = ("train", "validation", "test")
        ids = [set(p.source_id for p in getattr(self, n)) for n in names]
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                overlap = ids[a] & ids[b]
                if overlap:
                    raise ValueError(
                        f"source ids in both {names[a]} and {names[b]}: {sorted(overlap)[:3]}")

    def assignment(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for name in ("train", "validation", "test"):
            for p in getattr(self, name):
                out[p.source_id] = name
        return out


def build_splits(samples: list[Sample], seed: int, val_fraction: float = 0.2,
                 test_count: int = 40, augment_per_sample: int = 3) -> DatasetSplit:
    """Hold out test sources, fit stats on the rest, augment the rest with
    distinct quarter turns, then peel whole source groups into validation until
    the requested pair fraction is reached (keeps splits source-disjoint)."""
    if not 0 <= val_fraction < 1:
        raise ValueError("val_fraction must be in [0, 1)")
    if not 0 <= augment_per_sample <= 3:
        raise ValueError("augment_per_sample must be in 0..3 (quarter turns are exact)")
    if test_count < 0 or test_count >= len(samples):
        raise ValueError("need test_count in [0, sample count)")
    ids = [s.spec.scenario_id for s in samples]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate scenario ids in sample list")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    test_sources = [samples[k] for k in order[:test_count]]
    rest = [samples[k] for k in order[test_count:]]

    stats = fit_norm_stats(rest)
    test = [preprocess(s, stats) for s in test_sources]

    groups: list[list[TrainingPair]] = []
    for s in rest:
        base = preprocess(s, stats)
        turns = rng.choice([1, 2, 3], size=augment_per_sample, replace=False)
        groups.append([base] + [augment_rotate(base, int(q)) for q in turns])

    pool_size = sum(len(g) for g in groups)
    val_target = int(round(val_fraction * pool_size))
    group_order = rng.permutation(len(groups))
    validation: list[TrainingPair] = []
    train: list[TrainingPair] = []
    taken = 0
    for gi in group_order:
        if taken < val_target:
            validation.extend(groups[gi])
            taken += len(groups[gi])
        else:
            train.extend(groups[gi])
    if val_fraction > 0 and not train:
        raise ValueError("val_fraction leaves no training pairs")
    return DatasetSplit(train=tuple(train), validation=tuple(validation),
                        test=tuple(test), stats=stats)


# --- persistence ------------------------------------------------------------

PAIR_CHANNELS = ("qx_norm", "qy_norm", "t_norm")


def save_pair(pair: TrainingPair, path) -> None:
    fieldio.write_fields(path, {
        "qx_norm": pair.input[0],
        "qy_norm": pair.input[1],
        "t_norm": pair.target[0],
    })
    meta = {"source_id": pair.source_id, "rotation": pair.rotation,
            "out_of_range": pair.out_of_range}
    Path(path).with_suffix(".json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_pair(path) -> TrainingPair:
    channels = fieldio.read_fields(path)
    missing = [c for c in PAIR_CHANNELS if c not in channels]
    if missing:
        raise ValueError(f"pair container missing channels: {missing}")
    meta = json.loads(Path(path).with_suffix(".json").read_text())
    inp = np.stack([channels["qx_norm"], channels["qy_norm"]]).astype(np.float64)
    tgt = channels["t_norm"][np.newaxis].astype(np.float64)
    return TrainingPair(input=inp, target=tgt, source_id=str(meta["source_id"]),
                        rotation=int(meta.get("rotation", 0)),
                        out_of_range=bool(meta.get("out_of_range", False)))


def write_manifest(path, files: list[dict], master_seed: int,
                   split: dict | None = None, stats: NormStats | None = None) -> None:
    doc = {"version": 1, "master_seed": master_seed, "files": files}
    if split is not None:
        doc["split"] = split
    if stats is not None:
        doc["norm_stats"] = stats.to_json()
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    doc = json.loads(Path(path).read_text())
    for key in ("version", "master_seed", "files"):
        if key not in doc:
            raise ValueError(f"manifest missing key {key!r}")
    if doc["version"] != 1:
        raise ValueError(f"unsupported manifest version {doc['version']}")
    return doc
