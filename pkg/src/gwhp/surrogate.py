"""U-shaped convolutional surrogate mapping 2-channel Darcy velocity images to
1-channel steady temperature images, plus training, inference, and the model
file format."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .grid import ScalarField, VectorField
from .dataset import DatasetSplit, NormStats, denormalize_target

MODEL_MAGIC = b"GWNN"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    levels: int = 4
    base_channels: int = 36
    channel_schedule: tuple[int, ...] = (36, 72, 144, 144)
    kernel_size: int = 3
    bottleneck_spatial: int = 4
    activation: str = "relu"
    skip_connections: bool = True

    def __post_init__(self):
        object.__setattr__(self, "channel_schedule", tuple(int(c) for c in self.channel_schedule))
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if len(self.channel_schedule) != self.levels:
            raise ValueError("channel_schedule length must equal levels")
        if any(c < 1 for c in self.channel_schedule):
            raise ValueError("channel counts must be positive")
        if self.channel_schedule[0] != self.base_channels:
            raise ValueError("base_channels must equal channel_schedule[0]")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd (same-padding halving convs)")
        if self.bottleneck_spatial <= 1:
            raise ValueError("bottleneck_spatial must exceed 1 pixel")
        if self.activation != "relu":
            raise ValueError("only rectified-linear activation is supported")

    @property
    def input_size(self) -> int:
        """Square spatial input size implied by depth and bottleneck size."""
        return self.bottleneck_spatial * (2 ** self.levels)

    def to_json(self) -> dict:
        return {"levels": self.levels, "base_channels": self.base_channels,
                "channel_schedule": list(self.channel_schedule),
                "kernel_size": self.kernel_size,
                "bottleneck_spatial": self.bottleneck_spatial,
                "activation": self.activation,
                "skip_connections": self.skip_connections}

    @classmethod
    def from_json(cls, doc: dict) -> "ModelConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown ModelConfig keys: {sorted(unknown)}")
        doc = dict(doc)
        if "channel_schedule" in doc:
            doc["channel_schedule"] = tuple(doc["channel_schedule"])
        return cls(**doc)


class _UNet(nn.Module):
    """Contracting strided convolutions, expanding transposed convolutions,
    per-level skip concatenation; the last transposed conv is the linear head."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        ch = config.channel_schedule
        k = config.kernel_size
        pad = k // 2
        self.skip = config.skip_connections
        enc_in = [2] + list(ch[:-1])
        self.encoders = nn.ModuleList(
            nn.Conv2d(cin, cout, k, stride=2, padding=pad)
            for cin, cout in zip(enc_in, ch))
        dec = []
        for lvl in range(config.levels - 1, -1, -1):
            cout = ch[lvl - 1] if lvl > 0 else 1
            cin = ch[lvl]
            if self.skip and lvl < config.levels - 1:
                cin *= 2
            dec.append(nn.ConvTranspose2d(cin, cout, 2, stride=2))
        self.decoders = nn.ModuleList(dec)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = []
        for enc in self.encoders:
            x = F.relu(enc(x))
            feats.append(x)
        y = feats[-1]
        for d, dec in enumerate(self.decoders):
            if self.skip and d > 0:
                y = torch.cat([y, feats[len(self.decoders) - 1 - d]], dim=1)
            y = dec(y)
            if d < len(self.decoders) - 1:
                y = F.relu(y)
        return y


@dataclass
class SurrogateModel:
    config: ModelConfig
    net: _UNet
    norm_stats: NormStats | None = None

    @property
    def weights(self) -> dict[str, torch.Tensor]:
        return dict(self.net.state_dict())

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.net.parameters())


def build_model(config: ModelConfig = ModelConfig(), seed: int = 0,
                norm_stats: NormStats | None = None) -> SurrogateModel:
    """Seeded construction; the default fan-in-scaled uniform initialization of
    the conv layers is kept as-is."""
    torch.manual_seed(seed)
    net = _UNet(config)
    net.eval()
    return SurrogateModel(config=config, net=net, norm_stats=norm_stats)


def forward(model: SurrogateModel, x) -> np.ndarray:
    """Normalized (2, n, n) or (batch, 2, n, n) input -> same-resolution
    single-channel output as a numpy array."""
    arr = np.asarray(x, dtype=np.float32)
    squeeze = arr.ndim == 3
    if squeeze:
        arr = arr[np.newaxis]
    n = model.config.input_size
    if arr.ndim != 4 or arr.shape[1] != 2 or arr.shape[2] != n or arr.shape[3] != n:
        raise ValueError(f"expected input (batch, 2, {n}, {n}), got {arr.shape}")
    with torch.no_grad():
        out = model.net(torch.from_numpy(arr)).numpy()
    return out[0] if squeeze else out


def infer(model: SurrogateModel, velocity: VectorField) -> ScalarField:
    """Velocity field -> absolute temperature field (degC) via the embedded
    normalization stats."""
    if model.norm_stats is None:
        raise ValueError("model has no embedded normalization stats")
    grid = velocity.grid
    n = model.config.input_size
    if grid.nx != n or grid.ny != n:
        raise ValueError(f"model expects a {n}x{n} grid, got {grid.nx}x{grid.ny}")
    s = model.norm_stats
    inp = np.stack([(velocity.x_values - s.qx_center) / s.qx_scale,
                    (velocity.y_values - s.qy_center) / s.qy_scale])
    out = forward(model, inp)
    return ScalarField(grid, denormalize_target(out.astype(np.float64), s), unit="degC")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 4e-4
    batch_size: int = 64
    epochs: int = 2000
    seed: int = 0
    checkpoint_every: int = 50  # validation cadence, epochs

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")


def _pairs_to_tensors(pairs) -> tuple[torch.Tensor, torch.Tensor]:
    x = torch.from_numpy(np.stack([p.input for p in pairs]).astype(np.float32))
    y = torch.from_numpy(np.stack([p.target for p in pairs]).astype(np.float32))
    return x, y


def _batched_mse(net: _UNet, x: torch.Tensor, y: torch.Tensor, chunk: int = 64) -> float:
    total = 0.0
    with torch.no_grad():
        for s in range(0, len(x), chunk):
            pred = net(x[s:s + chunk])
            total += F.mse_loss(pred, y[s:s + chunk], reduction="sum").item()
    return total / y.numel()


def train(model: SurrogateModel, split: DatasetSplit,
          tc: TrainConfig = TrainConfig(),
          log: bool = False) -> tuple[SurrogateModel, dict]:
    """Adam + MSE over the train pairs; validation loss evaluated every
    checkpoint_every epochs and the best-validation weights retained.
    Deterministic for a fixed seed (batch order comes from a seeded generator).
    """
    if not split.train:
        raise ValueError("training split is empty")
    net = model.net
    net.train()
    x_train, y_train = _pairs_to_tensors(split.train)
    has_val = len(split.validation) > 0
    if has_val:
        x_val, y_val = _pairs_to_tensors(split.validation)

    torch.manual_seed(tc.seed)
    order_rng = np.random.default_rng(tc.seed)
    opt = torch.optim.Adam(net.parameters(), lr=tc.learning_rate)

    history = {"train_loss": [], "val_loss": [], "val_epochs": [], "best_epoch": 0}
    best_state = None
    best_val = float("inf")
    if has_val:
        best_val = _batched_mse(net, x_val, y_val)
        history["val_loss"].append(best_val)
        history["val_epochs"].append(0)
        best_state = {k: v.clone() for k, v in net.state_dict().items()}

    n = len(x_train)
    for epoch in range(1, tc.epochs + 1):
        perm = torch.from_numpy(order_rng.permutation(n))
        running = 0.0
        for start in range(0, n, tc.batch_size):
            idx = perm[start:start + tc.batch_size]
            opt.zero_grad()
            pred = net(x_train[idx])
            loss = F.mse_loss(pred, y_train[idx])
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss at epoch {epoch}, batch {start // tc.batch_size} "
                    f"(lr={tc.learning_rate})")
            loss.backward()
            opt.step()
            running += loss.item() * len(idx)
        history["train_loss"].append(running / n)

        if has_val and (epoch % tc.checkpoint_every == 0 or epoch == tc.epochs):
            val = _batched_mse(net, x_val, y_val)
            history["val_loss"].append(val)
            history["val_epochs"].append(epoch)
            if val < best_val:
                best_val = val
                history["best_epoch"] = epoch
                best_state = {k: v.clone() for k, v in net.state_dict().items()}
        if log and (epoch % max(1, tc.epochs // 20) == 0 or epoch == 1):
            msg = f"epoch {epoch}/{tc.epochs}  train mse {history['train_loss'][-1]:.3e}"
            if has_val and history["val_loss"]:
                msg += f"  val mse {history['val_loss'][-1]:.3e}"
            print(msg, flush=True)

    if best_state is not None:
        net.load_state_dict(best_state)
    net.eval()
    history["best_val_loss"] = best_val if has_val else None
    return SurrogateModel(config=model.config, net=net,
                          norm_stats=model.norm_stats or split.stats), history


# --- model file -------------------------------------------------------------

def save_model(model: SurrogateModel, path) -> None:
    """Header (magic, version u16, blob length u32, config+stats JSON blob)
    followed by named little-endian float32 tensors."""
    blob_doc = {"config": model.config.to_json()}
    if model.norm_stats is not None:
        blob_doc["norm_stats"] = model.norm_stats.to_json()
    blob = json.dumps(blob_doc, sort_keys=True).encode("utf-8")
    state = model.net.state_dict()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<HI", MODEL_VERSION, len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<H", len(state)))
        for name, tensor in state.items():
            raw = name.encode("utf-8")
            arr = tensor.detach().numpy().astype("<f4")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr).tobytes())


def load_model(path) -> SurrogateModel:
    data = open(path, "rb").read()
    view = memoryview(data)
    if len(view) < 10 or bytes(view[:4]) != MODEL_MAGIC:
        raise ValueError("not a model file (bad magic)")
    version, blob_len = struct.unpack_from("<HI", view, 4)
    if version != MODEL_VERSION:
        raise ValueError(f"unsupported model format version {version}")
    offset = 10
    try:
        blob_doc = json.loads(bytes(view[offset:offset + blob_len]).decode("utf-8"))
        offset += blob_len
        config = ModelConfig.from_json(blob_doc["config"])
        stats = NormStats.from_json(blob_doc["norm_stats"]) if "norm_stats" in blob_doc else None
        (count,) = struct.unpack_from("<H", view, offset)
        offset += 2
        state = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", view, offset)
            offset += 2
            name = bytes(view[offset:offset + name_len]).decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", view, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", view, offset)
            offset += 4 * ndim
            n = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(view, dtype="<f4", count=n, offset=offset).reshape(shape)
            offset += 4 * n
            state[name] = torch.from_numpy(arr.copy())
    except (struct.error, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ValueError(f"corrupt model file: {exc}") from exc
    if offset != len(data):
        raise ValueError("corrupt model file: trailing bytes")
    model = build_model(config, seed=0, norm_stats=stats)
    model.net.load_state_dict({k: v for k, v in state.items()})
    model.net.eval()
    return model
