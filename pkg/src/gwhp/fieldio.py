"""Binary container for named 2D field channels, plus Sample persistence.

Layout: magic b"GWHP", format version u16, nx u16, ny u16, channel count u8,
then one 16-byte NUL-padded ASCII name per channel, then the channel data as
little-endian float32, row-major, in name order. All header integers are
little-endian. Scenario metadata travels in a JSON sidecar next to the binary.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, VectorField
from .simulate import Sample, ScenarioSpec

MAGIC = b"GWHP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHHB")
NAME_BYTES = 16

SAMPLE_CHANNELS = ("permeability", "pressure", "qx", "qy", "temperature")


def _encode_name(name: str) -> bytes:
    raw = name.encode("ascii")
    if not raw or len(raw) > NAME_BYTES:
        raise ValueError(f"channel name must be 1..{NAME_BYTES} ASCII bytes: {name!r}")
    return raw.ljust(NAME_BYTES, b"\x00")


def pack_fields(channels: dict[str, np.ndarray]) -> bytes:
    """Encode named (ny, nx) arrays; insertion order is preserved."""
    if not channels:
        raise ValueError("at least one channel required")
    if len(channels) > 255:
        raise ValueError("at most 255 channels per container")
    arrays = {}
    shape = None
    for name, arr in channels.items():
        a = np.asarray(arr, dtype="<f4")
        if a.ndim != 2:
            raise ValueError(f"channel {name!r} must be 2D, got shape {a.shape}")
        if shape is None:
            shape = a.shape
        elif a.shape != shape:
            raise ValueError("all channels must share one shape")
        arrays[name] = a
    ny, nx = shape
    if nx > 0xFFFF or ny > 0xFFFF:
        raise ValueError("grid dimensions exceed the u16 header fields")

    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, nx, ny, len(arrays))]
    parts += [_encode_name(name) for name in arrays]
    parts += [np.ascontiguousarray(a).tobytes() for a in arrays.values()]
    return b"".join(parts)


def write_fields(path, channels: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(pack_fields(channels))


def unpack_fields(data: bytes) -> dict[str, np.ndarray]:
    """Decode a container as {name: float32 (ny, nx) array}, stored order."""
    if len(data) < _HEADER.size:
        raise ValueError("truncated field container header")
    magic, version, nx, ny, nchan = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    offset = _HEADER.size
    names = []
    for _ in range(nchan):
        raw = data[offset:offset + NAME_BYTES]
        if len(raw) < NAME_BYTES:
            raise ValueError("truncated channel name table")
        names.append(raw.rstrip(b"\x00").decode("ascii"))
        offset += NAME_BYTES
    out = {}
    count = nx * ny
    for name in names:
        end = offset + 4 * count
        if end > len(data):
            raise ValueError(f"truncated channel data for {name!r}")
        out[name] = np.frombuffer(data[offset:end], dtype="<f4").reshape(ny, nx).copy()
        offset = end
    if offset != len(data):
        raise ValueError("trailing bytes after last channel")
    return out


def read_fields(path) -> dict[str, np.ndarray]:
    return unpack_fields(Path(path).read_bytes())


def _sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_sample(sample: Sample, path) -> None:
    """Sample -> binary container + JSON sidecar (spec, run metadata, units)."""
    write_fields(path, {
        "permeability": sample.permeability.values,
        "pressure": sample.pressure.values,
        "qx": sample.velocity.x_values,
        "qy": sample.velocity.y_values,
        "temperature": sample.temperature.values,
    })
    meta = {
        "scenario": sample.spec.to_json(),
        "steady_reached": sample.steady_reached,
        "simulated_days": sample.simulated_days,
        "steps": sample.steps,
        "units": {"permeability": "m2/(Pa.s)", "pressure": "Pa",
                  "qx": "m/s", "qy": "m/s", "temperature": "degC"},
    }
    _sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_sample(path) -> Sample:
    channels = read_fields(path)
    missing = [name for name in SAMPLE_CHANNELS if name not in channels]
    if missing:
        raise ValueError(f"sample container missing channels: {missing}")
    meta = json.loads(_sidecar_path(path).read_text())
    spec = ScenarioSpec.from_json(meta["scenario"])
    grid = spec.grid
    as64 = {name: channels[name].astype(np.float64) for name in SAMPLE_CHANNELS}
    return Sample(
        spec=spec,
        permeability=ScalarField(grid, as64["permeability"], unit="m2/(Pa.s)"),
        pressure=ScalarField(grid, as64["pressure"], unit="Pa"),
        velocity=VectorField(grid, as64["qx"], as64["qy"], unit="m/s"),
        temperature=ScalarField(grid, as64["temperature"], unit="degC"),
        steady_reached=bool(meta.get("steady_reached", True)),
        simulated_days=float(meta.get("simulated_days", 0.0)),
        steps=int(meta.get("steps", 0)),
    )
