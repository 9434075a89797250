"""PNG raster I/O, dataset directories and the key=value run configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import as_image, as_mask

# Pillow mode -> human readable (bit depth, colour type)
_MODE_DESCRIPTIONS = {
    "1": "bit depth 1",
    "L": "8-bit grayscale",
    "LA": "color type grayscale+alpha",
    "P": "color type palette",
    "RGB": "color type RGB",
    "RGBA": "color type RGBA",
    "I": "bit depth 16/32 (integer)",
    "I;16": "bit depth 16",
    "I;16B": "bit depth 16",
    "F": "bit depth 32 (float)",
}


class RasterError(ValueError):
    pass


def _open_png(path, allowed_modes, what):
    try:
        with Image.open(path) as im:
            im.load()
            if im.format != "PNG":
                raise RasterError(f"{path}: not a PNG file (format {im.format})")
            if im.mode not in allowed_modes:
                desc = _MODE_DESCRIPTIONS.get(im.mode, f"mode {im.mode}")
                raise RasterError(f"{path}: unsupported {desc} for {what}")
            return np.array(im)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise RasterError(f"{path}: unreadable image ({exc})") from exc


def load_mask(path) -> np.ndarray:
    """Read an 8-bit grayscale PNG; values >= 128 become 1."""
    arr = _open_png(path, ("L",), "masks (need 8-bit grayscale)")
    return (arr >= 128).astype(np.uint8)


def save_mask(mask, path) -> None:
    mask = as_mask(mask)
    Image.fromarray((mask * 255).astype(np.uint8)).save(path, format="PNG")


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG as ``(H, W, C)`` floats in [0, 1]."""
    arr = _open_png(path, ("L", "RGB"), "images (need 8-bit grayscale or RGB)")
    arr = arr.astype(np.float64) / 255.0
    return arr[:, :, None] if arr.ndim == 2 else arr


def save_image(image, path) -> None:
    image = as_image(image)
    data = np.rint(image * 255.0).astype(np.uint8)
    if data.shape[2] == 1:
        Image.fromarray(data[:, :, 0]).save(path, format="PNG")
    else:
        Image.fromarray(data).save(path, format="PNG")


def sample_name(index: int) -> str:
    return f"{index:04d}.png"


def write_dataset(samples, root) -> None:
    """Write ``(image, mask)`` pairs as ``images/NNNN.png`` and ``masks/NNNN.png``."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    for i, (image, mask) in enumerate(samples):
        save_image(image, root / "images" / sample_name(i))
        save_mask(mask, root / "masks" / sample_name(i))


def read_dataset(root):
    """Return ``[(name, image, mask)]`` for every mask with a matching image."""
    root = Path(root)
    names = sorted(p.name for p in (root / "masks").glob("*.png"))
    if not names:
        raise FileNotFoundError(f"no masks found under {root / 'masks'}")
    return [(n, load_image(root / "images" / n), load_mask(root / "masks" / n)) for n in names]


@dataclass
class RunConfig:
    seed: int = 0
    steps: int = 6
    schedule_start: float = 0.8
    denoiser: str = "oracle"
    confidence: float = 1.0
    error_rate: float = 0.0
    input_size: int = 64
    hires: bool = False
    tau: float = 0.5
    patch_size: Optional[int] = None
    global_size: Optional[int] = None
    iou_min: float = 0.65
    iou_max: float = 0.85
    max_attempts: int = 200
    iterations: int = 5000
    lr: float = 0.05
    alpha: float = 5.0

    def validate(self):
        problems = []
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if self.steps < 1:
            problems.append("steps must be >= 1")
        if not 0 < self.schedule_start < 1:
            problems.append("schedule_start must lie in (0, 1)")
        if not (self.denoiser == "oracle" or self.denoiser.startswith("tiny:")):
            problems.append("denoiser must be 'oracle' or 'tiny:<model path>'")
        for name in ("confidence", "error_rate", "tau"):
            if not 0 <= getattr(self, name) <= 1:
                problems.append(f"{name} must lie in [0, 1]")
        for name in ("input_size", "max_attempts"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        for name in ("patch_size", "global_size"):
            if getattr(self, name) is not None and getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if not 0 < self.iou_min <= self.iou_max <= 1:
            problems.append("need 0 < iou_min <= iou_max <= 1")
        if self.iterations < 0 or self.lr < 0 or self.alpha < 0:
            problems.append("iterations, lr and alpha must be >= 0")
        if problems:
            raise ValueError("; ".join(problems))
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "Optional[int]":
        return None if raw.lower() in ("", "none") else int(raw)
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: {exc}") from None
    return values


def emit_config(config: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if value is None:
            value = "none"
        elif isinstance(value, bool):
            value = str(value).lower()
        else:
            value = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path=None, overrides=None) -> RunConfig:
    """Defaults, then the file at ``path``, then non-None ``overrides``."""
    values = {}
    if path is not None:
        values.update(parse_config(Path(path).read_text()))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate()
