"""A three-layer convolutional denoiser with a hand-written backward pass.

Input planes are the image channels shifted to [-0.5, 0.5], the current
mask as -1/+1 and a constant ``t / T`` time plane. Layers are 3x3 zero-padded convolutions
``C_in -> 16 -> 16 -> 1`` with tanh between them and a logistic output
score ``s``. The prediction is ``s >= 0.5`` with confidence ``max(s, 1-s)``.

Arithmetic is float64, but parameters are always rounded to float32 values
so the single-precision model file round-trips exactly.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import RngStream, as_image, as_mask
from .denoiser import DenoiserOutput

MAGIC = b"SRF1"


class ModelFileError(ValueError):
    pass


def _conv_forward(x, w, b):
    """Zero-padded 'same' 3x3 correlation of ``x`` (C, H, W) with ``w`` (O, C, 3, 3)."""
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = sliding_window_view(xp, (3, 3), axis=(1, 2))  # (C, H, W, 3, 3)
    out = np.tensordot(w, cols, axes=([1, 2, 3], [0, 3, 4]))
    return out + b[:, None, None], cols


def _conv_backward(dout, cols, w, need_dx=True):
    dw = np.tensordot(dout, cols, axes=([1, 2], [1, 2]))
    db = dout.sum(axis=(1, 2))
    if not need_dx:
        return None, dw, db
    _, h, wd = dout.shape
    dxp = np.zeros((w.shape[1], h + 2, wd + 2))
    for a in range(3):
        for c in range(3):
            dxp[:, a:a + h, c:c + wd] += np.tensordot(w[:, :, a, c], dout, axes=([0], [0]))
    return dxp[:, 1:-1, 1:-1], dw, db


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def build_input(image, mask, t, num_steps):
    """Stack image channels, mask and the ``t / T`` plane into (C, H, W)."""
    image = as_image(image)
    mask = as_mask(mask)
    planes = [image.transpose(2, 0, 1) - 0.5, 2.0 * mask[None] - 1.0,
              np.full((1,) + mask.shape, t / num_steps)]
    return np.concatenate(planes, axis=0)


def _f32(a):
    return np.asarray(a, dtype=np.float32).astype(np.float64)


class TinyDenoiser:
    def __init__(self, image_channels=3, hidden=16, num_steps=6, input_size=64,
                 rng: RngStream | None = None, params=None):
        self.image_channels = image_channels
        self.num_steps = num_steps
        self.input_size = input_size
        if params is not None:
            self.params = [(_f32(w), _f32(b)) for w, b in params]
            return
        gen = (rng or RngStream(0)).generator()
        plan = [image_channels + 2, hidden, hidden, 1]
        self.params = []
        for c_in, c_out in zip(plan, plan[1:]):
            a = np.sqrt(6.0 / (c_in * 9))
            w = gen.uniform(-a, a, size=(c_out, c_in, 3, 3))
            self.params.append((_f32(w), np.zeros(c_out)))

    @property
    def layer_shapes(self):
        return [(w.shape[1], w.shape[0], w.shape[2]) for w, _ in self.params]

    def forward(self, x):
        """Return the score map ``s`` (H, W) and the cache for :meth:`backward`."""
        caches = []
        h = x
        for i, (w, b) in enumerate(self.params):
            z, cols = _conv_forward(h, w, b)
            last = i == len(self.params) - 1
            h = _sigmoid(z) if last else np.tanh(z)
            caches.append((cols, h))
        return h[0], caches

    def backward(self, caches, d_scores):
        """Parameter gradients given ``d loss / d s``."""
        grads = [None] * len(self.params)
        s = caches[-1][1]
        dz = d_scores[None] * s * (1.0 - s)
        for i in range(len(self.params) - 1, -1, -1):
            cols, _ = caches[i]
            w, _ = self.params[i]
            dx, dw, db = _conv_backward(dz, cols, w, need_dx=i > 0)
            grads[i] = (dw, db)
            if i > 0:
                act = caches[i - 1][1]
                dz = dx * (1.0 - act * act)
        return grads

    def scores(self, image, mask, t):
        return self.forward(build_input(image, mask, t, self.num_steps))[0]

    def predict(self, image, mask_t, t):
        s = self.scores(image, mask_t, t)
        return DenoiserOutput((s >= 0.5).astype(np.uint8), np.maximum(s, 1.0 - s))

    def for_region(self, box, shape):
        return self

    def apply_update(self, grads, lr):
        self.params = [(_f32(w - lr * dw), _f32(b - lr * db))
                       for (w, b), (dw, db) in zip(self.params, grads)]

    def copy(self):
        return TinyDenoiser(self.image_channels, num_steps=self.num_steps,
                            input_size=self.input_size,
                            params=[(w.copy(), b.copy()) for w, b in self.params])


def model_bytes(model: TinyDenoiser) -> bytes:
    """Serialise to the ``SRF1`` format.

    Layout: magic ``SRF1``; uint32 layer count; per layer uint32
    (in-channels, out-channels, kernel size); per layer the float32 weights
    in (out, in, row, col) order followed by the float32 biases; finally the
    uint32 CRC-32 of everything between the magic and the checksum. All
    integers and floats are little-endian.
    """
    payload = bytearray(struct.pack("<I", len(model.params)))
    for c_in, c_out, k in model.layer_shapes:
        payload += struct.pack("<III", c_in, c_out, k)
    for w, b in model.params:
        payload += w.astype("<f4").tobytes()
        payload += b.astype("<f4").tobytes()
    return MAGIC + bytes(payload) + struct.pack("<I", zlib.crc32(payload))


def model_from_bytes(data: bytes, num_steps=6, input_size=64) -> TinyDenoiser:
    if len(data) < 12 or data[:4] != MAGIC:
        raise ModelFileError("not a model file (bad magic)")
    payload, (crc,) = data[4:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != crc:
        raise ModelFileError("model file checksum mismatch")
    try:
        return _parse_payload(payload, num_steps, input_size)
    except (struct.error, ValueError) as exc:
        raise ModelFileError(f"malformed model file: {exc}") from exc


def _parse_payload(payload, num_steps, input_size):
    (n_layers,) = struct.unpack_from("<I", payload, 0)
    off = 4
    shapes = []
    for _ in range(n_layers):
        shapes.append(struct.unpack_from("<III", payload, off))
        off += 12
    params = []
    for c_in, c_out, k in shapes:
        n_w = c_out * c_in * k * k
        w = np.frombuffer(payload, dtype="<f4", count=n_w, offset=off).reshape(c_out, c_in, k, k)
        off += 4 * n_w
        b = np.frombuffer(payload, dtype="<f4", count=c_out, offset=off)
        off += 4 * c_out
        params.append((w, b))
    if off != len(payload):
        raise ModelFileError("model file has trailing or missing bytes")
    if not shapes or shapes[-1][1] != 1 or any(k != 3 for _, _, k in shapes):
        raise ModelFileError("unsupported layer layout")
    return TinyDenoiser(image_channels=shapes[0][0] - 2, num_steps=num_steps,
                        input_size=input_size, params=params)


def save_model(model: TinyDenoiser, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_bytes(model))


def load_model(path, num_steps=6, input_size=64) -> TinyDenoiser:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read(), num_steps=num_steps, input_size=input_size)
