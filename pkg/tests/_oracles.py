"""Independent straight-loop oracles for the derived test values.

Everything here is deliberately written as explicit per-pixel Python
loops over the documented operator definitions, sharing no code with the
library's vectorized implementations.
"""

import math

import numpy as np


def reflect_index(i: int, n: int) -> int:
    """Symmetric boundary (edge sample repeated): ... 1 0 | 0 1 2 | 2 1 ..."""
    period = 2 * n
    m = i % period
    if m < 0:
        m += period
    return m if m < n else period - 1 - m


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(4.0 * sigma + 0.5)
    ks = [math.exp(-(k * k) / (2.0 * sigma * sigma)) for k in range(-radius, radius + 1)]
    total = sum(ks)
    return np.array([k / total for k in ks])


def blur_channel_loops(chan: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur via explicit loops, rows axis first."""
    kernel = gaussian_kernel(sigma)
    radius = (len(kernel) - 1) // 2
    h, w = chan.shape
    tmp = np.zeros_like(chan)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(-radius, radius + 1):
                acc += kernel[k + radius] * chan[reflect_index(y + k, h), x]
            tmp[y, x] = acc
    out = np.zeros_like(chan)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(-radius, radius + 1):
                acc += kernel[k + radius] * tmp[y, reflect_index(x + k, w)]
            out[y, x] = acc
    return out


_SX = [[-1 / 8, 0, 1 / 8], [-2 / 8, 0, 2 / 8], [-1 / 8, 0, 1 / 8]]
_SY = [[-1 / 8, -2 / 8, -1 / 8], [0, 0, 0], [1 / 8, 2 / 8, 1 / 8]]


def gradient_magnitude_loops(chan: np.ndarray) -> np.ndarray:
    h, w = chan.shape
    out = np.zeros_like(chan)
    for y in range(h):
        for x in range(w):
            gx = 0.0
            gy = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    v = chan[reflect_index(y + dy, h), reflect_index(x + dx, w)]
                    gx += _SX[dy + 1][dx + 1] * v
                    gy += _SY[dy + 1][dx + 1] * v
            out[y, x] = math.hypot(gx, gy)
    return out


def grey_framework_bruteforce(img: np.ndarray, n: int, p: float, sigma: float) -> np.ndarray:
    """Pixel-by-pixel evaluation of the grey-based framework formula."""
    chans = [img[:, :, c].astype(np.float64).copy() for c in range(3)]
    if sigma > 0:
        chans = [blur_channel_loops(c, sigma) for c in chans]
    for _ in range(n):
        chans = [gradient_magnitude_loops(c) for c in chans]

    e = []
    for chan in chans:
        h, w = chan.shape
        if math.isinf(p):
            best = 0.0
            for y in range(h):
                for x in range(w):
                    best = max(best, abs(chan[y, x]))
            e.append(best)
        else:
            acc = 0.0
            for y in range(h):
                for x in range(w):
                    acc += abs(chan[y, x]) ** p
            e.append((acc / (h * w)) ** (1.0 / p))
    e = np.array(e)
    norm = math.sqrt(sum(v * v for v in e))
    if norm == 0.0:
        return np.ones(3) / math.sqrt(3.0)
    return e / norm


def angular_degrees(a, b) -> float:
    """Scalar angle oracle via the arccos definition."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cosv = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.degrees(math.acos(max(-1.0, min(1.0, cosv))))


def mse_loops(a: np.ndarray, b: np.ndarray) -> float:
    acc = 0.0
    h, w, c = a.shape
    for y in range(h):
        for x in range(w):
            for ch in range(c):
                d = a[y, x, ch] - b[y, x, ch]
                acc += d * d
    return acc / (h * w * c)


def _srgb_decode_scalar(v: float) -> float:
    if v <= 0.04045:
        return v / 12.92
    return ((v + 0.055) / 1.055) ** 2.4


_M = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
]
_WHITE = [0.95047, 1.0, 1.08883]


def _lab_f(t: float) -> float:
    delta = 6.0 / 29.0
    if t > delta**3:
        return t ** (1.0 / 3.0)
    return t / (3 * delta * delta) + 4.0 / 29.0


def delta_e76_loops(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel CIE76 distance via scalar conversions."""
    h, w, _ = a.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            labs = []
            for img in (a, b):
                lin = [_srgb_decode_scalar(float(img[y, x, c])) for c in range(3)]
                xyz = [sum(_M[r][c] * lin[c] for c in range(3)) for r in range(3)]
                f = [_lab_f(xyz[i] / _WHITE[i]) for i in range(3)]
                labs.append(
                    (116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2]))
                )
            out[y, x] = math.sqrt(sum((labs[0][i] - labs[1][i]) ** 2 for i in range(3)))
    return out


def splitmix64_reference(seed_key: int, count: int) -> list[int]:
    """Pure-integer SplitMix64 counter stream, straight from the definition."""
    gamma = 0x9E3779B97F4A7C15
    mask = (1 << 64) - 1
    out = []
    for i in range(1, count + 1):
        z = (seed_key + i * gamma) & mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out
