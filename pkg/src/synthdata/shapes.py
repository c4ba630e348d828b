from typing import Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from shared.types import IMAGE_SIZE

CLASS_NAMES = ("square", "disk", "triangle", "cross")

RGB = Tuple[float, float, float]
Seed = Union[int, np.random.SeedSequence, None]

MAX_SHIFT = 2
SCALE_RANGE = (0.8, 1.2)
NOISE = 0.05


def shape_mask(cls: int, size: int = IMAGE_SIZE, dx: float = 0.0, dy: float = 0.0, scale: float = 1.0) -> npt.NDArray[np.bool_]:
    """Boolean mask of a shape centred at (size/2 + dx, size/2 + dy), sampled at pixel centres."""
    if not 0 <= cls < len(CLASS_NAMES):
        raise ValueError(f"class must lie in [0, {len(CLASS_NAMES)}), got {cls}")
    coords = np.arange(size) + 0.5
    u = coords[None, :] - (size / 2.0 + dx)
    v = coords[:, None] - (size / 2.0 + dy)
    s = scale
    name = CLASS_NAMES[cls]
    if name == "square":
        return (np.abs(u) < 4.0 * s) & (np.abs(v) < 4.0 * s)
    if name == "disk":
        return u * u + v * v < (3.6 * s) ** 2
    if name == "triangle":
        # apex up, base at v = +4s
        top, base, half = -4.5 * s, 4.0 * s, 5.0 * s
        return (v > top) & (v < base) & (np.abs(u) < half * (v - top) / (base - top))
    arm, reach = 1.5 * s, 5.0 * s
    return ((np.abs(u) < arm) & (np.abs(v) < reach)) | ((np.abs(v) < arm) & (np.abs(u) < reach))


def render_shape(cls: int, fg: RGB, bg: RGB, jitter_seed: Seed = None, size: int = IMAGE_SIZE) -> npt.NDArray[np.float64]:
    """H x W x 3 raster in [0, 1].

    With a seed the shape is translated by an integer offset in [-2, 2] px, scaled by
    a factor in [0.8, 1.2] and overlaid with Uniform(-0.05, 0.05) noise. Without a seed
    the shape is centred, unscaled and noise free. Pixels are quantized to float32
    precision so a dataset dump reloads bit-identically.
    """
    if jitter_seed is None:
        dx = dy = 0
        scale = 1.0
        noise: Optional[np.ndarray] = None
    else:
        rng = np.random.default_rng(jitter_seed)
        dx, dy = rng.integers(-MAX_SHIFT, MAX_SHIFT + 1, size=2)
        scale = rng.uniform(*SCALE_RANGE)
        noise = rng.uniform(-NOISE, NOISE, size=(size, size, 3))
    mask = shape_mask(cls, size, float(dx), float(dy), scale)
    image = np.where(mask[..., None], np.asarray(fg, dtype=np.float64), np.asarray(bg, dtype=np.float64))
    if noise is not None:
        image = np.clip(image + noise, 0.0, 1.0)
    return image.astype(np.float32).astype(np.float64)
