import io

import numpy as np
import pytest
from PIL import Image


def write_pgm_p5(path, values01):
    """8-bit binary PGM from a [0,1] array."""
    arr = np.clip(np.asarray(values01) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(arr.tobytes())


def png_bytes_rgb(values01_3ch):
    arr = np.clip(np.asarray(values01_3ch) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_gray(values01):
    arr = np.clip(np.asarray(values01) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture
def rng():
    return np.random.RandomState(1234)
