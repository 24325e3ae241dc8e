"""PPM image I/O and CLIP-style preprocessing (resize, scale, normalize)."""
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import cv2
import numpy as np
from PIL import Image

from src.errors import DataFormatError, NumericError


@dataclass
class ImageTensor:
    """Channel-major float64 image, shape (3, H, W)."""

    data: np.ndarray

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


def _read_header(raw: bytes, path: Path) -> Tuple[int, int, int, int]:
    """Parse a P6 header; return (width, height, maxval, payload offset)."""
    if raw[:2] == b"P3":
        raise DataFormatError(f"{path}: ASCII PPM (P3) is not supported, expected P6")
    if raw[:2] != b"P6":
        raise DataFormatError(f"{path}: not a binary PPM (magic {raw[:2]!r})")

    fields = []
    pos = 2
    while len(fields) < 3:
        if pos >= len(raw):
            raise DataFormatError(f"{path}: header ends before width/height/maxval")
        ch = raw[pos:pos + 1]
        if ch == b"#":
            end = raw.find(b"\n", pos)
            if end == -1:
                raise DataFormatError(f"{path}: unterminated header comment")
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(raw) and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
                pos += 1
            token = raw[start:pos]
            if not token.isdigit():
                raise DataFormatError(f"{path}: malformed header field {token!r}")
            fields.append(int(token))

    if pos >= len(raw) or not raw[pos:pos + 1].isspace():
        raise DataFormatError(f"{path}: missing whitespace after maxval")

    width, height, maxval = fields
    if width < 1 or height < 1:
        raise DataFormatError(f"{path}: invalid size {width}x{height}")
    if maxval != 255:
        raise DataFormatError(f"{path}: unsupported maxval {maxval}, expected 255")
    return width, height, maxval, pos + 1


def load_image(path: Union[str, Path]) -> ImageTensor:
    """
    Load a binary PPM (P6, maxval 255).

    Args:
        path: Image file

    Returns:
        ImageTensor with raw values in [0, 255]

    Raises:
        DataFormatError: On a malformed header, truncated payload or unsupported maxval
    """
    path = Path(path)
    raw = path.read_bytes()
    width, height, _, offset = _read_header(raw, path)

    expected = width * height * 3
    payload = raw[offset:]
    if len(payload) < expected:
        raise DataFormatError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")
    if len(payload) > expected:
        raise DataFormatError(f"{path}: {len(payload) - expected} trailing bytes after payload")

    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ImageTensor(data=pixels.transpose(2, 0, 1).astype(np.float64))


def save_image(img: Union[ImageTensor, np.ndarray], path: Union[str, Path]) -> None:
    """Save a raw (0-255) image as binary PPM. Values are rounded and clipped."""
    data = img.data if isinstance(img, ImageTensor) else np.asarray(img)
    if data.ndim != 3 or data.shape[0] != 3:
        raise DataFormatError(f"expected a (3, H, W) image, got shape {data.shape}")

    pixels = np.clip(np.rint(data), 0, 255).astype(np.uint8).transpose(1, 2, 0)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(pixels)).save(path, format="PPM")


def preprocess_image(
    img: ImageTensor,
    target: Tuple[int, int] = (32, 32),
    mean: float = 0.5,
    std: float = 0.5,
) -> ImageTensor:
    """
    Bilinear-resize to ``target`` (height, width), scale by 1/255, then normalize.

    Args:
        img: Raw image with values in [0, 255]
        target: Output (height, width)
        mean: Subtracted after scaling to [0, 1]
        std: Divisor after centering

    Returns:
        Normalized ImageTensor
    """
    if std == 0:
        raise DataFormatError("normalization std must be non-zero")
    if not np.all(np.isfinite(img.data)):
        raise NumericError("image contains non-finite values")

    height, width = target
    data = img.data
    if (img.height, img.width) != (height, width):
        hwc = np.ascontiguousarray(data.transpose(1, 2, 0))
        resized = cv2.resize(hwc, (width, height), interpolation=cv2.INTER_LINEAR)
        data = resized.reshape(height, width, -1).transpose(2, 0, 1)

    scaled = np.asarray(data, dtype=np.float64) / 255.0
    return ImageTensor(data=(scaled - mean) / std)
