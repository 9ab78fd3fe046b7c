from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from rislab.nets.exceptions import TensorShapeError


def complex_to_image(signals: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """
    Splits complex vectors into real and imaginary parts and reshapes each row-major.

    :param signals: complex array of shape (K, rows * cols) or (rows * cols,)
    :return: float array of shape (K, 2, rows, cols) or (2, rows, cols)
    """
    signals = np.asarray(signals)
    single = signals.ndim == 1
    signals = np.atleast_2d(signals)
    if signals.shape[-1] != rows * cols:
        raise TensorShapeError(f"signal length {signals.shape[-1]} does not match {rows}x{cols}")
    image = np.stack([signals.real, signals.imag], axis=1).reshape(signals.shape[0], 2, rows, cols)
    return image[0] if single else image


def image_to_complex(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.shape[-3] != 2:
        raise TensorShapeError(f"image needs 2 channels, got shape {image.shape}")
    flat = image.reshape(*image.shape[:-3], 2, -1)
    return flat[..., 0, :] + 1j * flat[..., 1, :]


def interleave(signals: np.ndarray) -> np.ndarray:
    """
    (K, N) complex -> (K, 2N) reals ordered re_0, im_0, re_1, im_1, ...
    """
    signals = np.atleast_2d(signals)
    return np.stack([signals.real, signals.imag], axis=-1).reshape(signals.shape[0], -1)


def deinterleave(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    pairs = values.reshape(values.shape[0], -1, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


@dataclass(frozen=True)
class ChannelStats:
    """
    Per-channel mean and standard deviation. ``axis`` is the channel axis of the arrays it normalizes.
    """
    mean: Tuple[float, ...]
    std: Tuple[float, ...]
    axis: int = 1

    @classmethod
    def fit(cls, values: np.ndarray, axis: int = 1) -> 'ChannelStats':
        values = np.asarray(values, dtype=np.float64)
        moved = np.moveaxis(values, axis, 0).reshape(values.shape[axis], -1)
        std = moved.std(axis=1)
        std[std == 0] = 1.0
        return cls(tuple(float(v) for v in moved.mean(axis=1)), tuple(float(v) for v in std), axis)

    def _shape(self, ndim):
        shape = [1] * ndim
        shape[self.axis] = len(self.mean)
        return shape

    def normalize(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        shape = self._shape(values.ndim)
        return (values - np.reshape(self.mean, shape)) / np.reshape(self.std, shape)

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        shape = self._shape(values.ndim)
        return values * np.reshape(self.std, shape) + np.reshape(self.mean, shape)

    def to_dict(self) -> Dict:
        return {'mean': list(self.mean), 'std': list(self.std), 'axis': self.axis}

    @classmethod
    def from_dict(cls, dict_: Dict) -> 'ChannelStats':
        return cls(tuple(dict_['mean']), tuple(dict_['std']), int(dict_.get('axis', 1)))


def preprocess_bs(y: np.ndarray, m1: int, m2: int, stats: ChannelStats = None) -> torch.Tensor:
    """
    :return: (2, m1, m2) tensor of the real and imaginary parts of ``y``, normalized by ``stats`` if given.
    """
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != m1 * m2:
        raise TensorShapeError(f"BS signal of shape {y.shape} cannot be arranged as {m1}x{m2}")
    image = complex_to_image(y, m1, m2)
    if stats is not None:
        image = stats.normalize(image[np.newaxis])[0]
    return torch.as_tensor(image, dtype=torch.float32)


def upsample(t: torch.Tensor, height: int, width: int) -> torch.Tensor:
    """
    Bilinear interpolation with aligned corners, so the four corner pixels are copied exactly.
    Accepts (C, H, W) or (B, C, H, W).
    """
    single = t.dim() == 3
    if t.dim() not in (3, 4):
        raise TensorShapeError(f"upsample expects a 3D or 4D tensor, got shape {tuple(t.shape)}")
    if height < t.shape[-2] or width < t.shape[-1]:
        raise TensorShapeError(f"cannot upsample {tuple(t.shape[-2:])} to smaller {(height, width)}")
    batch = t.unsqueeze(0) if single else t
    output = F.interpolate(batch, size=(height, width), mode='bilinear', align_corners=True)
    for row, col in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
        output[..., row, col] = batch[..., row, col]
    return output[0] if single else output


class ChannelExpansion(nn.Conv2d):
    """
    Learned 1x1 convolution turning the two-channel (re, im) image into three backbone channels.
    """

    def __init__(self):
        super().__init__(2, 3, kernel_size=1)

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        if t.shape[-3] != 2:
            raise TensorShapeError(f"channel expansion expects 2 channels, got shape {tuple(t.shape)}")
        return super().forward(t)


def to_three_channels(t: torch.Tensor, expansion: ChannelExpansion) -> torch.Tensor:
    return expansion(t)


class InputModule(nn.Module):
    """
    Upsample to ``size`` then expand to three channels.
    """

    def __init__(self, size: Sequence[int] = (256, 256)):
        super().__init__()
        self.size = (int(size[0]), int(size[1]))
        self.expansion = ChannelExpansion()

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.expansion(upsample(image, *self.size))
