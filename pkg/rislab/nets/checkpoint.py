"""
Checkpoint directory layout::

    <dir>/config.json    model config, normalization statistics, provenance
    <dir>/weights.bin    repeated: u32 name length | UTF-8 name | u32 ndim | ndim x u32 dims | f32 data
    <dir>/history.csv    one row per epoch

All integers and floats are little-endian.
"""
import json
import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd
import torch

from rislab.nets.exceptions import CheckpointError

logger = logging.getLogger(__name__)

CONFIG_FILE = 'config.json'
WEIGHTS_FILE = 'weights.bin'
HISTORY_FILE = 'history.csv'
_U32 = struct.Struct('<I')


def write_weights(state_dict: Dict[str, torch.Tensor], path: Union[str, Path]):
    with open(path, 'wb') as file:
        for name, tensor in state_dict.items():
            encoded = name.encode('utf-8')
            data = tensor.detach().cpu().numpy().astype('<f4')
            file.write(_U32.pack(len(encoded)))
            file.write(encoded)
            file.write(_U32.pack(data.ndim))
            file.write(struct.pack(f'<{data.ndim}I', *data.shape))
            file.write(data.tobytes())


def read_weights(path: Union[str, Path]) -> 'OrderedDict[str, np.ndarray]':
    output = OrderedDict()
    with open(path, 'rb') as file:
        buffer = file.read()
    offset = 0

    def take(size):
        nonlocal offset
        if offset + size > len(buffer):
            raise CheckpointError(f"{path} is truncated at byte {offset}")
        chunk = buffer[offset:offset + size]
        offset += size
        return chunk

    while offset < len(buffer):
        name = take(_U32.unpack(take(4))[0]).decode('utf-8')
        ndim = _U32.unpack(take(4))[0]
        shape = struct.unpack(f'<{ndim}I', take(4 * ndim))
        count = int(np.prod(shape)) if ndim else 1
        output[name] = np.frombuffer(take(4 * count), dtype='<f4').reshape(shape).copy()
    return output


def save_checkpoint(model: torch.nn.Module, config: Dict[str, Any], history: pd.DataFrame,
                    directory: Union[str, Path], force: bool = False) -> Path:
    directory = Path(directory)
    if directory.exists() and any(directory.iterdir()) and not force:
        raise CheckpointError(f"checkpoint directory {directory} is not empty; use force to overwrite")
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / CONFIG_FILE, 'w') as file:
        json.dump(config, file, indent=2, sort_keys=True)
    write_weights(model.state_dict(), directory / WEIGHTS_FILE)
    history.to_csv(directory / HISTORY_FILE, index=False)
    logger.info(f"checkpoint written to {directory}")
    return directory


def read_checkpoint_config(directory: Union[str, Path]) -> Dict[str, Any]:
    path = Path(directory) / CONFIG_FILE
    if not path.is_file():
        raise CheckpointError(f"no checkpoint config at {path}")
    with open(path) as file:
        return json.load(file)


def load_weights_into(model: torch.nn.Module, directory: Union[str, Path]):
    path = Path(directory) / WEIGHTS_FILE
    if not path.is_file():
        raise CheckpointError(f"no weights at {path}")
    arrays = read_weights(path)
    state = model.state_dict()
    missing = set(state) - set(arrays)
    unexpected = set(arrays) - set(state)
    if missing or unexpected:
        raise CheckpointError(f"weights do not match the model: missing {sorted(missing)}, unexpected {sorted(unexpected)}")
    model.load_state_dict({name: torch.as_tensor(arrays[name]).to(state[name].dtype).reshape(state[name].shape)
                           for name in state})
