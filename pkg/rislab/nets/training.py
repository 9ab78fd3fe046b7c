import logging
import math
from typing import Callable, Optional

import numpy as np
import torch
from torch.utils.data import DataLoader, TensorDataset
from tqdm import tqdm

from rislab.nets.exceptions import TrainingDivergedError

logger = logging.getLogger(__name__)


def configure_numerics(seed: int, deterministic: bool = False):
    """
    Seeds torch. In deterministic mode numerics are single-threaded and restricted to deterministic kernels.
    """
    torch.manual_seed(seed)
    if deterministic:
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True, warn_only=True)


def resolve_device(device: str) -> torch.device:
    if device == 'auto':
        return torch.device('cuda' if torch.cuda.is_available() else 'cpu')
    return torch.device(device)


def make_loader(inputs: np.ndarray, targets: np.ndarray, batch_size: int, seed: int, shuffle: bool) -> DataLoader:
    """
    Index-ordered batches; shuffling is driven by a generator seeded with ``seed``.
    """
    dataset = TensorDataset(torch.as_tensor(inputs, dtype=torch.float32), torch.as_tensor(targets, dtype=torch.float32))
    generator = torch.Generator().manual_seed(seed)
    return DataLoader(dataset, batch_size=batch_size, shuffle=shuffle, generator=generator)


def train_epoch(model: torch.nn.Module, loader: DataLoader, optimizer: torch.optim.Optimizer, loss_fn: Callable,
                epoch: int, device: torch.device) -> float:
    model.train()
    total, count = 0.0, 0
    for batch, (inputs, targets) in enumerate(loader):
        inputs, targets = inputs.to(device), targets.to(device)
        optimizer.zero_grad()
        loss = loss_fn(model(inputs), targets)
        if not torch.isfinite(loss):
            raise TrainingDivergedError(f"loss became {loss.item()} at epoch {epoch}, batch {batch}", epoch, batch)
        loss.backward()
        optimizer.step()
        total += loss.item() * inputs.shape[0]
        count += inputs.shape[0]
    return total / count


@torch.no_grad()
def evaluate_loss(model: torch.nn.Module, loader: Optional[DataLoader], loss_fn: Callable,
                  device: torch.device) -> float:
    if loader is None:
        return math.nan
    model.eval()
    total, count = 0.0, 0
    for inputs, targets in loader:
        inputs, targets = inputs.to(device), targets.to(device)
        total += loss_fn(model(inputs), targets).item() * inputs.shape[0]
        count += inputs.shape[0]
    return total / count


@torch.no_grad()
def predict(model: torch.nn.Module, inputs: np.ndarray, batch_size: int, device: torch.device) -> np.ndarray:
    model.eval()
    outputs = []
    tensor = torch.as_tensor(inputs, dtype=torch.float32)
    for start in range(0, tensor.shape[0], batch_size):
        outputs.append(model(tensor[start:start + batch_size].to(device)).double().cpu().numpy())
    return np.concatenate(outputs, axis=0)


def epoch_progress(epochs: int, description: str):
    return tqdm(range(epochs), desc=description, unit='epoch', disable=not logger.isEnabledFor(logging.INFO))
