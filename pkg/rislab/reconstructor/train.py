import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import torch
import torch.nn as nn

from rislab.dataset.reader import Fingerprints
from rislab.exceptions import ConfigError, ZeroReferenceError
from rislab.nets.exceptions import TensorShapeError
from rislab.nets.image import ChannelStats, complex_to_image, interleave
from rislab.nets.training import configure_numerics, make_loader, train_epoch, evaluate_loss, resolve_device, \
    epoch_progress
from rislab.reconstructor.config import ReconstructorConfig
from rislab.reconstructor.model import ReconstructorModel

logger = logging.getLogger(__name__)


def reconstruction_nmse(y_r_hat: np.ndarray, y_r: np.ndarray) -> float:
    """
    :return: ||y_r - y_r_hat||^2 / ||y_r||^2
    """
    y_r_hat, y_r = np.asarray(y_r_hat), np.asarray(y_r)
    if y_r_hat.shape != y_r.shape:
        raise TensorShapeError(f"shapes {y_r_hat.shape} and {y_r.shape} differ")
    reference = float(np.sum(np.abs(y_r) ** 2))
    if reference == 0:
        raise ZeroReferenceError("reconstruction NMSE is undefined for a zero reference signal")
    return float(np.sum(np.abs(y_r - y_r_hat) ** 2)) / reference


def evaluate_reconstruction(model: ReconstructorModel, fingerprints: Fingerprints) -> List[float]:
    estimates = model.reconstruct(fingerprints.y)
    return [reconstruction_nmse(estimate, target) for estimate, target in zip(estimates, fingerprints.y_r)]


def fit_stats(train: Fingerprints) -> Tuple[ChannelStats, ChannelStats]:
    input_stats = ChannelStats.fit(complex_to_image(train.y, *train.bs_shape), axis=1)
    target_stats = ChannelStats.fit(interleave(train.y_r).reshape(len(train), -1, 2), axis=2)
    return input_stats, target_stats


def train_reconstructor(train: Fingerprints, val: Optional[Fingerprints],
                        config: ReconstructorConfig) -> Tuple[ReconstructorModel, pd.DataFrame]:
    """
    Minimizes the mean squared error between the normalized stacked (re, im) reconstruction and target with Adam.

    :return: the trained model (eval mode) and a history frame with columns epoch, train_loss, val_loss
    """
    if len(train) == 0:
        raise ConfigError("training set is empty")
    configure_numerics(config.seed, config.deterministic)
    device = resolve_device(config.device)
    input_stats, target_stats = fit_stats(train)
    config.input_stats, config.target_stats = input_stats.to_dict(), target_stats.to_dict()
    model = ReconstructorModel(config, train.bs_shape, train.ris_shape, input_stats, target_stats).to(device)

    train_loader = make_loader(model.prepare_inputs(train.y), model.prepare_targets(train.y_r), config.batch_size,
                               config.seed, shuffle=True)
    val_loader = None
    if val is not None and len(val):
        val_loader = make_loader(model.prepare_inputs(val.y), model.prepare_targets(val.y_r), config.batch_size,
                                 config.seed, shuffle=False)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.MSELoss()
    rows = []
    logger.info(f"training {config.backbone_family} reconstructor on {len(train)} samples for {config.epochs} epochs")
    for epoch in epoch_progress(config.epochs, 'reconstructor'):
        train_loss = train_epoch(model, train_loader, optimizer, loss_fn, epoch, device)
        val_loss = evaluate_loss(model, val_loader, loss_fn, device)
        rows.append({'epoch': epoch, 'train_loss': train_loss, 'val_loss': val_loss})
        logger.debug(f"epoch {epoch}: train {train_loss:.6f} val {val_loss:.6f}")
    logger.info(f"reconstructor final train loss {rows[-1]['train_loss']:.6f}, val loss {rows[-1]['val_loss']:.6f}")
    return model.eval(), pd.DataFrame(rows, columns=['epoch', 'train_loss', 'val_loss'])
