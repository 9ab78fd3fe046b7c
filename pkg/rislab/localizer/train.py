import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import torch
import torch.nn as nn

from rislab.dataset.reader import Fingerprints
from rislab.exceptions import ConfigError, ZeroReferenceError
from rislab.localizer.config import LocalizerConfig
from rislab.localizer.model import LocalizerModel
from rislab.nets.exceptions import MissingReconstructorError
from rislab.nets.image import ChannelStats, complex_to_image
from rislab.nets.training import configure_numerics, make_loader, train_epoch, evaluate_loss, resolve_device, \
    epoch_progress
from rislab.reconstructor.model import ReconstructorModel

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ['epoch', 'train_loss', 'val_loss', 'mean_pos_err_m', 'nmse', 'trainable_blocks']


def localization_nmse(p_hat: np.ndarray, p: np.ndarray) -> float:
    """
    :return: ||p_hat - p||^2 / ||p||^2
    """
    p_hat, p = np.asarray(p_hat, dtype=np.float64), np.asarray(p, dtype=np.float64)
    reference = float(np.sum(p ** 2))
    if reference == 0:
        raise ZeroReferenceError("localization NMSE is undefined for a true position at the origin")
    return float(np.sum((p_hat - p) ** 2)) / reference


def localization_errors(estimates: np.ndarray, positions: np.ndarray) -> Tuple[List[float], List[float]]:
    """
    :return: per-sample NMSE values and Euclidean errors in meters
    """
    nmse = [localization_nmse(estimate, position) for estimate, position in zip(estimates, positions)]
    distances = np.linalg.norm(np.asarray(estimates) - np.asarray(positions), axis=1)
    return nmse, distances.tolist()


def select_inputs(fingerprints: Fingerprints, input_source: str,
                  reconstructor: Optional[ReconstructorModel]) -> Tuple[np.ndarray, Tuple[int, int]]:
    """
    :return: the complex signals fed to the localizer for ``input_source`` and their array grid shape
    """
    if input_source == 'reconstructed':
        if reconstructor is None:
            raise MissingReconstructorError("input_source 'reconstructed' needs a trained reconstructor")
        return reconstructor.reconstruct(fingerprints.y), fingerprints.ris_shape
    if input_source == 'ground_truth_ris':
        return fingerprints.y_r, fingerprints.ris_shape
    if input_source == 'bs_baseline':
        return fingerprints.y, fingerprints.bs_shape
    raise ConfigError(f"unknown input_source '{input_source}'")


def train_localizer(train: Fingerprints, val: Optional[Fingerprints], reconstructor: Optional[ReconstructorModel],
                    config: LocalizerConfig) -> Tuple[LocalizerModel, pd.DataFrame]:
    """
    Minimizes the mean squared error of standardized positions while unfreezing backbone blocks per
    ``config.unfreeze_schedule``.
    """
    if len(train) == 0:
        raise ConfigError("training set is empty")
    signals, shape = select_inputs(train, config.input_source, reconstructor)
    configure_numerics(config.seed, config.deterministic)
    device = resolve_device(config.device)
    input_stats = ChannelStats.fit(complex_to_image(signals, *shape), axis=1)
    label_stats = ChannelStats.fit(train.positions, axis=1)
    config.input_stats, config.label_stats = input_stats.to_dict(), label_stats.to_dict()
    model = LocalizerModel(config, shape, input_stats, label_stats).to(device)
    logger.info(f"training {config.backbone} localizer ({config.input_source}, weights {model.pretrained_mode}) on "
                f"{len(train)} samples for {config.epochs} epochs")

    train_loader = make_loader(model.prepare_inputs(signals), label_stats.normalize(train.positions),
                               config.batch_size, config.seed, shuffle=True)
    val_loader, val_signals = None, None
    if val is not None and len(val):
        val_signals, _ = select_inputs(val, config.input_source, reconstructor)
        val_loader = make_loader(model.prepare_inputs(val_signals), label_stats.normalize(val.positions),
                                 config.batch_size, config.seed, shuffle=False)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.MSELoss()
    rows = []
    for epoch in epoch_progress(config.epochs, 'localizer'):
        flags = model.apply_unfreeze_state(epoch)
        train_loss = train_epoch(model, train_loader, optimizer, loss_fn, epoch, device)
        val_loss = evaluate_loss(model, val_loader, loss_fn, device)
        mean_error, mean_nmse = np.nan, np.nan
        if val_loader is not None:
            nmse, distances = localization_errors(model.locate(val_signals), val.positions)
            mean_error, mean_nmse = float(np.mean(distances)), float(np.mean(nmse))
        rows.append({'epoch': epoch, 'train_loss': train_loss, 'val_loss': val_loss, 'mean_pos_err_m': mean_error,
                     'nmse': mean_nmse, 'trainable_blocks': sum(flags)})
        logger.debug(f"epoch {epoch}: train {train_loss:.6f} val {val_loss:.6f} error {mean_error:.3f} m "
                     f"trainable blocks {sum(flags)}")
    logger.info(f"localizer final train loss {rows[-1]['train_loss']:.6f}, val error {rows[-1]['mean_pos_err_m']:.3f} m")
    return model.eval(), pd.DataFrame(rows, columns=HISTORY_COLUMNS)
