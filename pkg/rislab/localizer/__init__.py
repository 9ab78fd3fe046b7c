from rislab.localizer.config import LocalizerConfig, DEFAULT_UNFREEZE_SCHEDULE
from rislab.localizer.model import unfreeze_state, LocalizationEstimate, PositionHead, preprocess_ris, \
    LocalizerModel, save_localizer, load_localizer
from rislab.localizer.train import localization_nmse, localization_errors, select_inputs, train_localizer
