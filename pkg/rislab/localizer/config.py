from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Sequence, Tuple

from rislab.exceptions import ConfigError
from rislab.nets.backbones import N_BLOCKS
from rislab.util.core import check_enum
from rislab.util.helpervariables import localizer_backbones, input_sources

DEFAULT_UNFREEZE_SCHEDULE = ((5, 1), (10, 2), (15, 3), (20, 4))


def check_schedule(schedule: Sequence[Sequence[int]]) -> Tuple[Tuple[int, int], ...]:
    schedule = tuple((int(epoch), int(count)) for epoch, count in schedule)
    epochs = [epoch for epoch, _ in schedule]
    counts = [count for _, count in schedule]
    if any(b <= a for a, b in zip(epochs, epochs[1:])):
        raise ConfigError(f"unfreeze schedule epochs {epochs} must be strictly increasing")
    if any(b < a for a, b in zip(counts, counts[1:])):
        raise ConfigError(f"unfreeze schedule block counts {counts} must not decrease")
    if any(epoch < 0 for epoch in epochs) or any(not 0 <= count <= N_BLOCKS for count in counts):
        raise ConfigError(f"unfreeze schedule {schedule} needs epochs >= 0 and counts in [0, {N_BLOCKS}]")
    return schedule


@dataclass
class LocalizerConfig:
    backbone: str = 'densenet121_like_pretrained'
    unfreeze_schedule: Tuple[Tuple[int, int], ...] = DEFAULT_UNFREEZE_SCHEDULE
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    input_source: str = 'reconstructed'
    upsample_hw: Tuple[int, int] = (256, 256)
    device: str = 'cpu'
    deterministic: bool = False
    input_stats: Optional[Dict[str, Any]] = field(default=None)
    label_stats: Optional[Dict[str, Any]] = field(default=None)

    def __post_init__(self):
        check_enum(self.backbone, localizer_backbones, 'backbone')
        check_enum(self.input_source, input_sources, 'input_source')
        self.unfreeze_schedule = check_schedule(self.unfreeze_schedule)
        self.upsample_hw = tuple(int(v) for v in self.upsample_hw)
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate '{self.learning_rate}' must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError(f"epochs '{self.epochs}' and batch_size '{self.batch_size}' must be positive")

    @property
    def backbone_family(self) -> str:
        return 'tiny' if self.backbone == 'tiny' else 'densenet121_like'

    @property
    def pretrained(self) -> bool:
        return self.backbone == 'densenet121_like_pretrained'

    @classmethod
    def from_dict(cls, dict_: Dict[str, Any]) -> 'LocalizerConfig':
        unknown = set(dict_) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown localizer config keys {sorted(unknown)}")
        return cls(**dict_)

    def to_dict(self) -> Dict[str, Any]:
        output = asdict(self)
        output['unfreeze_schedule'] = [list(entry) for entry in self.unfreeze_schedule]
        output['upsample_hw'] = list(self.upsample_hw)
        return output
