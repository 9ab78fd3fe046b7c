from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Tuple

from rislab.exceptions import ConfigError
from rislab.util.core import check_enum
from rislab.util.helpervariables import reconstructor_backbones


@dataclass
class ReconstructorConfig:
    backbone_family: str = 'resnet18_like'
    upsample_hw: Tuple[int, int] = (256, 256)
    pooled_hw: Tuple[int, int] = (4, 4)
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    device: str = 'cpu'
    deterministic: bool = False
    input_stats: Optional[Dict[str, Any]] = field(default=None)
    target_stats: Optional[Dict[str, Any]] = field(default=None)

    def __post_init__(self):
        check_enum(self.backbone_family, reconstructor_backbones, 'backbone_family')
        self.upsample_hw = tuple(int(v) for v in self.upsample_hw)
        self.pooled_hw = tuple(int(v) for v in self.pooled_hw)
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate '{self.learning_rate}' must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError(f"epochs '{self.epochs}' and batch_size '{self.batch_size}' must be positive")

    def check_input_shape(self, rows: int, cols: int):
        if self.upsample_hw[0] < rows or self.upsample_hw[1] < cols:
            raise ConfigError(f"upsample_hw {self.upsample_hw} is smaller than the input {rows}x{cols}")

    @classmethod
    def from_dict(cls, dict_: Dict[str, Any]) -> 'ReconstructorConfig':
        unknown = set(dict_) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown reconstructor config keys {sorted(unknown)}")
        return cls(**dict_)

    def to_dict(self) -> Dict[str, Any]:
        output = asdict(self)
        output['upsample_hw'] = list(self.upsample_hw)
        output['pooled_hw'] = list(self.pooled_hw)
        return output
