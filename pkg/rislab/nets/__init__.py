from rislab.nets.image import complex_to_image, image_to_complex, ChannelStats, preprocess_bs, upsample, \
    ChannelExpansion, to_three_channels, InputModule
from rislab.nets.backbones import Backbone, build_backbone, BACKBONE_FAMILIES
