import math

speed_of_light = 299_792_458.0

# scenario defaults
default_frequency_hz = 90e9
default_bs_shape = (3, 3)
default_ris_shape = (10, 10)
default_p_b = (0.0, 10.0, 1.5)
default_p_r = (15.0, 0.0, 2.0)
default_ris_normal = (-1.0, 0.0, 0.0)
default_mu_paths = 10
default_bs_paths = 10
default_scatterer_box = ((0.0, -15.0, 0.0), (30.0, 15.0, 5.0))
default_tx_power_dbm = 30.0
default_noise_power_dbm = -94.0
default_master_seed = 2024

# sampling region
default_region = ((5.0, -10.0, 0.5), (25.0, 10.0, 2.5))
default_exclusion_radius_m = 0.5

# smallest positive angle used in place of an exact zero
smallest_angle = math.ulp(0.0)

phase_modes = ('random_per_sample', 'optimized_per_sample', 'fixed')
input_sources = ('reconstructed', 'ground_truth_ris', 'bs_baseline')
reconstructor_backbones = ('alexnet_like', 'resnet18_like', 'densenet121_like', 'tiny')
localizer_backbones = ('densenet121_like_pretrained', 'densenet121_like_random', 'tiny')
