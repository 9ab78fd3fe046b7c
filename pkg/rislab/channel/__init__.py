from rislab.channel.geometry import ArrayGeometry, Position, steering_vector, geometric_angles
from rislab.channel.paths import PathSet, path_gain, array_channel
from rislab.channel.scenario import Scatterer, Scenario
from rislab.channel.channel import ChannelRealization, mu_ris_paths, mu_ris_channel, ris_bs_paths, ris_bs_channel
from rislab.channel.signal import ris_received, bs_received
from rislab.channel.phaseshift import PhaseShiftVector, random_phase_shifts, optimize_phase_shifts, received_snr
