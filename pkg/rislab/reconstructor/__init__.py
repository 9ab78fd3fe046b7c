from rislab.reconstructor.config import ReconstructorConfig
from rislab.reconstructor.model import ReconstructionHead, ReconstructorModel, save_reconstructor, load_reconstructor
from rislab.reconstructor.train import reconstruction_nmse, evaluate_reconstruction, train_reconstructor
