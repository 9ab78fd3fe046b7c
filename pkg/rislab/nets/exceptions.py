from rislab.exceptions import RISLabException


class NetsException(RISLabException):
    pass


class TensorShapeError(NetsException, ValueError):
    pass


class TrainingDivergedError(NetsException):
    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class CheckpointError(NetsException):
    pass


class MissingReconstructorError(NetsException):
    pass


class NonFiniteEstimateError(NetsException, ValueError):
    pass
