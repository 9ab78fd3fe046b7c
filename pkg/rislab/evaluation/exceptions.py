from rislab.exceptions import RISLabException, ConfigError


class EvaluationException(RISLabException):
    pass


class EmptyErrorListError(EvaluationException, ValueError):
    pass


class QuantileRangeError(EvaluationException, ValueError):
    pass


class DuplicateLabelError(EvaluationException, ConfigError):
    pass
