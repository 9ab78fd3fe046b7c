class RISLabException(Exception):
    pass


class ChannelDomainError(RISLabException, ValueError):
    pass


class ConfigError(RISLabException):
    pass


class MissingConfigKeyError(ConfigError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ''


class ZeroReferenceError(RISLabException, ValueError):
    pass


class ConfigValueError(ConfigError, ValueError):
    pass


class PhaseOptimizationError(RISLabException, ArithmeticError):
    pass
