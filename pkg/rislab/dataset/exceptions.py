from rislab.exceptions import RISLabException


class DatasetException(RISLabException):
    pass


class DatasetBadMagicError(DatasetException):
    pass


class DatasetVersionError(DatasetException):
    pass


class DatasetTruncatedError(DatasetException):
    pass


class DatasetDigestMismatchError(DatasetException):
    pass


class DatasetFormatError(DatasetException):
    pass


class EmptySplitError(DatasetException):
    pass
