"""Exception hierarchy shared across the package."""


class NilmError(Exception):
    """Base class for all errors raised by nilmrec."""


class NonIntegralCycles(NilmError, ValueError):
    pass


class DuplicateClassName(NilmError, ValueError):
    pass


class FormatError(NilmError, ValueError):
    pass


class LengthMismatch(NilmError, ValueError):
    pass


class OutOfRange(NilmError, IndexError):
    pass


class UnknownAppliance(NilmError, KeyError):
    pass


class DegenerateSignal(NilmError, ValueError):
    pass


class DimsTooLarge(NilmError, ValueError):
    pass


class EmptyConfig(NilmError, ValueError):
    pass


class DimMismatch(NilmError, ValueError):
    pass


class KTooLarge(NilmError, ValueError):
    pass


class SingleClass(NilmError, ValueError):
    pass


class EmptyTrainSet(NilmError, ValueError):
    pass


class NonIntegralWidth(NilmError, ValueError):
    pass


class NonFiniteLoss(NilmError, FloatingPointError):
    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class ClassTooSmall(NilmError, ValueError):
    pass
