"""Exception types shared across the toolkit."""


class IhcEvalError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(IhcEvalError):
    pass


class ConstantImage(IhcEvalError):
    pass


class TooSmall(IhcEvalError):
    pass


class SingularBasis(IhcEvalError):
    pass


class NumericalFailure(IhcEvalError):
    pass


class TooFewSamples(IhcEvalError):
    pass


class KTooLarge(IhcEvalError):
    pass


class IoError(IhcEvalError):
    pass


class UnsupportedFormat(IhcEvalError):
    pass


class CorruptFile(IhcEvalError):
    pass


class BadMagic(CorruptFile):
    pass


class TruncatedFile(CorruptFile):
    pass


class VersionUnsupported(CorruptFile):
    pass


class EncoderTagMismatch(IhcEvalError):
    pass


class InsufficientArea(IhcEvalError):
    pass


class ImageSmallerThanTile(IhcEvalError):
    pass


class MissingTile(IhcEvalError):
    pass


class SizeMismatch(IhcEvalError):
    pass


class TooFew(IhcEvalError):
    pass


class ZeroVariance(IhcEvalError):
    pass


class DegenerateVariance(IhcEvalError):
    pass


class EmptyInput(IhcEvalError):
    pass
