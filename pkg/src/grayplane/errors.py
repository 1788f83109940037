"""Exception hierarchy.  Every library error derives from :class:`GrayplaneError`."""


class GrayplaneError(Exception):
    """Base class for domain errors raised by this package."""


class ImageError(GrayplaneError, ValueError):
    """Malformed image or plane data."""


class DimensionError(GrayplaneError, ValueError):
    pass


class PlaneIndexError(GrayplaneError, ValueError):
    pass


class InvalidSpecError(GrayplaneError, ValueError):
    """Inconsistent embedding parameters, e.g. a blind pair with ``k == v``."""


class QualityError(GrayplaneError, ValueError):
    pass


class UndefinedPeakError(GrayplaneError, ValueError):
    """PSNR requested against an all-zero reference watermark."""


class CodecError(GrayplaneError, RuntimeError):
    pass


class CodecUnavailableError(CodecError):
    pass


class EmptyCorpusError(GrayplaneError):
    pass


class ImageFormatError(GrayplaneError, ValueError):
    """Unreadable or unsupported image file."""
