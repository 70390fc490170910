"""Exception types raised by the library."""


class Se3ConvError(Exception):
    """Base class for all library errors."""


class NotARotation(Se3ConvError):
    """Matrix is not a proper rotation within tolerance."""


class TriangleViolation(Se3ConvError):
    """Degrees (l, l', L) violate |l - l'| <= L <= l + l'."""


class IndexOutOfRange(Se3ConvError):
    """An order or basis index lies outside its admissible range."""


class ImaginaryResidue(Se3ConvError):
    """A quantity expected to be real kept an imaginary part above tolerance."""


class ShapeMismatch(Se3ConvError):
    """Array shapes are inconsistent with each other."""


class SizeMismatch(ShapeMismatch):
    """Sample counts (points, rotations) disagree."""


class BadZernikeIndex(Se3ConvError):
    """Zernike index pair (n, l) with n < l or odd n - l."""


class BandLimitMismatch(Se3ConvError):
    """Coefficient lists with incompatible band limits."""


class DegreeTooLarge(Se3ConvError):
    """Degree above the supported ceiling."""


class ParseError(Se3ConvError):
    """Malformed text input."""


class BlockHeaderMismatch(Se3ConvError):
    """A weight block header disagrees with the file form or the block body."""
