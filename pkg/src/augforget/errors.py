"""Exception types shared across the package."""


class AugForgetError(Exception):
    """Base class for all package errors."""


class ShapeError(AugForgetError, ValueError):
    """Array dimensions do not line up."""


class IdxFormatError(AugForgetError):
    """Malformed IDX/ubyte file."""


class IdxMagicError(IdxFormatError):
    def __init__(self, path, expected, found):
        self.path, self.expected, self.found = path, expected, found
        super().__init__(f"{path}: bad magic number 0x{found:08X} (expected 0x{expected:08X})")


class IdxTruncatedError(IdxFormatError):
    def __init__(self, path, expected, found):
        self.path, self.expected, self.found = path, expected, found
        super().__init__(f"{path}: truncated payload, expected {expected} bytes, found {found}")


class IdxCountMismatchError(IdxFormatError):
    def __init__(self, n_images, n_labels):
        self.n_images, self.n_labels = n_images, n_labels
        super().__init__(f"image count {n_images} does not match label count {n_labels}")


class CheckpointError(AugForgetError):
    """Unreadable checkpoint file."""


class CheckpointMagicError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    def __init__(self, path, expected, found):
        self.path, self.expected, self.found = path, expected, found
        super().__init__(f"{path}: truncated checkpoint, expected {expected} bytes, found {found}")


class CheckpointSizeError(CheckpointError):
    pass


class ConfigError(AugForgetError, ValueError):
    """Invalid run configuration."""
