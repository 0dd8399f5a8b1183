"""Exception hierarchy shared by every protocol role."""


class NoinsError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(NoinsError):
    """Malformed encoding: bad tag, version, length, or off-group point."""


class DecryptionError(NoinsError):
    """I2V ciphertext failed authentication or was addressed to another key."""


class InvalidCredential(NoinsError):
    """A decrypted CA credential does not satisfy the issuance equation."""


class PolicyError(NoinsError):
    """Short-term index outside the generation policy, or policy exhausted."""


class IssuanceError(NoinsError):
    """The CA refused to issue (e.g. identity cocoon key)."""
