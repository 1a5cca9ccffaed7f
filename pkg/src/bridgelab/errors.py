"""Exception types raised across the library."""


class BridgeLabError(Exception):
    """Base class for every error raised by bridgelab."""


class SpaceMismatch(BridgeLabError):
    """A ciphertext tagged for one scheme was handed to another."""


class EmptySpace(BridgeLabError):
    pass


class NonEnumerableSpace(BridgeLabError):
    pass


class ArityMismatch(BridgeLabError):
    pass


class CircuitOutOfClass(BridgeLabError):
    """The circuit exceeds what the homomorphic backend can certify."""


class SchemeMismatch(BridgeLabError):
    pass


class DivisibilityViolation(BridgeLabError):
    pass


class OddKeyLength(BridgeLabError):
    pass


class KeyBundleMismatch(BridgeLabError):
    pass


class WrongKeyMode(BridgeLabError):
    pass


class InvalidMessagePair(BridgeLabError):
    pass


class ShapeMismatch(BridgeLabError):
    pass


class MissingKeyHalf(BridgeLabError):
    pass


class InvalidParameters(BridgeLabError):
    pass


class UnknownEntry(BridgeLabError):
    """Lookup of an unregistered preset, scheme, bridge or participant."""
