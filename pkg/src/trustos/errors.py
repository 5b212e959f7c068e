"""Exception taxonomy used across the engine."""


class TrustOsError(Exception):
    """Base class for all domain errors."""


class UnknownWorkspace(TrustOsError):
    pass


class DuplicateAssertionId(TrustOsError):
    pass


class EmptyField(TrustOsError):
    pass


class InvalidWatermark(TrustOsError):
    pass


class VaultKeyMissing(TrustOsError):
    pass


class UnknownCredential(TrustOsError):
    pass


class DecryptFailure(TrustOsError):
    pass


class ParseError(TrustOsError):
    pass


class ValidationError(TrustOsError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class AuthFailure(TrustOsError):
    pass


class UnknownQuery(TrustOsError):
    pass


class UnknownConnection(TrustOsError):
    pass


class ProviderUnavailable(TrustOsError):
    pass


class NoObservabilityConnection(TrustOsError):
    pass


class Forbidden(TrustOsError):
    pass


class InvalidTier(TrustOsError):
    pass


class NotPending(TrustOsError):
    pass


class UnmappedControl(TrustOsError):
    pass


class AlreadyClosed(TrustOsError):
    pass


class NoEvidence(TrustOsError):
    pass


class InsufficientHistory(TrustOsError):
    pass


class GeneratorFailure(TrustOsError):
    pass


class MalformedBundle(TrustOsError):
    pass


class UnknownEntity(TrustOsError):
    pass
