"""Exception hierarchy shared by all scdlib modules."""


class ScdError(Exception):
    """Base class for all scdlib errors."""


# corpus
class EmptyDocument(ScdError):
    pass


class ParseError(ScdError):
    pass


class UnknownWord(ScdError):
    pass


# core model
class DanglingReference(ScdError):
    pass


class DegenerateRow(ScdError):
    pass


class DimensionError(ScdError):
    pass


class NoCandidate(ScdError):
    pass


class UnknownScd(ScdError):
    pass


class InternalInconsistency(ScdError):
    pass


# updates
class UnknownSentence(ScdError):
    pass


class NotAssociated(ScdError):
    pass


# usem / configuration
class ConfigError(ScdError):
    pass


# agent
class EmptyModel(ScdError):
    pass


class EmptyQuery(ScdError):
    pass


class UnknownVersion(ScdError):
    pass


# evaluation
class NotADistribution(ScdError):
    pass


class AlignmentError(ScdError):
    pass


class PairingExhausted(ScdError):
    def __init__(self, message, achieved=0):
        super().__init__(message)
        self.achieved = achieved
