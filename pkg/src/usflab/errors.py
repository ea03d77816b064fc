"""Exception hierarchy shared by every usflab module."""


class UsflabError(Exception):
    """Base class for all library errors."""


class InvalidEdge(UsflabError, ValueError):
    pass


class NonpositiveConductance(UsflabError, ValueError):
    pass


class DisconnectedNetwork(UsflabError, ValueError):
    pass


class EmptyExterior(UsflabError, ValueError):
    pass


class CycleInContractSet(UsflabError, ValueError):
    pass


class SelfLoop(UsflabError, ValueError):
    pass


class TooManyTrees(UsflabError, RuntimeError):
    pass


class NullConditioningEvent(UsflabError, ValueError):
    pass


class IsolatedVertex(UsflabError, ValueError):
    pass


class WalkCapExceeded(UsflabError, RuntimeError):
    pass


class WiredEndpoint(UsflabError, ValueError):
    pass


class UnsupportedOutcome(UsflabError, ValueError):
    """An empirical outcome lies outside the support of the exact law."""


class NegativeMass(UsflabError, ValueError):
    pass


class InvalidForest(UsflabError, ValueError):
    pass


class UnknownFamily(UsflabError, ValueError):
    pass


class BadParams(UsflabError, ValueError):
    pass


class MissingWiredVertex(UsflabError, ValueError):
    pass


class FixtureMissing(UsflabError, FileNotFoundError):
    pass


class InconsistentForest(UsflabError, ValueError):
    pass


class FormatError(UsflabError, ValueError):
    pass
