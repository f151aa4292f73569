"""Exception hierarchy shared across the toolkit."""


class MetabalanceError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MetabalanceError):
    """A pool/deck/patch file violates its schema. Message cites the locus."""


class UnknownCardError(MetabalanceError):
    """A card id does not resolve in the pool."""


class DeckError(MetabalanceError):
    """A deck violates construction rules (size, copy limit, class)."""


class LayoutError(MetabalanceError):
    """A patch vector does not match the pool's chromosome layout."""


class ConfigError(MetabalanceError):
    """An experiment or arena configuration is invalid."""


class IllegalActionError(MetabalanceError):
    """An action was applied to a state where it is not legal."""


class TerminalError(MetabalanceError):
    """An operation requiring an in-progress game got a finished one."""


class IncompleteMatrixError(MetabalanceError):
    """A match-up matrix is missing cells needed by the computation."""


class InsufficientDataError(MetabalanceError):
    """Fewer than two defined points were available for a correlation."""
