"""Exception hierarchy for the apportionment engine.

Library code raises these; only `cli.main` turns them into exit codes.
"""
from typing import Optional


class ApportionmentError(ValueError):
    """Base class for every rule or input violation the engine reports."""


class InvalidElection(ApportionmentError):
    pass


class InvalidRules(ApportionmentError):
    pass


class AllZeroVotes(ApportionmentError):
    """Seats were requested but every competing entity has zero votes (or weight)."""


class NoEligibleParty(ApportionmentError):
    pass


class InfeasibleAdjustment(ApportionmentError):
    """Internal consistency failure: adjustment seats cannot meet the party targets."""


class InfeasibleFloor(ApportionmentError):
    """A constituency floor or minimum permanent-seat count cannot be honoured."""


class NegativeVotes(ApportionmentError):
    pass


class MismatchedEntities(ApportionmentError):
    pass


class ZeroBasis(ApportionmentError):
    pass


class SingularTerm(ApportionmentError):
    """An entity with zero votes received seats, so the SL term is undefined."""


class InfeasibleProbe(ApportionmentError):
    pass


class ReplicationError(ApportionmentError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"replication {index} failed: {cause}")
        self.index = index
        self.cause = cause

    def __reduce__(self):
        return self.__class__, (self.index, self.cause)


class ElectionFileError(ApportionmentError):
    """Parse error in an election or rules file, located by line and column (1-based)."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, source: str = "<input>"):
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column
        self.source = source
