"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line runner:
2 for configuration problems, 3 for numerical failures.
"""


class BFKError(Exception):
    exit_code = 3


class ConfigInvalid(BFKError):
    exit_code = 2


class CacheCorrupt(BFKError):
    exit_code = 2


class SingularSystem(BFKError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DefectiveReduction(BFKError):
    pass


class NotSPD(BFKError):
    pass


class BranchCutHit(BFKError):
    pass


class BranchJump(BFKError):
    pass


class BracketFailure(BFKError):
    pass


class IncompleteEnumeration(BFKError):
    pass


class PoleHit(BFKError):
    def __init__(self, message, regular_part=None):
        super().__init__(message)
        self.regular_part = regular_part


class InsufficientSpectrum(BFKError):
    pass


class IllConditionedFit(BFKError):
    pass


class IllConditioned(IllConditionedFit):
    pass


class ResidualTooLarge(BFKError):
    pass


class EigenvalueHit(BFKError):
    pass


class TailModelMismatch(BFKError):
    pass


class TailBoundViolated(BFKError):
    pass


class SpectrumNotEnclosed(BFKError):
    pass
