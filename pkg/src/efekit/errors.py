"""Exception types raised across efekit."""


class EfeKitError(ValueError):
    pass


class InvalidDistribution(EfeKitError):
    pass


class AllZero(EfeKitError):
    pass


class NegativeWeight(EfeKitError):
    pass


class LengthMismatch(EfeKitError):
    pass


class UnknownAxis(EfeKitError):
    pass


class ZeroMassEvent(EfeKitError):
    pass


class ParseError(EfeKitError):
    pass


class ValidationError(EfeKitError):
    def __init__(self, report):
        self.report = list(report)
        super().__init__("invalid model: " + "; ".join(self.report))


class ZeroEvidence(EfeKitError):
    def __init__(self, message="observation sequence has zero probability", step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class SupportError(EfeKitError):
    pass


class DepthTooLarge(EfeKitError):
    pass


class DepthMismatch(EfeKitError):
    pass


class DimMismatch(EfeKitError):
    pass


class InvalidTrail(EfeKitError):
    pass


class OverlappingSets(EfeKitError):
    pass


class TooManyPolicies(EfeKitError):
    pass
