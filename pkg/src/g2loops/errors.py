"""Exception hierarchy shared by all g2loops modules."""


class G2LoopsError(ValueError):
    """Base class for every error raised by the library."""


class DegenerateForm(G2LoopsError):
    pass


class SingularMetric(G2LoopsError):
    pass


class BadTriple(G2LoopsError):
    pass


class TooFewSamples(G2LoopsError):
    pass


class NotImmersed(G2LoopsError):
    pass


class DimensionMismatch(G2LoopsError):
    pass


class NyquistViolation(G2LoopsError):
    pass


class NonTrivializable(G2LoopsError):
    pass


class BadCycle(G2LoopsError):
    pass


class OddSTwist(G2LoopsError):
    pass


class NoIntersection(G2LoopsError):
    pass


class StepRejected(G2LoopsError):
    pass
