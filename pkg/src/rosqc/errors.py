"""Exception hierarchy shared by all modules."""


class RosqcError(Exception):
    """Base class for all library errors."""


class ValidationError(RosqcError):
    """A fixture or manifest failed its load-time checks."""


class ZeroInput(RosqcError):
    """Operation undefined on inputs indistinguishable from zero."""


class BadDenominator(RosqcError):
    """A rational coordinate has p in its denominator."""


class NotFound(RosqcError):
    """Algebraic recognition produced no short vector passing verification."""


class RecognitionFailed(RosqcError):
    """Exact matrix entries were requested but lattice recognition failed."""


class ResidueObstruction(RosqcError):
    """A differential that must be residue-free has a nonzero residue."""


class BadReduction(RosqcError):
    """Curve data violates the monic/squarefree reduction requirements."""


class PrecisionExhausted(RosqcError):
    """Reduction denominators consumed the available p-adic precision."""


class SingularCup(RosqcError):
    """Cup product matrix is not invertible."""


class SingularSystem(RosqcError):
    """A linear system that should be uniquely solvable is not."""


class NotGoodDisc(RosqcError):
    """Operation requires a good residue disc."""


class SingularIminusFrob(RosqcError):
    """(I - Frob) or (Frob - p) not invertible at working precision."""


class DifferentDiscs(RosqcError):
    """Parallel transport endpoints lie in different residue discs."""


class NoEquivariantSplitting(RosqcError):
    """The equivariance constraints admit no splitting at this precision."""


class RankDeficient(RosqcError):
    """Height fit has too few independent tensors; carries achieved rank."""

    def __init__(self, rank, needed, msg=None):
        self.rank = rank
        self.needed = needed
        super().__init__(msg or f"rank {rank} < required {needed}")


class UnresolvedCluster(RosqcError):
    """A root cluster could not be separated within the digit budget."""


class MissingDisc(RosqcError):
    """A residue polydisc lacks the expansions needed for assembly."""


class MissingUpstream(RosqcError):
    """A pipeline stage was requested before its inputs exist."""


class BelowThreshold(RosqcError):
    """Asymptotic tau bound queried below its validity threshold i0."""


class Unreachable(RosqcError):
    """No truncation order within the configured cap satisfies the target."""
