"""Quadratic Chabauty over number fields at desk scale.

Kernel pieces: capped-precision p-adic arithmetic, exact number fields and
their completions at split primes, truncated series, a Kedlaya-style
Frobenius for odd hyperelliptic curves, the Hodge filtration and Frobenius
structure of the quadratic Chabauty mixed extension, Nekovar local heights,
the precision calculus, a certified multivariate Hensel solver, and a
staged pipeline with a content-addressed cache.
"""

from .errors import RosqcError
from .padic import PadicNumber, iwasawa_log, teichmuller
from .numberfield import (IdeleClassCharacter, NumberField,
                          NumberFieldElement, PrimeEmbedding, char_eval,
                          split_embeddings)
from .lattice import recognize_algebraic
from .series import TauProfile, TruncatedSeries, formal_integrate, residue, tau_profile
from .geometry import (CurveFixture, Correspondence, ResiduePolydisc,
                       classify_polydiscs, hecke_to_correspondences,
                       hyperelliptic_fixture)
from .cohom import (FrobeniusData, ReductionResult, kedlaya_frobenius,
                    reduce_to_basis)
from .hodge import HodgeFiltrationResult, compute_hodge
from .frobstructure import (FrameEngine, MixedExtensionFrame, TransportFrame,
                            build_xi, transport)
from .heights import (HodgeSplitting, HeightPairingModel,
                      equivariant_splitting, fit_pairing, local_height,
                      projections)
from .precision import PrecisionCertificate, bound_tau, choose_truncation, constants
from .solver import RootCertificate, find_roots
from .chabauty import QCFunction, assemble_rho, intersect, linear_functionals
from .pipeline import Pipeline, RunManifest, run, stage

__version__ = "0.1.0"
