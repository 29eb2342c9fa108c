"""Construction and certification of effective r-spin structures on rational nodal curves."""

from .classifier import ClassificationVerdict, classify, dimension, stratum_signature
from .nodal_curves import NodalCertificate, NodalCurve, build_nodal, certify
from .numerics import DEFAULT_POLICY, TolerancePolicy
from .rational_forms import FactoredRationalForm
from .residue_system import Configuration, StratumWeights, continue_to
from .spin_solver import ProblemSolution, SpinData, solve

__version__ = "0.1.0"
