"""Incompatibility of multiparameter quantum estimation.

Quantum Fisher information, commutator matrix and the closed-form bound
``I*`` (:mod:`~qincompat.estimation`), the Holevo-Cramer-Rao bound and the
incompatibility figure ``r`` computed by semidefinite programming
(:mod:`~qincompat.holevo`, :mod:`~qincompat.sdp`), and probe designs with a
vanishing commutator matrix (:mod:`~qincompat.designs`).
"""
from .errors import (DegenerateModel, InvalidInput, ModelNotDifferentiable, NoConstructionNeeded,
                     NoIncompatibility, QIncompatError, SingularFisher, SingularMatrix,
                     SolverFailure)
from .model import (EncodedModel, GeneratorSet, NoiseSpec, StatisticalModel, encode,
                    effective_generators, lift_local_generators, pure_state, reparametrize)
from .estimation import (InfoBundle, c_s, c_z, info_bundle, istar, kappa_star,
                         optimal_weight_istar, qubit_closed_form, separable_bound, sld)
from .holevo import IncompatReport, holevo_bound, r_figure
from .designs import (AntiparallelSpec, CompatibilityCertificate, Verdict, ancilla_model,
                      antiparallel_model, antiparallel_pair, certify, double_model,
                      max_entangled_state)

__version__ = "0.1.0"

__all__ = [
    "AntiparallelSpec", "CompatibilityCertificate", "DegenerateModel", "EncodedModel",
    "GeneratorSet", "IncompatReport", "InfoBundle", "InvalidInput", "ModelNotDifferentiable",
    "NoConstructionNeeded", "NoIncompatibility", "NoiseSpec", "QIncompatError", "SingularFisher",
    "SingularMatrix", "SolverFailure", "StatisticalModel", "Verdict", "ancilla_model",
    "antiparallel_model", "antiparallel_pair", "c_s", "c_z", "certify", "double_model",
    "effective_generators", "encode", "holevo_bound", "info_bundle", "istar", "kappa_star",
    "lift_local_generators", "max_entangled_state", "optimal_weight_istar", "pure_state",
    "qubit_closed_form", "r_figure", "reparametrize", "separable_bound", "sld",
]
