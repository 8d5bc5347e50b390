"""Port-Hamiltonian realization toolkit.

Converts linear time-invariant systems, given as descriptor matrices,
state-space matrices, or time-domain input/output samples, into explicit
port-Hamiltonian form by three routes: a KYP/Riccati transformation of the
minimal realization, positive-real balanced truncation, and projected
gradient descent to the nearest pH decomposition.
"""

from .benchmarks import (LadderSpec, ladder_network, paper_example5,
                         random_descriptor_index1, random_passive, random_ph)
from .identify import (IOSequence, MarkovEstimate, bilinear_to_continuous,
                       bilinear_to_discrete, era_realize, markov_from_io)
from .kyp import (KYPSolution, PassivityVerdict, passivity_check, ph_from_kyp,
                  solve_kyp, stability_check)
from .minreal import (StaircaseResult, minimal_realization,
                      staircase_controllable, staircase_observable)
from .nearestph import (FGMOptions, OptTrace, PHDecomposition, fgm_nearest_ph,
                        lmi_init, nearest_ph_realization, objective,
                        project_psd, project_skew)
from .prbt import (PRGramians, PRSpectrum, pr_characteristic_values,
                   pr_gramians, prbt_reduce, prbt_to_ph)
from .regularize import (ConstraintMap, PencilClassification, check_consistency,
                         classify_pencil, to_semiexplicit, to_statespace)
from .systems import (DescriptorSystem, FrequencyResponse, PHSystem,
                      SemiExplicitSystem, StateSpaceSystem, Tolerances,
                      ValidationReport, default_grid, eval_transfer,
                      frequency_response, ph_to_statespace, response_error,
                      validate_ph)

__version__ = "0.1.0"
