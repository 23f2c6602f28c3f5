"""H2-optimal SISO model reduction by IRKA in primitive rational Krylov bases."""

from .diagnostics import (
    BackwardCertificate,
    backward_reduced_perturbation,
    backward_system_perturbation,
    certify,
    condition_report,
    eigenvalue_perturbation_bound,
    epsilon_quantities,
)
from .driver import IrkaConfig, IrkaResult, IterationRecord, Status, default_init, irka_step, realify, run_irka
from .errors import *  # noqa: F401,F403
from .interpolation import (
    PrimitiveBases,
    ReducedModel,
    build_primitive_bases,
    cauchy_matrix,
    companion_eig,
    left_eigvector,
    loewner_entry,
    model_from_data,
    nodal_eval,
    project_reduced,
    reduced_transfer_deriv,
    reduced_transfer_eval,
    residues,
    secular_eval,
    secular_roots,
)
from .lti import LtiSystem, SpectrumSpec, eval_transfer, eval_transfer_deriv, h2_error, h2_norm, is_stable, synth_random_stable
from .placement import blended_update, companion_poles, feedback_vector, kv_equivalence_check, placement_q
from .shifts import (
    ShiftSet,
    detect_cycle,
    flip_unstable,
    hausdorff_distance,
    matching_assignment,
    matching_distance,
    reflect,
    separate,
)

__version__ = "0.1.0"
