#include "rda/common.hpp"

namespace rda {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DegenerateInterface: return "degenerate_interface";
    case ErrorKind::RootFindFailure: return "root_find_failure";
    case ErrorKind::ProjectionDivergence: return "projection_divergence";
    case ErrorKind::MultipleRoots: return "multiple_roots";
    case ErrorKind::EmptySide: return "empty_side";
    case ErrorKind::SigmaExhausted: return "sigma_exhausted";
    case ErrorKind::PatchInfeasible: return "patch_infeasible";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::SingularB: return "singular_b";
    case ErrorKind::MissingReconstruction: return "missing_reconstruction";
    case ErrorKind::NonPositivePenalty: return "non_positive_penalty";
    case ErrorKind::OrphanFineDof: return "orphan_fine_dof";
    case ErrorKind::Breakdown: return "breakdown";
    case ErrorKind::NonlinearPreconditioner: return "nonlinear_preconditioner";
    case ErrorKind::IndefiniteLevel: return "indefinite_level";
    case ErrorKind::FactorizationFailure: return "factorization_failure";
    case ErrorKind::MissingExact: return "missing_exact";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace rda
