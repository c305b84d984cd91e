#include "lidar/error.hpp"

namespace lidar {

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::not_symmetric: return "NotSymmetric";
        case errc::indefinite_beyond_tolerance: return "IndefiniteBeyondTolerance";
        case errc::singular_within_tolerance: return "SingularWithinTolerance";
        case errc::non_finite_input: return "NonFiniteInput";
        case errc::degenerate_spectrum: return "DegenerateSpectrum";
        case errc::too_few_classes: return "TooFewClasses";
        case errc::too_few_samples_per_class: return "TooFewSamplesPerClass";
        case errc::non_positive_delta: return "NonPositiveDelta";
        case errc::bad_target_dim: return "BadTargetDim";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::no_eligible_records: return "NoEligibleRecords";
        case errc::bad_spec: return "BadSpec";
        case errc::precondition_violated: return "PreconditionViolated";
        case errc::bad_magic: return "BadMagic";
        case errc::bad_version: return "BadVersion";
        case errc::truncated_payload: return "TruncatedPayload";
        case errc::invariant_violation: return "InvariantViolation";
        case errc::io_failure: return "IoFailure";
        case errc::missing_cell: return "MissingCell";
        case errc::duplicate_pair: return "DuplicatePair";
        case errc::bad_shape: return "BadShape";
        case errc::parse_error: return "ParseError";
        case errc::duplicate_model_id: return "DuplicateModelId";
        case errc::score_conflict: return "ScoreConflict";
    }
    return "UnknownError";
}

} // namespace lidar
