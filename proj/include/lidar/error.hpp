#pragma once

#include <stdexcept>
#include <string>

namespace lidar {

/// Error codes for every failure the library reports. Names mirror the
/// user-facing identifiers printed by the CLI and asserted in tests.
enum class errc {
    // spectra
    not_symmetric,
    indefinite_beyond_tolerance,
    singular_within_tolerance,
    non_finite_input,
    degenerate_spectrum,
    // scatter
    too_few_classes,
    too_few_samples_per_class,
    non_positive_delta,
    bad_target_dim,
    // metrics
    dimension_mismatch,
    // rankstats
    no_eligible_records,
    // synth
    bad_spec,
    precondition_violated,
    // io / pipeline
    bad_magic,
    bad_version,
    truncated_payload,
    invariant_violation,
    io_failure,
    missing_cell,
    duplicate_pair,
    bad_shape,
    parse_error,
    duplicate_model_id,
    score_conflict,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace lidar
