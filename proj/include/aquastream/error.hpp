#pragma once

#include <stdexcept>
#include <string>

namespace aquastream {

// Every recoverable failure in the system carries one of these codes so the
// REST layer and the CLI can map it to a status without string matching.
enum class Errc {
    // streams / broker
    duplicate_stream,
    invalid_id,
    unknown_stream,
    non_finite_value,
    parse_error,
    subscriber_overflow,
    wrong_stream_kind,
    // repository
    dangling_reference,
    closed_stream,
    bad_range,
    // windowing
    duplicate_index,
    bad_window,
    unknown_rule,
    // metrics
    length_mismatch,
    empty_series,
    constant_observed,
    undefined_metric,
    lag_too_large,
    constant_series,
    degenerate_denominator,
    // ann
    bad_config,
    arity_mismatch,
    empty_dataset,
    divergence_detected,
    // scheduler / archives
    bad_archive,
    duplicate_model,
    unknown_engine,
    unknown_model,
    invalid_schedule,
    already_running,
    not_running,
    incomplete_inputs,
    executor_failure,
    // notification
    bad_rule,
    // weather client
    transport,
    bad_status,
    // misc
    io_error,
};

const char* errc_name(Errc c);

// HTTP status the REST layer uses for a given code.
int errc_http_status(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace aquastream
