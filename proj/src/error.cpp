#include "aquastream/error.hpp"

namespace aquastream {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::duplicate_stream: return "DuplicateStream";
        case Errc::invalid_id: return "InvalidId";
        case Errc::unknown_stream: return "UnknownStream";
        case Errc::non_finite_value: return "NonFiniteValue";
        case Errc::parse_error: return "ParseError";
        case Errc::subscriber_overflow: return "SubscriberOverflow";
        case Errc::wrong_stream_kind: return "WrongStreamKind";
        case Errc::dangling_reference: return "DanglingReference";
        case Errc::closed_stream: return "ClosedStream";
        case Errc::bad_range: return "BadRange";
        case Errc::duplicate_index: return "DuplicateIndex";
        case Errc::bad_window: return "BadWindow";
        case Errc::unknown_rule: return "UnknownRule";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::empty_series: return "EmptySeries";
        case Errc::constant_observed: return "ConstantObserved";
        case Errc::undefined_metric: return "Undefined";
        case Errc::lag_too_large: return "LagTooLarge";
        case Errc::constant_series: return "ConstantSeries";
        case Errc::degenerate_denominator: return "DegenerateDenominator";
        case Errc::bad_config: return "BadConfig";
        case Errc::arity_mismatch: return "ArityMismatch";
        case Errc::empty_dataset: return "EmptyDataset";
        case Errc::divergence_detected: return "DivergenceDetected";
        case Errc::bad_archive: return "BadArchive";
        case Errc::duplicate_model: return "DuplicateModel";
        case Errc::unknown_engine: return "UnknownEngine";
        case Errc::unknown_model: return "UnknownModel";
        case Errc::invalid_schedule: return "InvalidSchedule";
        case Errc::already_running: return "AlreadyRunning";
        case Errc::not_running: return "NotRunning";
        case Errc::incomplete_inputs: return "IncompleteInputs";
        case Errc::executor_failure: return "ExecutorFailure";
        case Errc::bad_rule: return "BadRule";
        case Errc::transport: return "Transport";
        case Errc::bad_status: return "BadStatus";
        case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

int errc_http_status(Errc c) {
    switch (c) {
        case Errc::invalid_id:
        case Errc::non_finite_value:
        case Errc::parse_error:
        case Errc::bad_range:
        case Errc::duplicate_index:
        case Errc::bad_window:
        case Errc::length_mismatch:
        case Errc::empty_series:
        case Errc::constant_observed:
        case Errc::undefined_metric:
        case Errc::lag_too_large:
        case Errc::constant_series:
        case Errc::degenerate_denominator:
        case Errc::bad_config:
        case Errc::arity_mismatch:
        case Errc::empty_dataset:
        case Errc::bad_archive:
        case Errc::invalid_schedule:
        case Errc::bad_rule:
        case Errc::bad_status:
            return 400;
        case Errc::unknown_stream:
        case Errc::unknown_rule:
        case Errc::unknown_engine:
        case Errc::unknown_model:
            return 404;
        case Errc::duplicate_stream:
        case Errc::duplicate_model:
        case Errc::already_running:
        case Errc::not_running:
        case Errc::closed_stream:
        case Errc::wrong_stream_kind:
        case Errc::dangling_reference:
        case Errc::incomplete_inputs:
            return 409;
        case Errc::transport:
            return 502;
        case Errc::subscriber_overflow:
        case Errc::divergence_detected:
        case Errc::executor_failure:
        case Errc::io_error:
            return 500;
    }
    return 500;
}

} // namespace aquastream
