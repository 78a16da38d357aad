#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aquastream/broker.hpp"
#include "aquastream/time.hpp"

namespace aquastream {

enum class Aggregate { avg, sum, min, max, count, last };

const char* aggregate_name(Aggregate a);
Aggregate parse_aggregate(std::string_view name);

struct Cadence {
    enum class Type { per_point, snapshot };
    Type type = Type::per_point;
    Duration interval{0}; // snapshot only

    static Cadence per_point() { return {}; }
    static Cadence snapshot(Duration interval) { return Cadence{Type::snapshot, interval}; }
};

// A sliding-window aggregate over one source stream. The window covers
// (as_of - lag - window, as_of - lag]: half-open on the left so a point on
// the right edge counts exactly once across consecutive snapshots.
struct WindowRule {
    std::string rule_id;
    std::string source_stream;
    Aggregate aggregate = Aggregate::avg;
    Duration window{0};
    Duration lag{0};
    Cadence cadence;
    int input_index = 0;

    nlohmann::json to_json() const;
    static WindowRule from_json(const nlohmann::json& j);
};

struct AggregateValue {
    std::string rule_id;
    Instant as_of{};
    double value = 0.0;
    std::size_t sample_count = 0;
};

struct InputVector {
    Instant as_of{};
    std::vector<double> values;       // ordered by input_index
    std::vector<bool> completeness;   // false for slots with no emission yet

    bool complete() const {
        for (bool c : completeness)
            if (!c) return false;
        return true;
    }
};

struct WindowEngineConfig {
    // Points older than this relative to the newest timestamp seen on the
    // rule's stream are dropped and counted instead of reopening windows.
    Duration lateness = minutes(5);
};

// Evaluates registered window rules against arriving points and assembles
// model input vectors by slot index. One engine instance serializes its rule
// updates; reads are safe concurrently with updates.
class WindowEngine {
public:
    using StreamExists = std::function<bool(const std::string&)>;

    explicit WindowEngine(WindowEngineConfig config = {}, StreamExists stream_exists = nullptr);

    // Rules with the same non-empty group must have distinct input indices.
    std::string register_rule(const WindowRule& rule, const std::string& group = "");
    void remove_rule(const std::string& rule_id);
    void remove_group(const std::string& group);
    bool has_rule(const std::string& rule_id) const;
    WindowRule rule(const std::string& rule_id) const;
    std::vector<WindowRule> list_rules() const;

    // Feeds one point to every rule on its stream. Returns the non-empty
    // aggregates emitted by this point (per-point rules emit at the point's
    // timestamp; snapshot rules emit for each cadence boundary reached).
    std::vector<AggregateValue> on_point(const DataPoint& point);

    // Advances snapshot cadences on time passage without data.
    std::vector<AggregateValue> on_clock(Instant now);

    // Most recent emission, or nullopt if the rule has never emitted.
    std::optional<AggregateValue> latest(const std::string& rule_id) const;

    // Slot i takes the latest value of rule_ids[i]; completeness[i] is false
    // when that rule has not emitted yet.
    InputVector assemble(const std::vector<std::string>& rule_ids_by_index, Instant as_of) const;

    std::uint64_t late_dropped() const;

private:
    struct RuleState;

    std::vector<AggregateValue> advance_locked(RuleState& rs, Instant watermark);
    std::optional<AggregateValue> compute_locked(const RuleState& rs, Instant as_of) const;

    WindowEngineConfig config_;
    StreamExists stream_exists_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<RuleState>> rules_;
    std::map<std::string, std::vector<std::shared_ptr<RuleState>>> by_stream_;
    std::uint64_t late_dropped_ = 0;
};

} // namespace aquastream
