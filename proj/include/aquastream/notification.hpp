#pragma once

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

enum class Cmp { gt, ge, lt, le };

const char* cmp_name(Cmp c);
Cmp parse_cmp(std::string_view name);

struct Qualifier {
    enum class Type { every_match, consecutive, sustained };
    Type type = Type::every_match;
    int n = 1;            // consecutive
    Duration window{0};   // sustained

    static Qualifier every_match() { return {}; }
    static Qualifier consecutive(int n) { return Qualifier{Type::consecutive, n, Duration{0}}; }
    static Qualifier sustained(Duration w) { return Qualifier{Type::sustained, 1, w}; }
};

struct NotificationRule {
    std::string rule_id;
    std::string source_stream;
    Cmp cmp = Cmp::gt;
    double threshold = 0.0;
    Qualifier qualifier;
    Duration cooldown{0};
    std::string message; // optional template text prefix

    nlohmann::json to_json() const;
    static NotificationRule from_json(const nlohmann::json& j);
};

struct NotificationEvent {
    std::string rule_id;
    Instant triggered_at{};
    std::vector<double> values; // the matching points that completed the pattern
    std::string message;

    nlohmann::json to_json() const;
};

// Threshold-detection engine over streams: every_match fires per matching
// point; consecutive(n) fires on the nth consecutive match and resets;
// sustained(w) fires when every point in the trailing window matches. All
// firings respect the rule's cooldown (a suppressed firing is dropped, and a
// consecutive counter restarts).
class NotificationEngine {
public:
    using StreamExists = std::function<bool(const std::string&)>;

    explicit NotificationEngine(StreamExists stream_exists = nullptr);

    std::string register_rule(const NotificationRule& rule);
    void remove_rule(const std::string& rule_id);
    bool has_rule(const std::string& rule_id) const;
    std::vector<NotificationRule> list_rules() const;

    std::vector<NotificationEvent> evaluate(const DataPoint& point);

private:
    struct RuleState {
        NotificationRule rule;
        int consecutive_count = 0;
        std::deque<std::pair<Instant, bool>> trail; // sustained window
        std::optional<Instant> last_fire;
    };

    bool matches(const NotificationRule& rule, double v) const;

    StreamExists stream_exists_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<RuleState>> rules_;
};

} // namespace aquastream
