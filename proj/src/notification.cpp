#include "aquastream/notification.hpp"

#include "aquastream/csv.hpp"
#include "aquastream/error.hpp"

namespace aquastream {

const char* cmp_name(Cmp c) {
    switch (c) {
        case Cmp::gt: return "gt";
        case Cmp::ge: return "ge";
        case Cmp::lt: return "lt";
        case Cmp::le: return "le";
    }
    return "gt";
}

Cmp parse_cmp(std::string_view name) {
    if (name == "gt") return Cmp::gt;
    if (name == "ge") return Cmp::ge;
    if (name == "lt") return Cmp::lt;
    if (name == "le") return Cmp::le;
    raise(Errc::parse_error, "unknown comparator '" + std::string(name) + "'");
}

nlohmann::json NotificationRule::to_json() const {
    nlohmann::json j{{"rule_id", rule_id},
                     {"source_stream", source_stream},
                     {"cmp", cmp_name(cmp)},
                     {"threshold", threshold},
                     {"cooldown_s", static_cast<double>(cooldown.count()) / 1000.0},
                     {"message", message}};
    switch (qualifier.type) {
        case Qualifier::Type::every_match: j["qualifier"] = "every_match"; break;
        case Qualifier::Type::consecutive:
            j["qualifier"] = "consecutive";
            j["n"] = qualifier.n;
            break;
        case Qualifier::Type::sustained:
            j["qualifier"] = "sustained";
            j["window_s"] = static_cast<double>(qualifier.window.count()) / 1000.0;
            break;
    }
    return j;
}

NotificationRule NotificationRule::from_json(const nlohmann::json& j) {
    NotificationRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.source_stream = j.at("source_stream").get<std::string>();
    r.cmp = parse_cmp(j.at("cmp").get<std::string>());
    r.threshold = j.at("threshold").get<double>();
    r.cooldown = Duration{static_cast<std::int64_t>(j.value("cooldown_s", 0.0) * 1000.0)};
    r.message = j.value("message", "");
    std::string q = j.value("qualifier", "every_match");
    if (q == "every_match") {
        r.qualifier = Qualifier::every_match();
    } else if (q == "consecutive") {
        r.qualifier = Qualifier::consecutive(j.at("n").get<int>());
    } else if (q == "sustained") {
        r.qualifier = Qualifier::sustained(
            Duration{static_cast<std::int64_t>(j.at("window_s").get<double>() * 1000.0)});
    } else {
        raise(Errc::parse_error, "unknown qualifier '" + q + "'");
    }
    return r;
}

nlohmann::json NotificationEvent::to_json() const {
    return nlohmann::json{{"rule_id", rule_id},
                          {"triggered_at", format_instant(triggered_at)},
                          {"values", values},
                          {"message", message}};
}

NotificationEngine::NotificationEngine(StreamExists stream_exists)
    : stream_exists_(std::move(stream_exists)) {}

std::string NotificationEngine::register_rule(const NotificationRule& rule) {
    if (rule.rule_id.empty()) raise(Errc::bad_rule, "rule id must not be empty");
    if (rule.qualifier.type == Qualifier::Type::consecutive && rule.qualifier.n < 1)
        raise(Errc::bad_rule, "consecutive(n) requires n >= 1");
    if (rule.qualifier.type == Qualifier::Type::sustained && rule.qualifier.window <= Duration::zero())
        raise(Errc::bad_rule, "sustained window must be positive");
    if (rule.cooldown < Duration::zero()) raise(Errc::bad_rule, "cooldown must be >= 0");
    if (stream_exists_ && !stream_exists_(rule.source_stream))
        raise(Errc::unknown_stream, "rule source stream '" + rule.source_stream + "' not found");
    std::lock_guard lock(mu_);
    if (rules_.count(rule.rule_id)) raise(Errc::bad_rule, "rule '" + rule.rule_id + "' already registered");
    auto rs = std::make_shared<RuleState>();
    rs->rule = rule;
    rules_[rule.rule_id] = rs;
    return rule.rule_id;
}

void NotificationEngine::remove_rule(const std::string& rule_id) {
    std::lock_guard lock(mu_);
    if (!rules_.erase(rule_id)) raise(Errc::unknown_rule, "rule '" + rule_id + "' not found");
}

bool NotificationEngine::has_rule(const std::string& rule_id) const {
    std::lock_guard lock(mu_);
    return rules_.count(rule_id) > 0;
}

std::vector<NotificationRule> NotificationEngine::list_rules() const {
    std::lock_guard lock(mu_);
    std::vector<NotificationRule> out;
    for (const auto& [_, rs] : rules_) out.push_back(rs->rule);
    return out;
}

bool NotificationEngine::matches(const NotificationRule& rule, double v) const {
    switch (rule.cmp) {
        case Cmp::gt: return v > rule.threshold;
        case Cmp::ge: return v >= rule.threshold;
        case Cmp::lt: return v < rule.threshold;
        case Cmp::le: return v <= rule.threshold;
    }
    return false;
}

std::vector<NotificationEvent> NotificationEngine::evaluate(const DataPoint& point) {
    std::lock_guard lock(mu_);
    std::vector<NotificationEvent> out;
    for (const auto& [_, rs] : rules_) {
        const auto& rule = rs->rule;
        if (rule.source_stream != point.stream_id) continue;
        bool match = matches(rule, point.value);

        bool fire = false;
        std::vector<double> values;
        switch (rule.qualifier.type) {
            case Qualifier::Type::every_match:
                if (match) {
                    fire = true;
                    values = {point.value};
                }
                break;
            case Qualifier::Type::consecutive:
                if (!match) {
                    rs->consecutive_count = 0;
                    rs->run_values.clear();
                } else {
                    rs->run_values.push_back(point.value);
                    if (++rs->consecutive_count >= rule.qualifier.n) {
                        fire = true;
                        values = rs->run_values;
                        rs->consecutive_count = 0; // re-arm: n fresh matches needed
                        rs->run_values.clear();
                    }
                }
                break;
            case Qualifier::Type::sustained: {
                rs->trail.emplace_back(point.timestamp, match);
                Instant lo = point.timestamp - rule.qualifier.window;
                while (!rs->trail.empty() && rs->trail.front().first <= lo) rs->trail.pop_front();
                bool all = !rs->trail.empty();
                for (const auto& [_, m] : rs->trail)
                    if (!m) {
                        all = false;
                        break;
                    }
                if (all) {
                    fire = true;
                    values = {point.value};
                }
                break;
            }
        }

        if (!fire) continue;
        if (rs->last_fire && point.timestamp - *rs->last_fire < rule.cooldown) continue; // suppressed
        rs->last_fire = point.timestamp;

        NotificationEvent ev;
        ev.rule_id = rule.rule_id;
        ev.triggered_at = point.timestamp;
        ev.values = std::move(values);
        ev.message = (rule.message.empty() ? "rule " + rule.rule_id : rule.message) + ": value " +
                     csv::format_value(point.value) + " " + cmp_name(rule.cmp) + " " +
                     csv::format_value(rule.threshold) + " on " + rule.source_stream + " at " +
                     format_instant(point.timestamp);
        out.push_back(std::move(ev));
    }
    return out;
}

} // namespace aquastream
