#include "aquastream/windowing.hpp"

#include "aquastream/error.hpp"

#include <algorithm>
#include <cmath>

namespace aquastream {

struct WindowEngine::RuleState {
    WindowRule rule;
    std::string group;
    std::deque<std::pair<Instant, double>> buffer; // sorted by timestamp
    Instant max_ts{};
    bool has_points = false;
    Instant next_boundary{}; // snapshot cadence
    bool boundary_armed = false;
    std::optional<AggregateValue> latest;
};

const char* aggregate_name(Aggregate a) {
    switch (a) {
        case Aggregate::avg: return "avg";
        case Aggregate::sum: return "sum";
        case Aggregate::min: return "min";
        case Aggregate::max: return "max";
        case Aggregate::count: return "count";
        case Aggregate::last: return "last";
    }
    return "avg";
}

Aggregate parse_aggregate(std::string_view name) {
    if (name == "avg") return Aggregate::avg;
    if (name == "sum") return Aggregate::sum;
    if (name == "min") return Aggregate::min;
    if (name == "max") return Aggregate::max;
    if (name == "count") return Aggregate::count;
    if (name == "last") return Aggregate::last;
    raise(Errc::parse_error, "unknown aggregate '" + std::string(name) + "'");
}

nlohmann::json WindowRule::to_json() const {
    nlohmann::json j{{"rule_id", rule_id},
                     {"source_stream", source_stream},
                     {"aggregate", aggregate_name(aggregate)},
                     {"window_s", static_cast<double>(window.count()) / 1000.0},
                     {"lag_s", static_cast<double>(lag.count()) / 1000.0},
                     {"input_index", input_index}};
    if (cadence.type == Cadence::Type::snapshot) {
        j["cadence"] = "snapshot";
        j["snapshot_interval_s"] = static_cast<double>(cadence.interval.count()) / 1000.0;
    } else {
        j["cadence"] = "per_point";
    }
    return j;
}

WindowRule WindowRule::from_json(const nlohmann::json& j) {
    WindowRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.source_stream = j.at("source_stream").get<std::string>();
    r.aggregate = parse_aggregate(j.at("aggregate").get<std::string>());
    r.window = Duration{static_cast<std::int64_t>(j.at("window_s").get<double>() * 1000.0)};
    r.lag = Duration{static_cast<std::int64_t>(j.value("lag_s", 0.0) * 1000.0)};
    std::string cad = j.value("cadence", "per_point");
    if (cad == "snapshot") {
        r.cadence = Cadence::snapshot(
            Duration{static_cast<std::int64_t>(j.at("snapshot_interval_s").get<double>() * 1000.0)});
    } else if (cad == "per_point") {
        r.cadence = Cadence::per_point();
    } else {
        raise(Errc::parse_error, "unknown cadence '" + cad + "'");
    }
    r.input_index = j.value("input_index", 0);
    return r;
}

WindowEngine::WindowEngine(WindowEngineConfig config, StreamExists stream_exists)
    : config_(config), stream_exists_(std::move(stream_exists)) {}

std::string WindowEngine::register_rule(const WindowRule& rule, const std::string& group) {
    if (rule.rule_id.empty()) raise(Errc::invalid_id, "rule id must not be empty");
    if (rule.window <= Duration::zero()) raise(Errc::bad_window, "window must be positive");
    if (rule.lag < Duration::zero()) raise(Errc::bad_window, "lag must be non-negative");
    if (rule.cadence.type == Cadence::Type::snapshot && rule.cadence.interval <= Duration::zero())
        raise(Errc::bad_window, "snapshot interval must be positive");
    if (rule.input_index < 0) raise(Errc::bad_window, "input index must be >= 0");
    if (stream_exists_ && !stream_exists_(rule.source_stream))
        raise(Errc::unknown_stream, "rule source stream '" + rule.source_stream + "' not found");

    std::lock_guard lock(mu_);
    if (rules_.count(rule.rule_id)) raise(Errc::duplicate_index, "rule '" + rule.rule_id + "' already registered");
    if (!group.empty()) {
        for (const auto& [_, rs] : rules_)
            if (rs->group == group && rs->rule.input_index == rule.input_index)
                raise(Errc::duplicate_index, "input index " + std::to_string(rule.input_index) +
                                                 " already bound in group '" + group + "'");
    }
    auto rs = std::make_shared<RuleState>();
    rs->rule = rule;
    rs->group = group;
    rules_[rule.rule_id] = rs;
    by_stream_[rule.source_stream].push_back(rs);
    return rule.rule_id;
}

void WindowEngine::remove_rule(const std::string& rule_id) {
    std::lock_guard lock(mu_);
    auto it = rules_.find(rule_id);
    if (it == rules_.end()) raise(Errc::unknown_rule, "rule '" + rule_id + "' not found");
    auto& vec = by_stream_[it->second->rule.source_stream];
    std::erase(vec, it->second);
    rules_.erase(it);
}

void WindowEngine::remove_group(const std::string& group) {
    if (group.empty()) return;
    std::lock_guard lock(mu_);
    std::vector<std::string> doomed;
    for (const auto& [id, rs] : rules_)
        if (rs->group == group) doomed.push_back(id);
    for (const auto& id : doomed) {
        auto it = rules_.find(id);
        auto& vec = by_stream_[it->second->rule.source_stream];
        std::erase(vec, it->second);
        rules_.erase(it);
    }
}

bool WindowEngine::has_rule(const std::string& rule_id) const {
    std::lock_guard lock(mu_);
    return rules_.count(rule_id) > 0;
}

WindowRule WindowEngine::rule(const std::string& rule_id) const {
    std::lock_guard lock(mu_);
    auto it = rules_.find(rule_id);
    if (it == rules_.end()) raise(Errc::unknown_rule, "rule '" + rule_id + "' not found");
    return it->second->rule;
}

std::vector<WindowRule> WindowEngine::list_rules() const {
    std::lock_guard lock(mu_);
    std::vector<WindowRule> out;
    for (const auto& [_, rs] : rules_) out.push_back(rs->rule);
    return out;
}

std::optional<AggregateValue> WindowEngine::compute_locked(const RuleState& rs, Instant as_of) const {
    const Instant hi = as_of - rs.rule.lag;              // inclusive
    const Instant lo = hi - rs.rule.window;              // exclusive
    auto begin = std::upper_bound(rs.buffer.begin(), rs.buffer.end(), lo,
                                  [](Instant t, const auto& p) { return t < p.first; });
    auto end = std::upper_bound(rs.buffer.begin(), rs.buffer.end(), hi,
                                [](Instant t, const auto& p) { return t < p.first; });
    if (begin >= end) return std::nullopt;

    AggregateValue out;
    out.rule_id = rs.rule.rule_id;
    out.as_of = as_of;
    out.sample_count = static_cast<std::size_t>(end - begin);
    switch (rs.rule.aggregate) {
        case Aggregate::avg: {
            double s = 0.0;
            for (auto it = begin; it != end; ++it) s += it->second;
            out.value = s / static_cast<double>(out.sample_count);
            break;
        }
        case Aggregate::sum: {
            double s = 0.0;
            for (auto it = begin; it != end; ++it) s += it->second;
            out.value = s;
            break;
        }
        case Aggregate::min: {
            double m = begin->second;
            for (auto it = begin; it != end; ++it) m = std::min(m, it->second);
            out.value = m;
            break;
        }
        case Aggregate::max: {
            double m = begin->second;
            for (auto it = begin; it != end; ++it) m = std::max(m, it->second);
            out.value = m;
            break;
        }
        case Aggregate::count:
            out.value = static_cast<double>(out.sample_count);
            break;
        case Aggregate::last:
            out.value = std::prev(end)->second; // greatest timestamp, latest arrival on ties
            break;
    }
    return out;
}

std::vector<AggregateValue> WindowEngine::advance_locked(RuleState& rs, Instant watermark) {
    std::vector<AggregateValue> out;
    if (rs.rule.cadence.type != Cadence::Type::snapshot || !rs.boundary_armed) return out;
    while (rs.next_boundary <= watermark) {
        if (auto agg = compute_locked(rs, rs.next_boundary)) {
            rs.latest = *agg;
            out.push_back(*agg);
        }
        rs.next_boundary += rs.rule.cadence.interval;
    }
    return out;
}

std::vector<AggregateValue> WindowEngine::on_point(const DataPoint& point) {
    std::lock_guard lock(mu_);
    std::vector<AggregateValue> out;
    auto it = by_stream_.find(point.stream_id);
    if (it == by_stream_.end()) return out; // unknown streams are ignored

    for (const auto& rs : it->second) {
        if (rs->has_points && point.timestamp + config_.lateness < rs->max_ts) {
            ++late_dropped_;
            continue;
        }
        // insert sorted; late-but-tolerated points land in timestamp order
        auto pos = std::upper_bound(rs->buffer.begin(), rs->buffer.end(), point.timestamp,
                                    [](Instant t, const auto& p) { return t < p.first; });
        rs->buffer.insert(pos, {point.timestamp, point.value});
        if (!rs->has_points || point.timestamp > rs->max_ts) rs->max_ts = point.timestamp;
        if (!rs->has_points && rs->rule.cadence.type == Cadence::Type::snapshot) {
            // first boundary: the next cadence multiple strictly after the first point
            auto iv = rs->rule.cadence.interval.count();
            auto ms = to_ms(point.timestamp);
            std::int64_t next = (ms / iv) * iv;
            while (next <= ms) next += iv;
            rs->next_boundary = instant_ms(next);
            rs->boundary_armed = true;
        }
        rs->has_points = true;

        if (rs->rule.cadence.type == Cadence::Type::per_point) {
            if (auto agg = compute_locked(*rs, point.timestamp)) {
                rs->latest = *agg;
                out.push_back(*agg);
            }
        } else {
            auto emitted = advance_locked(*rs, point.timestamp);
            out.insert(out.end(), emitted.begin(), emitted.end());
        }

        // evict points that no future window can reach: emissions never run at
        // as_of < max_ts - lateness, and the window is open on the left
        Instant horizon = rs->max_ts - config_.lateness - rs->rule.lag - rs->rule.window;
        while (!rs->buffer.empty() && rs->buffer.front().first <= horizon) rs->buffer.pop_front();
    }
    return out;
}

std::vector<AggregateValue> WindowEngine::on_clock(Instant now) {
    std::lock_guard lock(mu_);
    std::vector<AggregateValue> out;
    for (const auto& [_, rs] : rules_) {
        auto emitted = advance_locked(*rs, now);
        out.insert(out.end(), emitted.begin(), emitted.end());
    }
    return out;
}

std::optional<AggregateValue> WindowEngine::latest(const std::string& rule_id) const {
    std::lock_guard lock(mu_);
    auto it = rules_.find(rule_id);
    if (it == rules_.end()) raise(Errc::unknown_rule, "rule '" + rule_id + "' not found");
    return it->second->latest;
}

InputVector WindowEngine::assemble(const std::vector<std::string>& rule_ids_by_index, Instant as_of) const {
    std::lock_guard lock(mu_);
    InputVector iv;
    iv.as_of = as_of;
    iv.values.resize(rule_ids_by_index.size(), 0.0);
    iv.completeness.resize(rule_ids_by_index.size(), false);
    for (std::size_t i = 0; i < rule_ids_by_index.size(); ++i) {
        auto it = rules_.find(rule_ids_by_index[i]);
        if (it == rules_.end())
            raise(Errc::unknown_rule, "rule '" + rule_ids_by_index[i] + "' not found");
        if (it->second->latest) {
            iv.values[i] = it->second->latest->value;
            iv.completeness[i] = true;
        }
    }
    return iv;
}

std::uint64_t WindowEngine::late_dropped() const {
    std::lock_guard lock(mu_);
    return late_dropped_;
}

} // namespace aquastream
