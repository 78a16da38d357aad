#include "aquastream/broker.hpp"

#include "aquastream/csv.hpp"
#include "aquastream/error.hpp"

#include <cmath>

#include "json.hpp"

namespace aquastream {

namespace detail {

struct TopicState {
    StreamTopic info;
    std::size_t high_water_mark;
    mutable std::mutex mu;
    std::condition_variable cv;
    std::deque<DataPoint> retained;
    std::uint64_t base_offset = 0; // offset of retained.front()
    std::uint64_t next_offset = 0;
    bool removed = false;
};

} // namespace detail

const char* stream_kind_name(StreamKind k) {
    switch (k) {
        case StreamKind::sensor: return "sensor";
        case StreamKind::derived: return "derived";
        case StreamKind::prediction: return "prediction";
        case StreamKind::notification: return "notification";
    }
    return "sensor";
}

StreamKind parse_stream_kind(std::string_view name) {
    if (name == "sensor") return StreamKind::sensor;
    if (name == "derived") return StreamKind::derived;
    if (name == "prediction") return StreamKind::prediction;
    if (name == "notification") return StreamKind::notification;
    raise(Errc::parse_error, "unknown stream kind '" + std::string(name) + "'");
}

DataPoint parse_wire_point(std::string_view line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        raise(Errc::parse_error, "malformed wire record");
    if (!j.contains("sid") || !j.contains("ts") || !j.contains("v"))
        raise(Errc::parse_error, "wire record must carry sid, ts, v");
    if (!j["sid"].is_string() || !j["ts"].is_string())
        raise(Errc::parse_error, "sid and ts must be strings");

    DataPoint p;
    p.stream_id = j["sid"].get<std::string>();
    p.timestamp = parse_instant(j["ts"].get<std::string>());
    const auto& v = j["v"];
    if (v.is_number()) {
        p.value = v.get<double>();
    } else if (v.is_string()) {
        p.value = csv::parse_value(v.get<std::string>());
    } else {
        raise(Errc::parse_error, "v must be a number");
    }
    if (!std::isfinite(p.value)) raise(Errc::non_finite_value, "wire record value is not finite");
    return p;
}

std::string format_wire_point(const DataPoint& p) {
    nlohmann::json j{{"sid", p.stream_id}, {"ts", format_instant(p.timestamp)}, {"v", p.value}};
    return j.dump();
}

Subscription::Subscription(std::shared_ptr<detail::TopicState> topic, std::uint64_t cursor)
    : topic_(std::move(topic)), cursor_(cursor) {}

std::vector<DataPoint> Subscription::poll(std::size_t max) {
    std::lock_guard sub_lock(mu_);
    std::vector<DataPoint> out;
    std::lock_guard lock(topic_->mu);
    if (overflowed_ || cursor_ < topic_->base_offset) {
        overflowed_ = true;
        raise(Errc::subscriber_overflow,
              "subscriber on '" + topic_->info.stream_id + "' fell behind the retained window");
    }
    while (cursor_ < topic_->next_offset && out.size() < max) {
        out.push_back(topic_->retained[static_cast<std::size_t>(cursor_ - topic_->base_offset)]);
        ++cursor_;
    }
    return out;
}

std::optional<DataPoint> Subscription::next(Duration timeout) {
    std::lock_guard sub_lock(mu_);
    std::unique_lock lock(topic_->mu);
    if (overflowed_ || cursor_ < topic_->base_offset) {
        overflowed_ = true;
        raise(Errc::subscriber_overflow,
              "subscriber on '" + topic_->info.stream_id + "' fell behind the retained window");
    }
    if (cursor_ >= topic_->next_offset) {
        topic_->cv.wait_for(lock, timeout, [&] { return cursor_ < topic_->next_offset || topic_->removed; });
        if (cursor_ >= topic_->next_offset) return std::nullopt;
    }
    if (cursor_ < topic_->base_offset) {
        overflowed_ = true;
        raise(Errc::subscriber_overflow,
              "subscriber on '" + topic_->info.stream_id + "' fell behind the retained window");
    }
    DataPoint p = topic_->retained[static_cast<std::size_t>(cursor_ - topic_->base_offset)];
    ++cursor_;
    return p;
}

std::uint64_t Subscription::cursor() const {
    std::lock_guard lock(mu_);
    return cursor_;
}

const std::string& Subscription::stream_id() const { return topic_->info.stream_id; }

Broker::Broker(BrokerConfig config) : config_(config) {}

StreamTopic Broker::create_stream(const std::string& stream_id, StreamKind kind, Instant now) {
    if (stream_id.empty()) raise(Errc::invalid_id, "stream id must not be empty");
    for (char c : stream_id)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
            raise(Errc::invalid_id, "stream id must not contain whitespace");
    std::lock_guard lock(mu_);
    if (topics_.count(stream_id)) raise(Errc::duplicate_stream, "stream '" + stream_id + "' already exists");
    auto state = std::make_shared<detail::TopicState>();
    state->info = StreamTopic{stream_id, now, kind};
    state->high_water_mark = config_.high_water_mark;
    topics_.emplace(stream_id, state);
    return state->info;
}

void Broker::remove_stream(const std::string& stream_id) {
    std::lock_guard lock(mu_);
    auto it = topics_.find(stream_id);
    if (it == topics_.end()) raise(Errc::unknown_stream, "stream '" + stream_id + "' not found");
    {
        std::lock_guard tlock(it->second->mu);
        it->second->removed = true;
    }
    it->second->cv.notify_all();
    topics_.erase(it);
}

bool Broker::has_stream(const std::string& stream_id) const {
    std::lock_guard lock(mu_);
    return topics_.count(stream_id) > 0;
}

StreamTopic Broker::topic(const std::string& stream_id) const {
    return find(stream_id)->info;
}

std::vector<StreamTopic> Broker::list_streams() const {
    std::lock_guard lock(mu_);
    std::vector<StreamTopic> out;
    out.reserve(topics_.size());
    for (const auto& [_, state] : topics_) out.push_back(state->info);
    return out;
}

std::shared_ptr<detail::TopicState> Broker::find(const std::string& stream_id) const {
    std::lock_guard lock(mu_);
    auto it = topics_.find(stream_id);
    if (it == topics_.end()) raise(Errc::unknown_stream, "stream '" + stream_id + "' not found");
    return it->second;
}

std::uint64_t Broker::publish(const DataPoint& point) {
    if (!std::isfinite(point.value))
        raise(Errc::non_finite_value, "refusing non-finite value on '" + point.stream_id + "'");
    auto state = find(point.stream_id);
    std::uint64_t offset;
    {
        std::lock_guard lock(state->mu);
        offset = state->next_offset++;
        state->retained.push_back(point);
        while (state->retained.size() > state->high_water_mark) {
            state->retained.pop_front();
            ++state->base_offset;
        }
    }
    state->cv.notify_all();
    {
        std::lock_guard lock(mu_);
        ++activity_seq_;
    }
    activity_cv_.notify_all();
    return offset;
}

std::shared_ptr<Subscription> Broker::subscribe(const std::string& stream_id, BacklogPolicy backlog) {
    auto state = find(stream_id);
    std::lock_guard lock(state->mu);
    std::uint64_t cursor = backlog.from_start ? backlog.offset : state->next_offset;
    return std::shared_ptr<Subscription>(new Subscription(state, cursor));
}

std::uint64_t Broker::wait_activity(std::uint64_t last_seen, Duration timeout) const {
    std::unique_lock lock(mu_);
    activity_cv_.wait_for(lock, timeout, [&] { return activity_seq_ != last_seen; });
    return activity_seq_;
}

std::uint64_t Broker::activity() const {
    std::lock_guard lock(mu_);
    return activity_seq_;
}

} // namespace aquastream
