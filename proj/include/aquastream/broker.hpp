#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aquastream/time.hpp"

namespace aquastream {

enum class StreamKind { sensor, derived, prediction, notification };

const char* stream_kind_name(StreamKind k);
StreamKind parse_stream_kind(std::string_view name);

struct DataPoint {
    std::string stream_id;
    Instant timestamp{};
    double value = 0.0;
};

struct StreamTopic {
    std::string stream_id;
    Instant created_at{};
    StreamKind kind = StreamKind::sensor;
};

struct BacklogPolicy {
    bool from_start = false; // false: deliver only points published after attach
    std::uint64_t offset = 0;

    static BacklogPolicy from_now() { return BacklogPolicy{false, 0}; }
    static BacklogPolicy from_offset(std::uint64_t n) { return BacklogPolicy{true, n}; }
};

// One JSON object per line: {"sid": "...", "ts": "ISO-8601", "v": number}.
// Parses without publishing; used by the TCP front door and replay.
DataPoint parse_wire_point(std::string_view line);
std::string format_wire_point(const DataPoint& p);

namespace detail {
struct TopicState;
}

// Cursor into one stream's retained log. Handles may be moved across threads;
// all methods are safe against concurrent publishers.
class Subscription {
public:
    // Non-blocking: returns everything currently available past the cursor.
    // Throws Error(subscriber_overflow) once the cursor has been trimmed away.
    std::vector<DataPoint> poll(std::size_t max = SIZE_MAX);

    // Blocking variant of poll for cross-thread consumption.
    std::optional<DataPoint> next(Duration timeout);

    std::uint64_t cursor() const;
    const std::string& stream_id() const;

private:
    friend class Broker;
    Subscription(std::shared_ptr<detail::TopicState> topic, std::uint64_t cursor);
    std::shared_ptr<detail::TopicState> topic_;
    std::uint64_t cursor_ = 0;
    bool overflowed_ = false;
    mutable std::mutex mu_;
};

struct BrokerConfig {
    // Retained points per stream; a subscriber lagging further than this is
    // disconnected with an overflow error instead of blocking publishers.
    std::size_t high_water_mark = 65536;
};

// In-process publish/subscribe broker. Publish is linearizable per stream;
// subscribers each receive every point published after their attach offset,
// in order, exactly once.
class Broker {
public:
    explicit Broker(BrokerConfig config = {});

    StreamTopic create_stream(const std::string& stream_id, StreamKind kind, Instant now);
    void remove_stream(const std::string& stream_id);
    bool has_stream(const std::string& stream_id) const;
    StreamTopic topic(const std::string& stream_id) const;
    std::vector<StreamTopic> list_streams() const;

    // Returns the assigned per-stream offset (0, 1, 2, ...).
    std::uint64_t publish(const DataPoint& point);

    std::shared_ptr<Subscription> subscribe(const std::string& stream_id, BacklogPolicy backlog);

    // Global publish sequence, for dispatcher wakeups: blocks until the
    // sequence differs from last_seen or the timeout elapses.
    std::uint64_t wait_activity(std::uint64_t last_seen, Duration timeout) const;
    std::uint64_t activity() const;

private:
    std::shared_ptr<detail::TopicState> find(const std::string& stream_id) const;

    BrokerConfig config_;
    mutable std::mutex mu_;
    mutable std::condition_variable activity_cv_;
    std::uint64_t activity_seq_ = 0;
    std::map<std::string, std::shared_ptr<detail::TopicState>> topics_;
};

} // namespace aquastream
