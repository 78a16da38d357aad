#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aquastream/broker.hpp"
#include "aquastream/time.hpp"

namespace aquastream {

// Metadata entities: Stream -> Sensor -> {Site, Source}, Variable -> Unit.

struct StreamRecord {
    std::string stream_id;
    std::string sensor_id;
    std::string variable_id;
    Instant created_at{};
    bool closed = false;
    StreamKind kind = StreamKind::sensor;
};

struct SensorRecord {
    std::string sensor_id;
    std::string site_id;
    std::string source_id;
    std::string description;
};

struct VariableRecord {
    std::string variable_id;
    std::string name; // e.g. "air temperature"
    std::string unit_id;
};

struct UnitRecord {
    std::string unit_id;
    std::string symbol; // e.g. "degC", "mm"
};

struct SiteRecord {
    std::string site_id;
    std::string name;
    std::optional<double> latitude;
    std::optional<double> longitude;
};

struct SourceRecord {
    std::string source_id;
    std::string responsible_party;
};

struct ValueRow {
    Instant timestamp{};
    double value = 0.0;
};

struct StreamSearchFilter {
    std::optional<std::string> variable_id;
    std::optional<std::string> site_id;
    std::optional<Instant> from; // streams with at least one value in [from, to)
    std::optional<Instant> to;
};

// File-backed store: one metadata JSON document plus an append-only value log
// per stream. Appends to one stream are serialized; reads see a consistent
// prefix and may run concurrently with appends to other streams.
class Repository {
public:
    explicit Repository(std::filesystem::path dir);
    ~Repository();

    // metadata upserts (idempotent by id); referenced ids must exist
    std::string upsert_site(const SiteRecord& r);
    std::string upsert_source(const SourceRecord& r);
    std::string upsert_unit(const UnitRecord& r);
    std::string upsert_variable(const VariableRecord& r);
    std::string upsert_sensor(const SensorRecord& r);

    std::optional<SiteRecord> site(const std::string& id) const;
    std::optional<SourceRecord> source(const std::string& id) const;
    std::optional<UnitRecord> unit(const std::string& id) const;
    std::optional<VariableRecord> variable(const std::string& id) const;
    std::optional<SensorRecord> sensor(const std::string& id) const;
    std::vector<SiteRecord> list_sites() const;
    std::vector<SourceRecord> list_sources() const;
    std::vector<UnitRecord> list_units() const;
    std::vector<VariableRecord> list_variables() const;
    std::vector<SensorRecord> list_sensors() const;

    StreamRecord create(const std::string& stream_id, const std::string& sensor_id,
                        const std::string& variable_id, StreamKind kind, Instant now);
    std::size_t append(const std::string& stream_id, std::span<const ValueRow> rows);
    std::vector<StreamRecord> search(const StreamSearchFilter& filter) const;
    // rows with from <= ts < to, ascending by timestamp (append order for ties)
    std::vector<ValueRow> retrieve(const std::string& stream_id, Instant from, Instant to,
                                   std::size_t limit = SIZE_MAX) const;
    void close_stream(const std::string& stream_id);
    void remove(const std::string& stream_id);
    // header "timestamp,value"; ISO-8601 UTC; shortest round-trip numbers
    std::string download_csv(const std::string& stream_id, Instant from, Instant to) const;
    static std::vector<ValueRow> parse_values_csv(const std::filesystem::path& file);

    bool has_stream(const std::string& stream_id) const;
    StreamRecord stream(const std::string& stream_id) const;
    std::vector<StreamRecord> list_streams() const;
    std::size_t value_count(const std::string& stream_id) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    struct StreamState;

    void load();
    void save_metadata_locked();
    std::shared_ptr<StreamState> find(const std::string& stream_id) const;

    std::filesystem::path dir_;
    mutable std::mutex mu_; // guards metadata maps and the stream index
    std::map<std::string, SiteRecord> sites_;
    std::map<std::string, SourceRecord> sources_;
    std::map<std::string, UnitRecord> units_;
    std::map<std::string, VariableRecord> variables_;
    std::map<std::string, SensorRecord> sensors_;
    std::map<std::string, std::shared_ptr<StreamState>> streams_;
    std::uint64_t next_file_id_ = 1;
};

} // namespace aquastream
