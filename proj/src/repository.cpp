#include "aquastream/repository.hpp"

#include "aquastream/csv.hpp"
#include "aquastream/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace aquastream {

struct Repository::StreamState {
    StreamRecord record;
    std::uint64_t file_id = 0;
    mutable std::mutex mu; // serializes appends and guards rows
    std::vector<ValueRow> rows; // append order
    std::FILE* log = nullptr;

    ~StreamState() {
        if (log) std::fclose(log);
    }
};

namespace {

nlohmann::json to_json(const SiteRecord& r) {
    nlohmann::json j{{"site_id", r.site_id}, {"name", r.name}};
    if (r.latitude) j["latitude"] = *r.latitude;
    if (r.longitude) j["longitude"] = *r.longitude;
    return j;
}

SiteRecord site_from_json(const nlohmann::json& j) {
    SiteRecord r;
    r.site_id = j.at("site_id").get<std::string>();
    r.name = j.value("name", "");
    if (j.contains("latitude") && !j["latitude"].is_null()) r.latitude = j["latitude"].get<double>();
    if (j.contains("longitude") && !j["longitude"].is_null()) r.longitude = j["longitude"].get<double>();
    return r;
}

} // namespace

Repository::Repository(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_ / "values");
    load();
}

Repository::~Repository() = default;

void Repository::load() {
    std::lock_guard lock(mu_);
    fs::path meta = dir_ / "metadata.json";
    if (!fs::exists(meta)) return;
    std::ifstream in(meta);
    nlohmann::json j;
    in >> j;

    next_file_id_ = j.value("next_file_id", std::uint64_t{1});
    for (const auto& e : j.value("sites", nlohmann::json::array())) {
        SiteRecord r = site_from_json(e);
        sites_[r.site_id] = r;
    }
    for (const auto& e : j.value("sources", nlohmann::json::array()))
        sources_[e.at("source_id").get<std::string>()] =
            SourceRecord{e.at("source_id").get<std::string>(), e.value("responsible_party", "")};
    for (const auto& e : j.value("units", nlohmann::json::array()))
        units_[e.at("unit_id").get<std::string>()] =
            UnitRecord{e.at("unit_id").get<std::string>(), e.value("symbol", "")};
    for (const auto& e : j.value("variables", nlohmann::json::array()))
        variables_[e.at("variable_id").get<std::string>()] =
            VariableRecord{e.at("variable_id").get<std::string>(), e.value("name", ""),
                           e.value("unit_id", "")};
    for (const auto& e : j.value("sensors", nlohmann::json::array()))
        sensors_[e.at("sensor_id").get<std::string>()] =
            SensorRecord{e.at("sensor_id").get<std::string>(), e.value("site_id", ""),
                         e.value("source_id", ""), e.value("description", "")};

    for (const auto& e : j.value("streams", nlohmann::json::array())) {
        auto state = std::make_shared<StreamState>();
        state->record.stream_id = e.at("stream_id").get<std::string>();
        state->record.sensor_id = e.value("sensor_id", "");
        state->record.variable_id = e.value("variable_id", "");
        state->record.created_at = instant_ms(e.value("created_at_ms", std::int64_t{0}));
        state->record.closed = e.value("closed", false);
        state->record.kind = parse_stream_kind(e.value("kind", "sensor"));
        state->file_id = e.at("file_id").get<std::uint64_t>();

        fs::path log = dir_ / "values" / (std::to_string(state->file_id) + ".log");
        if (fs::exists(log)) {
            std::ifstream vin(log);
            std::string line;
            while (std::getline(vin, line)) {
                if (line.empty()) continue;
                auto comma = line.find(',');
                if (comma == std::string::npos) continue; // torn tail write
                char* end = nullptr;
                std::int64_t ms = std::strtoll(line.c_str(), &end, 10);
                if (end == nullptr || *end != ',') continue;
                try {
                    double v = csv::parse_value(line.substr(comma + 1));
                    state->rows.push_back(ValueRow{instant_ms(ms), v});
                } catch (const Error&) {
                    continue; // torn tail write
                }
            }
        }
        streams_[state->record.stream_id] = std::move(state);
    }
}

void Repository::save_metadata_locked() {
    nlohmann::json j;
    j["next_file_id"] = next_file_id_;
    j["sites"] = nlohmann::json::array();
    for (const auto& [_, r] : sites_) j["sites"].push_back(to_json(r));
    j["sources"] = nlohmann::json::array();
    for (const auto& [_, r] : sources_)
        j["sources"].push_back({{"source_id", r.source_id}, {"responsible_party", r.responsible_party}});
    j["units"] = nlohmann::json::array();
    for (const auto& [_, r] : units_) j["units"].push_back({{"unit_id", r.unit_id}, {"symbol", r.symbol}});
    j["variables"] = nlohmann::json::array();
    for (const auto& [_, r] : variables_)
        j["variables"].push_back(
            {{"variable_id", r.variable_id}, {"name", r.name}, {"unit_id", r.unit_id}});
    j["sensors"] = nlohmann::json::array();
    for (const auto& [_, r] : sensors_)
        j["sensors"].push_back({{"sensor_id", r.sensor_id},
                                {"site_id", r.site_id},
                                {"source_id", r.source_id},
                                {"description", r.description}});
    j["streams"] = nlohmann::json::array();
    for (const auto& [_, s] : streams_)
        j["streams"].push_back({{"stream_id", s->record.stream_id},
                                {"sensor_id", s->record.sensor_id},
                                {"variable_id", s->record.variable_id},
                                {"created_at_ms", to_ms(s->record.created_at)},
                                {"closed", s->record.closed},
                                {"kind", stream_kind_name(s->record.kind)},
                                {"file_id", s->file_id}});

    fs::path tmp = dir_ / "metadata.json.tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(2);
    }
    fs::rename(tmp, dir_ / "metadata.json");
}

std::string Repository::upsert_site(const SiteRecord& r) {
    if (r.site_id.empty()) raise(Errc::invalid_id, "site id must not be empty");
    if (r.latitude && (*r.latitude < -90.0 || *r.latitude > 90.0))
        raise(Errc::bad_range, "latitude out of range");
    if (r.longitude && (*r.longitude < -180.0 || *r.longitude > 180.0))
        raise(Errc::bad_range, "longitude out of range");
    std::lock_guard lock(mu_);
    sites_[r.site_id] = r;
    save_metadata_locked();
    return r.site_id;
}

std::string Repository::upsert_source(const SourceRecord& r) {
    if (r.source_id.empty()) raise(Errc::invalid_id, "source id must not be empty");
    std::lock_guard lock(mu_);
    sources_[r.source_id] = r;
    save_metadata_locked();
    return r.source_id;
}

std::string Repository::upsert_unit(const UnitRecord& r) {
    if (r.unit_id.empty()) raise(Errc::invalid_id, "unit id must not be empty");
    std::lock_guard lock(mu_);
    units_[r.unit_id] = r;
    save_metadata_locked();
    return r.unit_id;
}

std::string Repository::upsert_variable(const VariableRecord& r) {
    if (r.variable_id.empty()) raise(Errc::invalid_id, "variable id must not be empty");
    std::lock_guard lock(mu_);
    if (!r.unit_id.empty() && !units_.count(r.unit_id))
        raise(Errc::dangling_reference, "variable references unknown unit '" + r.unit_id + "'");
    variables_[r.variable_id] = r;
    save_metadata_locked();
    return r.variable_id;
}

std::string Repository::upsert_sensor(const SensorRecord& r) {
    if (r.sensor_id.empty()) raise(Errc::invalid_id, "sensor id must not be empty");
    std::lock_guard lock(mu_);
    if (!r.site_id.empty() && !sites_.count(r.site_id))
        raise(Errc::dangling_reference, "sensor references unknown site '" + r.site_id + "'");
    if (!r.source_id.empty() && !sources_.count(r.source_id))
        raise(Errc::dangling_reference, "sensor references unknown source '" + r.source_id + "'");
    sensors_[r.sensor_id] = r;
    save_metadata_locked();
    return r.sensor_id;
}

std::optional<SiteRecord> Repository::site(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sites_.find(id);
    return it == sites_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<SourceRecord> Repository::source(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sources_.find(id);
    return it == sources_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<UnitRecord> Repository::unit(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = units_.find(id);
    return it == units_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<VariableRecord> Repository::variable(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = variables_.find(id);
    return it == variables_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<SensorRecord> Repository::sensor(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sensors_.find(id);
    return it == sensors_.end() ? std::nullopt : std::optional(it->second);
}

std::vector<SiteRecord> Repository::list_sites() const {
    std::lock_guard lock(mu_);
    std::vector<SiteRecord> out;
    for (const auto& [_, r] : sites_) out.push_back(r);
    return out;
}

std::vector<SourceRecord> Repository::list_sources() const {
    std::lock_guard lock(mu_);
    std::vector<SourceRecord> out;
    for (const auto& [_, r] : sources_) out.push_back(r);
    return out;
}

std::vector<UnitRecord> Repository::list_units() const {
    std::lock_guard lock(mu_);
    std::vector<UnitRecord> out;
    for (const auto& [_, r] : units_) out.push_back(r);
    return out;
}

std::vector<VariableRecord> Repository::list_variables() const {
    std::lock_guard lock(mu_);
    std::vector<VariableRecord> out;
    for (const auto& [_, r] : variables_) out.push_back(r);
    return out;
}

std::vector<SensorRecord> Repository::list_sensors() const {
    std::lock_guard lock(mu_);
    std::vector<SensorRecord> out;
    for (const auto& [_, r] : sensors_) out.push_back(r);
    return out;
}

StreamRecord Repository::create(const std::string& stream_id, const std::string& sensor_id,
                                const std::string& variable_id, StreamKind kind, Instant now) {
    if (stream_id.empty()) raise(Errc::invalid_id, "stream id must not be empty");
    std::lock_guard lock(mu_);
    if (streams_.count(stream_id)) raise(Errc::duplicate_stream, "stream '" + stream_id + "' already exists");
    if (!sensor_id.empty() && !sensors_.count(sensor_id))
        raise(Errc::dangling_reference, "stream references unknown sensor '" + sensor_id + "'");
    if (!variable_id.empty() && !variables_.count(variable_id))
        raise(Errc::dangling_reference, "stream references unknown variable '" + variable_id + "'");
    auto state = std::make_shared<StreamState>();
    state->record = StreamRecord{stream_id, sensor_id, variable_id, now, false, kind};
    state->file_id = next_file_id_++;
    streams_[stream_id] = state;
    save_metadata_locked();
    return state->record;
}

std::shared_ptr<Repository::StreamState> Repository::find(const std::string& stream_id) const {
    std::lock_guard lock(mu_);
    auto it = streams_.find(stream_id);
    if (it == streams_.end()) raise(Errc::unknown_stream, "stream '" + stream_id + "' not found");
    return it->second;
}

std::size_t Repository::append(const std::string& stream_id, std::span<const ValueRow> rows) {
    auto state = find(stream_id);
    std::lock_guard lock(state->mu);
    if (state->record.closed) raise(Errc::closed_stream, "stream '" + stream_id + "' is closed");
    for (const auto& r : rows)
        if (!std::isfinite(r.value))
            raise(Errc::non_finite_value, "refusing non-finite value on '" + stream_id + "'");
    if (!state->log) {
        fs::path log = dir_ / "values" / (std::to_string(state->file_id) + ".log");
        state->log = std::fopen(log.c_str(), "a");
        if (!state->log) raise(Errc::io_error, "cannot open value log for '" + stream_id + "'");
    }
    for (const auto& r : rows) {
        std::string v = csv::format_value(r.value);
        std::fprintf(state->log, "%lld,%s\n", static_cast<long long>(to_ms(r.timestamp)), v.c_str());
        state->rows.push_back(r);
    }
    std::fflush(state->log);
    return rows.size();
}

std::vector<StreamRecord> Repository::search(const StreamSearchFilter& filter) const {
    std::vector<std::shared_ptr<StreamState>> candidates;
    {
        std::lock_guard lock(mu_);
        for (const auto& [_, s] : streams_) {
            if (filter.variable_id && s->record.variable_id != *filter.variable_id) continue;
            if (filter.site_id) {
                auto sit = sensors_.find(s->record.sensor_id);
                if (sit == sensors_.end() || sit->second.site_id != *filter.site_id) continue;
            }
            candidates.push_back(s);
        }
    }
    std::vector<StreamRecord> out;
    for (const auto& s : candidates) {
        if (filter.from || filter.to) {
            Instant from = filter.from.value_or(instant_ms(INT64_MIN));
            Instant to = filter.to.value_or(instant_ms(INT64_MAX));
            std::lock_guard lock(s->mu);
            bool any = false;
            for (const auto& r : s->rows)
                if (r.timestamp >= from && r.timestamp < to) {
                    any = true;
                    break;
                }
            if (!any) continue;
        }
        out.push_back(s->record);
    }
    return out;
}

std::vector<ValueRow> Repository::retrieve(const std::string& stream_id, Instant from, Instant to,
                                           std::size_t limit) const {
    if (from > to) raise(Errc::bad_range, "retrieve range start is after its end");
    auto state = find(stream_id);
    std::vector<ValueRow> out;
    {
        std::lock_guard lock(state->mu);
        for (const auto& r : state->rows)
            if (r.timestamp >= from && r.timestamp < to) out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ValueRow& a, const ValueRow& b) { return a.timestamp < b.timestamp; });
    if (out.size() > limit) out.resize(limit);
    return out;
}

void Repository::close_stream(const std::string& stream_id) {
    auto state = find(stream_id);
    {
        std::lock_guard lock(state->mu);
        state->record.closed = true;
    }
    std::lock_guard lock(mu_);
    save_metadata_locked();
}

void Repository::remove(const std::string& stream_id) {
    std::shared_ptr<StreamState> state;
    {
        std::lock_guard lock(mu_);
        auto it = streams_.find(stream_id);
        if (it == streams_.end()) raise(Errc::unknown_stream, "stream '" + stream_id + "' not found");
        state = it->second;
        streams_.erase(it);
        save_metadata_locked();
    }
    std::lock_guard lock(state->mu);
    if (state->log) {
        std::fclose(state->log);
        state->log = nullptr;
    }
    std::error_code ec;
    fs::remove(dir_ / "values" / (std::to_string(state->file_id) + ".log"), ec);
}

std::string Repository::download_csv(const std::string& stream_id, Instant from, Instant to) const {
    auto rows = retrieve(stream_id, from, to);
    std::string out = "timestamp,value\n";
    for (const auto& r : rows) {
        out += format_instant(r.timestamp);
        out += ',';
        out += csv::format_value(r.value);
        out += '\n';
    }
    return out;
}

std::vector<ValueRow> Repository::parse_values_csv(const fs::path& file) {
    std::vector<ValueRow> out;
    for (const auto& row : csv::read_file(file)) {
        if (row.fields.size() != 2)
            raise(Errc::parse_error, "line " + std::to_string(row.line_no) + ": expected timestamp,value");
        try {
            out.push_back(ValueRow{parse_instant(row.fields[0]), csv::parse_value(row.fields[1])});
        } catch (const Error& e) {
            raise(e.code(), "line " + std::to_string(row.line_no) + ": " + e.what());
        }
    }
    return out;
}

bool Repository::has_stream(const std::string& stream_id) const {
    std::lock_guard lock(mu_);
    return streams_.count(stream_id) > 0;
}

StreamRecord Repository::stream(const std::string& stream_id) const {
    auto state = find(stream_id);
    std::lock_guard lock(state->mu);
    return state->record;
}

std::vector<StreamRecord> Repository::list_streams() const {
    std::lock_guard lock(mu_);
    std::vector<StreamRecord> out;
    for (const auto& [_, s] : streams_) out.push_back(s->record);
    return out;
}

std::size_t Repository::value_count(const std::string& stream_id) const {
    auto state = find(stream_id);
    std::lock_guard lock(state->mu);
    return state->rows.size();
}

} // namespace aquastream
