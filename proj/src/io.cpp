#include "lidar/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lidar {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const unsigned char* b) {
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) raise(errc::io_failure, "read failed on '" + path.string() + "'");
    return std::move(buf).str();
}

} // namespace

EmbeddingBatch read_emb1(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    const size_t size = bytes.size();

    if (size < 4) raise(errc::truncated_payload, "file shorter than the magic");
    if (std::memcmp(data, kMagic, 4) != 0) {
        raise(errc::bad_magic, "expected magic EMB1, got '" + bytes.substr(0, 4) + "'");
    }
    if (size < 22) raise(errc::truncated_payload, "file shorter than the fixed header");

    const std::uint32_t version = get_u32(data + 4);
    if (version != kVersion) {
        raise(errc::bad_version, "unsupported version " + std::to_string(version));
    }
    const std::uint32_t n = get_u32(data + 8);
    const std::uint32_t q = get_u32(data + 12);
    const std::uint32_t p = get_u32(data + 16);
    const std::uint16_t label_len = get_u16(data + 20);

    if (n < 2 || q < 2 || p < 1) {
        raise(errc::invariant_violation, "header requires n >= 2, q >= 2, p >= 1 (got n=" +
                                             std::to_string(n) + ", q=" + std::to_string(q) +
                                             ", p=" + std::to_string(p) + ")");
    }

    const size_t header_size = 22 + static_cast<size_t>(label_len);
    if (size < header_size) raise(errc::truncated_payload, "file shorter than its branch label");

    const std::uint64_t count = static_cast<std::uint64_t>(n) * q * p;
    const std::uint64_t expected = 4ull * count;
    const std::uint64_t actual = size - header_size;
    if (actual < expected) {
        raise(errc::truncated_payload, "payload holds " + std::to_string(actual) +
                                           " bytes, expected " + std::to_string(expected));
    }
    if (actual > expected) {
        raise(errc::invariant_violation, std::to_string(actual - expected) +
                                             " trailing bytes after the payload");
    }

    EmbeddingBatch batch;
    batch.n = static_cast<int>(n);
    batch.q = static_cast<int>(q);
    batch.p = static_cast<int>(p);
    batch.branch_label.assign(bytes.data() + 22, label_len);
    batch.data.resize(static_cast<Eigen::Index>(n) * q, p);

    const unsigned char* payload = data + header_size;
    for (std::uint64_t i = 0; i < count; ++i) {
        const float v = std::bit_cast<float>(get_u32(payload + 4 * i));
        batch.data(static_cast<Eigen::Index>(i / p), static_cast<Eigen::Index>(i % p)) = v;
    }
    if (!batch.data.allFinite()) {
        raise(errc::invariant_violation, "payload contains non-finite values");
    }
    return batch;
}

void write_emb1(const EmbeddingBatch& batch, const std::filesystem::path& path) {
    validate_batch(batch);
    if (batch.branch_label.size() > 0xFFFF) {
        raise(errc::invariant_violation, "branch label longer than 65535 bytes");
    }

    std::string buf;
    buf.reserve(22 + batch.branch_label.size() +
                4ull * static_cast<std::uint64_t>(batch.data.size()));
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(batch.n));
    put_u32(buf, static_cast<std::uint32_t>(batch.q));
    put_u32(buf, static_cast<std::uint32_t>(batch.p));
    put_u16(buf, static_cast<std::uint16_t>(batch.branch_label.size()));
    buf.append(batch.branch_label);
    for (Eigen::Index row = 0; row < batch.data.rows(); ++row) {
        for (int d = 0; d < batch.p; ++d) {
            put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(batch.data(row, d))));
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) raise(errc::io_failure, "write failed on '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

long parse_index(const std::string& cell, const char* what, long limit, size_t line_no) {
    long value = -1;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || value < 0 || value >= limit) {
        raise(errc::bad_shape, std::string(what) + " '" + cell + "' on line " +
                                   std::to_string(line_no) + " is not in [0, " +
                                   std::to_string(limit) + ")");
    }
    return value;
}

} // namespace

EmbeddingBatch read_csv_batch(const std::filesystem::path& path, int n, int q) {
    if (n < 2 || q < 2) {
        raise(errc::invariant_violation, "need n >= 2 and q >= 2");
    }
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "' for reading");

    std::string line;
    auto next_line = [&](std::string& out_line) {
        if (!std::getline(in, out_line)) return false;
        if (!out_line.empty() && out_line.back() == '\r') out_line.pop_back();
        return true;
    };

    if (!next_line(line)) raise(errc::bad_shape, "missing header row");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "class_id" || header[1] != "sample_id") {
        raise(errc::bad_shape, "header must start with class_id,sample_id,e_0,...");
    }
    const int p = static_cast<int>(header.size()) - 2;
    for (int d = 0; d < p; ++d) {
        if (header[2 + d] != "e_" + std::to_string(d)) {
            raise(errc::bad_shape, "header column " + std::to_string(2 + d) + " must be e_" +
                                       std::to_string(d) + ", got '" + header[2 + d] + "'");
        }
    }

    EmbeddingBatch batch;
    batch.n = n;
    batch.q = q;
    batch.p = p;
    batch.data.resize(static_cast<Eigen::Index>(n) * q, p);

    std::vector<bool> seen(static_cast<size_t>(n) * q, false);
    size_t rows = 0;
    size_t line_no = 1;
    while (next_line(line)) {
        ++line_no;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            raise(errc::missing_cell, "line " + std::to_string(line_no) + " has " +
                                          std::to_string(cells.size()) + " cells, expected " +
                                          std::to_string(header.size()));
        }
        if (cells.size() > header.size()) {
            raise(errc::bad_shape, "line " + std::to_string(line_no) + " has " +
                                       std::to_string(cells.size()) + " cells, expected " +
                                       std::to_string(header.size()));
        }
        for (const auto& cell : cells) {
            if (cell.empty()) {
                raise(errc::missing_cell, "empty cell on line " + std::to_string(line_no));
            }
        }

        const long class_id = parse_index(cells[0], "class_id", n, line_no);
        const long sample_id = parse_index(cells[1], "sample_id", q, line_no);
        const size_t slot = static_cast<size_t>(class_id) * q + static_cast<size_t>(sample_id);
        if (seen[slot]) {
            raise(errc::duplicate_pair, "duplicate (class_id, sample_id) = (" + cells[0] + ", " +
                                            cells[1] + ") on line " + std::to_string(line_no));
        }
        seen[slot] = true;

        for (int d = 0; d < p; ++d) {
            const std::string& cell = cells[2 + d];
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                raise(errc::bad_shape, "cell '" + cell + "' on line " + std::to_string(line_no) +
                                           " is not a decimal real");
            }
            batch.data(static_cast<Eigen::Index>(slot), d) = value;
        }
        ++rows;
    }
    if (in.bad()) raise(errc::io_failure, "read failed on '" + path.string() + "'");

    if (rows != static_cast<size_t>(n) * q) {
        raise(errc::bad_shape, "found " + std::to_string(rows) + " data rows, expected n*q = " +
                                   std::to_string(static_cast<size_t>(n) * q));
    }
    validate_batch(batch);
    return batch;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

double require_finite_number(const ordered_json& j, const std::string& what, size_t line_no) {
    if (!j.is_number()) {
        raise(errc::parse_error,
              "line " + std::to_string(line_no) + ": " + what + " must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        raise(errc::parse_error, "line " + std::to_string(line_no) + ": " + what + " is not finite");
    }
    return v;
}

ModelRecord parse_record(ordered_json j, size_t line_no) {
    if (!j.is_object()) {
        raise(errc::parse_error, "line " + std::to_string(line_no) + ": record is not an object");
    }
    ModelRecord rec;
    if (!j.contains("model_id") || !j["model_id"].is_string() ||
        j["model_id"].get<std::string>().empty()) {
        raise(errc::parse_error,
              "line " + std::to_string(line_no) + ": missing or empty model_id");
    }
    rec.model_id = j["model_id"].get<std::string>();

    if (j.contains("hyperparams")) {
        if (!j["hyperparams"].is_object()) {
            raise(errc::parse_error,
                  "line " + std::to_string(line_no) + ": hyperparams must be an object");
        }
        for (const auto& [key, value] : j["hyperparams"].items()) {
            rec.hyperparams.emplace_back(key,
                                         value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    if (j.contains("scores")) {
        if (!j["scores"].is_object()) {
            raise(errc::parse_error,
                  "line " + std::to_string(line_no) + ": scores must be an object");
        }
        for (const auto& [key, value] : j["scores"].items()) {
            rec.scores[key] = require_finite_number(value, "score '" + key + "'", line_no);
        }
    }
    if (j.contains("oracle_accuracy") && !j["oracle_accuracy"].is_null()) {
        const double acc = require_finite_number(j["oracle_accuracy"], "oracle_accuracy", line_no);
        if (acc < 0.0 || acc > 100.0) {
            raise(errc::parse_error,
                  "line " + std::to_string(line_no) + ": oracle_accuracy outside [0, 100]");
        }
        rec.oracle_accuracy = acc;
    }
    if (j.contains("source_path") && !j["source_path"].is_null()) {
        if (!j["source_path"].is_string()) {
            raise(errc::parse_error,
                  "line " + std::to_string(line_no) + ": source_path must be a string");
        }
        rec.source_path = j["source_path"].get<std::string>();
    }
    rec.raw = std::move(j);
    return rec;
}

} // namespace

std::optional<double> ModelRecord::numeric_field(const std::string& name) const {
    if (!raw.is_object() || !raw.contains(name)) return std::nullopt;
    const auto& j = raw.at(name);
    if (!j.is_number()) return std::nullopt;
    const double v = j.get<double>();
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

ModelRecord* Registry::find(const std::string& model_id) {
    for (auto& rec : records) {
        if (rec.model_id == model_id) return &rec;
    }
    return nullptr;
}

const ModelRecord* Registry::find(const std::string& model_id) const {
    for (const auto& rec : records) {
        if (rec.model_id == model_id) return &rec;
    }
    return nullptr;
}

ModelRecord& Registry::upsert(const std::string& model_id) {
    if (ModelRecord* rec = find(model_id)) return *rec;
    ModelRecord rec;
    rec.model_id = model_id;
    rec.raw = ordered_json{{"model_id", model_id}};
    records.push_back(std::move(rec));
    return records.back();
}

Registry read_registry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "' for reading");

    Registry registry;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            raise(errc::parse_error, "line " + std::to_string(line_no) + ": blank line");
        }
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
        ModelRecord rec = parse_record(std::move(j), line_no);
        if (registry.find(rec.model_id)) {
            raise(errc::duplicate_model_id, "model_id '" + rec.model_id + "' repeats on line " +
                                                std::to_string(line_no));
        }
        registry.records.push_back(std::move(rec));
    }
    if (in.bad()) raise(errc::io_failure, "read failed on '" + path.string() + "'");
    return registry;
}

Registry read_registry_or_empty(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return Registry{};
    return read_registry(path);
}

void write_registry(const Registry& registry, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot open '" + path.string() + "' for writing");
    for (const auto& rec : registry.records) {
        out << rec.raw.dump() << '\n';
    }
    out.flush();
    if (!out) raise(errc::io_failure, "write failed on '" + path.string() + "'");
}

void set_score(ModelRecord& record, MetricKind kind, double value, bool overwrite) {
    if (!std::isfinite(value)) raise(errc::invariant_violation, "scores must be finite");
    const std::string key = metric_kind_name(kind);
    const auto it = record.scores.find(key);
    if (it != record.scores.end() && it->second != value && !overwrite) {
        raise(errc::score_conflict, "record '" + record.model_id + "' already has " + key + " = " +
                                        std::to_string(it->second) +
                                        "; pass overwrite to replace it");
    }
    record.scores[key] = value;
    if (!record.raw.is_object()) record.raw = ordered_json::object();
    if (!record.raw.contains("scores") || !record.raw["scores"].is_object()) {
        record.raw["scores"] = ordered_json::object();
    }
    record.raw["scores"][key] = value;
}

} // namespace lidar
