#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lidar/metrics.hpp"

namespace lidar {

// ---------------------------------------------------------------------------
// EMB1 binary batches
//
// magic "EMB1" | version u32 = 1 | n u32 | q u32 | p u32 |
// label_len u16 | label UTF-8 | payload n*q*p little-endian f32,
// class-major then sample then dimension.
// In-memory data is double precision; the payload is single precision.
// ---------------------------------------------------------------------------

EmbeddingBatch read_emb1(const std::filesystem::path& path);
void write_emb1(const EmbeddingBatch& batch, const std::filesystem::path& path);

/// CSV with header `class_id,sample_id,e_0,...,e_{p-1}`; exactly n*q rows in
/// any order, each (class_id, sample_id) pair appearing once.
EmbeddingBatch read_csv_batch(const std::filesystem::path& path, int n, int q);

// ---------------------------------------------------------------------------
// JSON-lines model registry
// ---------------------------------------------------------------------------

/// One trained checkpoint. `raw` holds the full JSON object so unknown fields
/// survive a rewrite.
struct ModelRecord {
    std::string model_id;
    std::vector<std::pair<std::string, std::string>> hyperparams; // insertion order
    std::map<std::string, double> scores;                         // metric kind -> value
    std::optional<double> oracle_accuracy;                        // [0, 100]
    std::optional<std::string> source_path;
    nlohmann::ordered_json raw;

    /// Numeric top-level field lookup (used for --oracle-field).
    std::optional<double> numeric_field(const std::string& name) const;
};

struct Registry {
    std::vector<ModelRecord> records;

    ModelRecord* find(const std::string& model_id);
    const ModelRecord* find(const std::string& model_id) const;
    /// Existing record, or a fresh one appended with just the id.
    ModelRecord& upsert(const std::string& model_id);
};

Registry read_registry(const std::filesystem::path& path);
/// Missing file reads as an empty registry (used when scoring creates one).
Registry read_registry_or_empty(const std::filesystem::path& path);
void write_registry(const Registry& registry, const std::filesystem::path& path);

/// Non-destructive score merge: a new kind is added; re-setting an identical
/// value is a no-op; changing an existing value requires overwrite=true and
/// otherwise raises ScoreConflict.
void set_score(ModelRecord& record, MetricKind kind, double value, bool overwrite);

} // namespace lidar
