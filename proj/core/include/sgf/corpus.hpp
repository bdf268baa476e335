#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgf/scene_model.hpp"

namespace sgf {

enum class RecordKind { kObjectCaption, kObjectReferral, kSceneCaption };
enum class RecordSource { kTemplate, kRephrased, kSummary };
/// Sentence shape of a referral; kNone for captions.
enum class RecordForm { kNone, kPairwise, kMulti, kStar };

std::string_view to_string(RecordKind k);
std::string_view to_string(RecordSource s);
std::string_view to_string(RecordForm f);

struct LanguageRecord {
  std::string record_id;
  std::string scene_id;
  RecordKind kind = RecordKind::kObjectReferral;
  RecordForm form = RecordForm::kNone;
  std::optional<InstanceId> target_id;
  std::vector<InstanceId> anchor_ids;
  std::optional<RelationType> relation;  // star records: the relation of the leading clause
  std::string text;
  RecordSource source = RecordSource::kTemplate;
  std::vector<std::string> flags;
  std::uint64_t seed = 0;

  /// Throws DataError when a referral lacks target_id or relation.
  void validate() const;
};

/// FNV-1a over scene, kind, form, source, ids, relation and seed.
std::string compute_record_id(const LanguageRecord& r);

/// Sets record_id from the other fields and validates.
LanguageRecord finalize(LanguageRecord r);

std::string record_to_json(const LanguageRecord& r);
LanguageRecord record_from_json(std::string_view line, const std::string& origin = "<memory>");

/// Writes JSONL sorted by record_id through a temp file and rename. Throws
/// DataError on a duplicate record_id, naming both records.
std::size_t write_records(std::vector<LanguageRecord> records, const std::filesystem::path& path);

/// Throws DataError with path and line number on malformed input.
std::vector<LanguageRecord> read_records(const std::filesystem::path& path);

/// Union of the shards, sorted by record_id. The output bytes do not depend
/// on shard order. Throws DataError when two shards share a record_id.
std::size_t merge_shards(const std::vector<std::filesystem::path>& shards, const std::filesystem::path& out);

/// Length histograms are kept raw so statistics of disjoint shards add.
struct CorpusStats {
  std::size_t total = 0;
  std::map<RecordKind, std::map<RecordSource, std::size_t>> counts;
  std::set<std::string> scenes;
  std::map<RelationType, std::size_t> relations;
  std::map<RecordSource, std::map<std::size_t, std::size_t>> lengths;  // tokens -> records

  CorpusStats& operator+=(const CorpusStats& other);

  /// 21-bin view of `relations`.
  std::map<std::string, std::size_t> taxonomy() const;
  double mean_length(RecordSource s) const;
  double median_length(RecordSource s) const;
};

/// Whitespace-separated token count.
std::size_t token_count(std::string_view text);

CorpusStats compute_stats(const std::vector<LanguageRecord>& records);

/// Every kind, source, relation and taxonomy bin appears, zeros included.
std::string stats_to_json(const CorpusStats& stats);
std::string stats_to_table(const CorpusStats& stats);

}  // namespace sgf
