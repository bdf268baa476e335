#include "sgf/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/io.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr RecordKind kKinds[] = {RecordKind::kObjectCaption, RecordKind::kObjectReferral, RecordKind::kSceneCaption};
constexpr RecordSource kSources[] = {RecordSource::kTemplate, RecordSource::kRephrased, RecordSource::kSummary};
constexpr RecordForm kForms[] = {RecordForm::kNone, RecordForm::kPairwise, RecordForm::kMulti, RecordForm::kStar};

template <typename E, std::size_t N>
std::optional<E> parse_enum(const E (&values)[N], std::string_view name) {
  for (E v : values) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::kObjectCaption: return "object_caption";
    case RecordKind::kObjectReferral: return "object_referral";
    case RecordKind::kSceneCaption: return "scene_caption";
  }
  return "?";
}

std::string_view to_string(RecordSource s) {
  switch (s) {
    case RecordSource::kTemplate: return "template";
    case RecordSource::kRephrased: return "rephrased";
    case RecordSource::kSummary: return "summary";
  }
  return "?";
}

std::string_view to_string(RecordForm f) {
  switch (f) {
    case RecordForm::kNone: return "none";
    case RecordForm::kPairwise: return "pairwise";
    case RecordForm::kMulti: return "multi";
    case RecordForm::kStar: return "star";
  }
  return "?";
}

void LanguageRecord::validate() const {
  if (scene_id.empty()) throw DataError("language record without scene_id");
  if (kind == RecordKind::kObjectReferral && (!target_id || !relation)) {
    throw DataError("referral record " + record_id + " in scene " + scene_id + " lacks target_id or relation");
  }
  if (kind == RecordKind::kObjectCaption && !target_id) {
    throw DataError("object caption record " + record_id + " in scene " + scene_id + " lacks target_id");
  }
}

std::string compute_record_id(const LanguageRecord& r) {
  std::string key = r.scene_id;
  const auto part = [&](std::string_view s) {
    key += '\x1f';
    key += s;
  };
  part(to_string(r.kind));
  part(to_string(r.form));
  part(to_string(r.source));
  part(r.target_id ? std::to_string(*r.target_id) : "-");
  std::string anchors;
  for (InstanceId a : r.anchor_ids) anchors += std::to_string(a) + ",";
  part(anchors);
  part(r.relation ? to_string(*r.relation) : "-");
  part(to_hex(r.seed));
  return to_hex(fnv1a64(key));
}

LanguageRecord finalize(LanguageRecord r) {
  r.record_id = compute_record_id(r);
  r.validate();
  return r;
}

std::string record_to_json(const LanguageRecord& r) {
  ordered_json j;
  j["record_id"] = r.record_id;
  j["scene_id"] = r.scene_id;
  j["kind"] = std::string(to_string(r.kind));
  j["form"] = r.form == RecordForm::kNone ? ordered_json(nullptr) : ordered_json(std::string(to_string(r.form)));
  j["target_id"] = r.target_id ? ordered_json(*r.target_id) : ordered_json(nullptr);
  j["anchor_ids"] = r.anchor_ids;
  j["relation"] = r.relation ? ordered_json(std::string(to_string(*r.relation))) : ordered_json(nullptr);
  j["text"] = r.text;
  j["source"] = std::string(to_string(r.source));
  j["flags"] = r.flags;
  j["seed"] = to_hex(r.seed);
  return j.dump();
}

LanguageRecord record_from_json(std::string_view line, const std::string& origin) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  LanguageRecord r;
  try {
    r.record_id = j.at("record_id").get<std::string>();
    r.scene_id = j.at("scene_id").get<std::string>();
    const auto kind = parse_enum(kKinds, j.at("kind").get<std::string>());
    const auto source = parse_enum(kSources, j.at("source").get<std::string>());
    if (!kind || !source) throw DataError(origin + ": unknown record kind or source");
    r.kind = *kind;
    r.source = *source;
    if (j.contains("form") && !j["form"].is_null()) {
      const auto form = parse_enum(kForms, j["form"].get<std::string>());
      if (!form) throw DataError(origin + ": unknown record form");
      r.form = *form;
    }
    if (!j.at("target_id").is_null()) r.target_id = j["target_id"].get<InstanceId>();
    r.anchor_ids = j.at("anchor_ids").get<std::vector<InstanceId>>();
    if (!j.at("relation").is_null()) {
      r.relation = relation_from_string(j["relation"].get<std::string>());
      if (!r.relation) throw DataError(origin + ": unknown relation '" + j["relation"].get<std::string>() + "'");
    }
    r.text = j.at("text").get<std::string>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
  } catch (const json::exception& e) {
    throw DataError(origin + ": malformed record: " + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(origin + ": malformed record: " + e.what());
  }
  try {
    r.validate();
  } catch (const DataError& e) {
    throw DataError(origin + ": " + e.what());
  }
  return r;
}

namespace {

struct Located {
  std::string id;
  std::string line;
  std::string where;
};

std::string sorted_jsonl(std::vector<Located>& rows) {
  std::sort(rows.begin(), rows.end(), [](const Located& a, const Located& b) {
    return std::tie(a.id, a.line) < std::tie(b.id, b.line);
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].id == rows[i - 1].id) {
      throw DataError("duplicate record_id " + rows[i].id + ": " + rows[i - 1].where + " and " + rows[i].where);
    }
  }
  std::string out;
  for (const auto& r : rows) {
    out += r.line;
    out += '\n';
  }
  return out;
}

}  // namespace

std::size_t write_records(std::vector<LanguageRecord> records, const std::filesystem::path& path) {
  std::vector<Located> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({r.record_id, record_to_json(r), "record (scene " + r.scene_id + ", text \"" + r.text + "\")"});
  }
  io::write_file_atomic(path, sorted_jsonl(rows));
  return rows.size();
}

std::vector<LanguageRecord> read_records(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<LanguageRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(record_from_json(line, path.string() + ":" + std::to_string(n)));
  }
  return out;
}

std::size_t merge_shards(const std::vector<std::filesystem::path>& shards, const std::filesystem::path& out) {
  std::vector<Located> rows;
  for (const auto& shard : shards) {
    for (const auto& r : read_records(shard)) {
      rows.push_back({r.record_id, record_to_json(r), shard.string()});
    }
  }
  io::write_file_atomic(out, sorted_jsonl(rows));
  return rows.size();
}

std::size_t token_count(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

CorpusStats& CorpusStats::operator+=(const CorpusStats& other) {
  total += other.total;
  for (const auto& [k, by_source] : other.counts) {
    for (const auto& [s, n] : by_source) counts[k][s] += n;
  }
  scenes.insert(other.scenes.begin(), other.scenes.end());
  for (const auto& [r, n] : other.relations) relations[r] += n;
  for (const auto& [s, hist] : other.lengths) {
    for (const auto& [len, n] : hist) lengths[s][len] += n;
  }
  return *this;
}

std::map<std::string, std::size_t> CorpusStats::taxonomy() const {
  std::map<std::string, std::size_t> out;
  for (std::string_view bin : taxonomy_bins()) out[std::string(bin)] = 0;
  for (const auto& [r, n] : relations) out[std::string(taxonomy_bin(r))] += n;
  return out;
}

double CorpusStats::mean_length(RecordSource s) const {
  const auto it = lengths.find(s);
  if (it == lengths.end()) return 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [len, n] : it->second) {
    sum += static_cast<double>(len) * static_cast<double>(n);
    count += n;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double CorpusStats::median_length(RecordSource s) const {
  const auto it = lengths.find(s);
  if (it == lengths.end()) return 0.0;
  std::size_t count = 0;
  for (const auto& [len, n] : it->second) count += n;
  if (count == 0) return 0.0;
  // Values at sorted positions (count-1)/2 and count/2.
  const auto value_at = [&](std::size_t pos) {
    std::size_t seen = 0;
    for (const auto& [len, n] : it->second) {
      seen += n;
      if (pos < seen) return static_cast<double>(len);
    }
    return 0.0;
  };
  return (value_at((count - 1) / 2) + value_at(count / 2)) / 2.0;
}

CorpusStats compute_stats(const std::vector<LanguageRecord>& records) {
  CorpusStats s;
  for (const auto& r : records) {
    ++s.total;
    ++s.counts[r.kind][r.source];
    s.scenes.insert(r.scene_id);
    if (r.relation) ++s.relations[*r.relation];
    ++s.lengths[r.source][token_count(r.text)];
  }
  return s;
}

std::string stats_to_json(const CorpusStats& s) {
  ordered_json doc;
  doc["total"] = s.total;
  doc["scenes"] = s.scenes.size();
  ordered_json counts = ordered_json::object();
  for (RecordKind k : kKinds) {
    ordered_json row = ordered_json::object();
    for (RecordSource src : kSources) {
      std::size_t n = 0;
      if (const auto it = s.counts.find(k); it != s.counts.end()) {
        if (const auto jt = it->second.find(src); jt != it->second.end()) n = jt->second;
      }
      row[std::string(to_string(src))] = n;
    }
    counts[std::string(to_string(k))] = std::move(row);
  }
  doc["counts"] = std::move(counts);
  ordered_json rel = ordered_json::object();
  for (RelationType r : all_relation_types()) {
    const auto it = s.relations.find(r);
    rel[std::string(to_string(r))] = it == s.relations.end() ? 0 : it->second;
  }
  doc["relation_histogram"] = std::move(rel);
  ordered_json tax = ordered_json::object();
  const auto bins = s.taxonomy();
  for (std::string_view bin : taxonomy_bins()) tax[std::string(bin)] = bins.at(std::string(bin));
  doc["taxonomy_histogram"] = std::move(tax);
  ordered_json lengths = ordered_json::object();
  for (RecordSource src : kSources) {
    ordered_json entry;
    ordered_json hist = ordered_json::object();
    std::size_t count = 0;
    if (const auto it = s.lengths.find(src); it != s.lengths.end()) {
      for (const auto& [len, n] : it->second) {
        hist[std::to_string(len)] = n;
        count += n;
      }
    }
    entry["count"] = count;
    entry["mean"] = s.mean_length(src);
    entry["median"] = s.median_length(src);
    entry["histogram"] = std::move(hist);
    lengths[std::string(to_string(src))] = std::move(entry);
  }
  doc["length_by_source"] = std::move(lengths);
  return doc.dump(1) + "\n";
}

std::string stats_to_table(const CorpusStats& s) {
  std::ostringstream os;
  os << "records " << s.total << "\nscenes  " << s.scenes.size() << "\n\n";
  os << std::left << std::setw(18) << "kind";
  for (RecordSource src : kSources) os << std::right << std::setw(11) << to_string(src);
  os << "\n";
  for (RecordKind k : kKinds) {
    os << std::left << std::setw(18) << to_string(k);
    for (RecordSource src : kSources) {
      std::size_t n = 0;
      if (const auto it = s.counts.find(k); it != s.counts.end()) {
        if (const auto jt = it->second.find(src); jt != it->second.end()) n = jt->second;
      }
      os << std::right << std::setw(11) << n;
    }
    os << "\n";
  }
  os << "\n" << std::left << std::setw(18) << "relation" << std::right << std::setw(11) << "records" << "\n";
  const auto bins = s.taxonomy();
  for (std::string_view bin : taxonomy_bins()) {
    os << std::left << std::setw(18) << bin << std::right << std::setw(11) << bins.at(std::string(bin)) << "\n";
  }
  os << "\n" << std::left << std::setw(18) << "length (tokens)" << std::right << std::setw(11) << "count"
     << std::setw(11) << "mean" << std::setw(11) << "median" << "\n";
  for (RecordSource src : kSources) {
    std::size_t count = 0;
    if (const auto it = s.lengths.find(src); it != s.lengths.end()) {
      for (const auto& [len, n] : it->second) count += n;
    }
    os << std::left << std::setw(18) << to_string(src) << std::right << std::setw(11) << count << std::setw(11)
       << std::fixed << std::setprecision(2) << s.mean_length(src) << std::setw(11) << s.median_length(src) << "\n";
  }
  return os.str();
}

}  // namespace sgf
