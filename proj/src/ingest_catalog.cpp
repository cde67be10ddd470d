#include <set>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"
#include "json.hpp"

namespace fallsynth {
namespace fs = std::filesystem;
using nlohmann::json;

DatasetCatalog::DatasetCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {}

std::set<std::string> DatasetCatalog::subjects() const {
  std::set<std::string> out;
  for (const auto& e : entries_) out.insert(e.subject_id);
  return out;
}

std::size_t DatasetCatalog::fall_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.activity == Label::Fall;
  return n;
}

std::size_t DatasetCatalog::adl_count() const { return entries_.size() - fall_count(); }

std::map<std::pair<Label, std::string>, std::size_t> DatasetCatalog::activity_histogram() const {
  std::map<std::pair<Label, std::string>, std::size_t> out;
  for (const auto& e : entries_) ++out[{e.activity, e.activity_type}];
  return out;
}

namespace {

std::string require_string(const json& obj, const char* key, std::size_t index) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError("manifest entry " + std::to_string(index) + ": missing string field '" + key +
                    "'");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetCatalog catalog_dataset(std::string_view manifest_json, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw FormatError("manifest must be a JSON array");

  std::vector<CatalogEntry> entries;
  std::set<fs::path> seen;
  std::size_t index = 0;
  for (const json& item : doc) {
    if (!item.is_object()) {
      throw DataError("manifest entry " + std::to_string(index) + " is not an object");
    }
    CatalogEntry e;
    e.subject_id = require_string(item, "subject", index);
    if (e.subject_id.empty()) {
      throw DataError("manifest entry " + std::to_string(index) + ": empty subject");
    }
    e.activity = parse_label(require_string(item, "activity", index));

    fs::path path = require_string(item, "path", index);
    if (path.is_relative()) path = base_dir / path;
    e.path = path.lexically_normal();

    auto rate = item.find("rate_hz");
    if (rate == item.end() || !rate->is_number()) {
      throw DataError("manifest entry " + std::to_string(index) + ": missing number 'rate_hz'");
    }
    e.sampling_rate = rate->get<double>();
    if (!(e.sampling_rate > 0.0)) {
      throw DataError("manifest entry " + std::to_string(index) + ": rate_hz must be > 0");
    }

    try {
      e.placement = parse_placement(require_string(item, "placement", index));
    } catch (const ConfigError& err) {
      throw DataError("manifest entry " + std::to_string(index) + ": " + err.what());
    }
    e.provenance = item.contains("provenance")
                       ? parse_provenance(require_string(item, "provenance", index))
                       : Provenance::Real;
    if (item.contains("type")) e.activity_type = require_string(item, "type", index);
    if (item.contains("source")) e.source = require_string(item, "source", index);

    if (!fs::exists(e.path)) throw DataError("missing file: " + e.path.string());
    const fs::path key = fs::weakly_canonical(e.path);
    if (!seen.insert(key).second) throw DataError("duplicate file entry: " + e.path.string());

    entries.push_back(std::move(e));
    ++index;
  }
  return DatasetCatalog(std::move(entries));
}

DatasetCatalog load_catalog(const fs::path& manifest_path) {
  return catalog_dataset(read_text_file(manifest_path), manifest_path.parent_path());
}

std::string write_manifest(const DatasetCatalog& catalog, const fs::path& base_dir) {
  json doc = json::array();
  for (const auto& e : catalog.entries()) {
    json item = {
        {"subject", e.subject_id},
        {"activity", std::string(to_string(e.activity))},
        {"path", e.path.lexically_relative(base_dir).generic_string()},
        {"rate_hz", e.sampling_rate},
        {"placement", std::string(to_string(e.placement))},
        {"provenance", std::string(to_string(e.provenance))},
    };
    if (!e.activity_type.empty()) item["type"] = e.activity_type;
    if (!e.source.empty()) item["source"] = e.source;
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

AccelSeries load_series(const CatalogEntry& entry) {
  AccelSeries s = load_accel_csv(entry.path, entry.sampling_rate);
  s.label = entry.activity;
  s.provenance = entry.provenance;
  s.subject_id = entry.subject_id;
  s.source = entry.source;
  return s;
}

}  // namespace fallsynth
