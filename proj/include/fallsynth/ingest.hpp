#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallsynth/kinematics.hpp"
#include "fallsynth/types.hpp"

namespace fallsynth {

// ---------------------------------------------------------------------------
// Accelerometer CSV: UTF-8, header "x;y;z", ';' delimiter, LF line endings.
// ---------------------------------------------------------------------------

// Parses the body into samples; metadata other than the rate is left default.
// Errors: FormatError (header), ParseError (cell, with line), EmptyInputError.
AccelSeries read_accel_csv(std::string_view text, double sampling_rate = kDefaultFrameRate);

// Header plus one "%.6f;%.6f;%.6f" line per sample.
std::string write_accel_csv(const AccelSeries& series);

AccelSeries load_accel_csv(const std::filesystem::path& path,
                           double sampling_rate = kDefaultFrameRate);
void save_accel_csv(const std::filesystem::path& path, const AccelSeries& series);

// ---------------------------------------------------------------------------
// Motion arrays: NPY v1.0, little-endian f4/f8, C-order, shape (F,22,3) or (F,66).
// ---------------------------------------------------------------------------

JointTrajectory read_motion_array(std::span<const std::byte> bytes,
                                  double frame_rate = kDefaultFrameRate);
JointTrajectory load_motion_array(const std::filesystem::path& path,
                                  double frame_rate = kDefaultFrameRate);

// Writes a (F,22,3) float64 NPY v1.0 array.
std::vector<std::byte> write_motion_array(const JointTrajectory& trajectory);

// ---------------------------------------------------------------------------
// Prompt catalogs
// ---------------------------------------------------------------------------

enum class VariantTag { Neutral, Man, Woman, Young, Elderly, LeftWrist, RightWrist, Waist };

inline constexpr std::array<VariantTag, 8> kAllVariantTags = {
    VariantTag::Neutral, VariantTag::Man,       VariantTag::Woman,      VariantTag::Young,
    VariantTag::Elderly, VariantTag::LeftWrist, VariantTag::RightWrist, VariantTag::Waist};

// CLI default: 7 tags. Waist is available explicitly.
inline constexpr std::array<VariantTag, 7> kDefaultVariantTags = {
    VariantTag::Neutral, VariantTag::Man,       VariantTag::Woman,     VariantTag::Young,
    VariantTag::Elderly, VariantTag::LeftWrist, VariantTag::RightWrist};

std::string_view to_string(VariantTag tag);
// Throws ConfigError on an unknown tag name.
VariantTag parse_variant_tag(std::string_view text);

// The phrase a tag injects into a prompt ("a man", "the left wrist", ...).
// Empty for Neutral.
std::string_view variant_phrase(VariantTag tag);

class PromptCatalog {
 public:
  // Throws ConfigError on duplicate or empty prompts.
  explicit PromptCatalog(std::vector<std::string> base_prompts);

  // One prompt per line; blank lines are ignored.
  static PromptCatalog from_text(std::string_view text);
  // The 50 fall-scenario prompts shipped with the toolkit.
  static PromptCatalog bundled();

  const std::vector<std::string>& base_prompts() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }

 private:
  std::vector<std::string> base_;
};

// Rewrites one prompt for one tag. Neutral returns the prompt verbatim.
// Demographic tags replace a leading "A person" with the tag's noun phrase,
// or append "The subject is <phrase>." when the prompt opens differently.
// Placement tags append "The sensor is worn on <phrase>."
std::string rewrite_prompt(std::string_view prompt, VariantTag tag);

// Base-major order: for each base prompt, one rewrite per selected tag.
std::vector<std::string> generate_prompt_variants(const PromptCatalog& catalog,
                                                  std::span<const VariantTag> tags);
std::vector<std::string> generate_prompt_variants(const PromptCatalog& catalog,
                                                  std::span<const std::string> tag_names);

// ---------------------------------------------------------------------------
// Dataset manifests
// ---------------------------------------------------------------------------

struct CatalogEntry {
  std::string subject_id;
  Label activity = Label::Adl;
  std::filesystem::path path;  // resolved against the manifest directory
  double sampling_rate = 0.0;
  SensorPlacement placement = SensorPlacement::WaistPelvis;
  Provenance provenance = Provenance::Real;
  // Optional manifest fields: "type" (activity subtype) and "source".
  std::string activity_type;
  std::string source;
};

class DatasetCatalog {
 public:
  DatasetCatalog() = default;
  explicit DatasetCatalog(std::vector<CatalogEntry> entries);

  const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::set<std::string> subjects() const;
  std::size_t subject_count() const { return subjects().size(); }
  std::size_t fall_count() const;
  std::size_t adl_count() const;
  // (activity, type) -> number of entries.
  std::map<std::pair<Label, std::string>, std::size_t> activity_histogram() const;

 private:
  std::vector<CatalogEntry> entries_;
};

// Parses a JSON manifest: an array of {"subject", "activity", "path", "rate_hz",
// "placement", "provenance"} objects. Relative paths resolve against base_dir.
// Errors: duplicate file entries, missing files, rate <= 0 (DataError).
DatasetCatalog catalog_dataset(std::string_view manifest_json,
                               const std::filesystem::path& base_dir);
DatasetCatalog load_catalog(const std::filesystem::path& manifest_path);

// Serializes a catalog back to manifest JSON with paths relative to base_dir.
std::string write_manifest(const DatasetCatalog& catalog, const std::filesystem::path& base_dir);

// Reads the CSV behind an entry and fills in the entry's metadata.
AccelSeries load_series(const CatalogEntry& entry);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace fallsynth
