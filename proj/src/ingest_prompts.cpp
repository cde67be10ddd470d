#include <set>
#include <string>

#include "fallsynth/error.hpp"
#include "fallsynth/ingest.hpp"

namespace fallsynth {

// Defined in the generated bundled_prompts.cpp (data/prompts.txt).
extern const char* const kBundledPromptText;

std::string_view to_string(VariantTag tag) {
  switch (tag) {
    case VariantTag::Neutral: return "neutral";
    case VariantTag::Man: return "man";
    case VariantTag::Woman: return "woman";
    case VariantTag::Young: return "young";
    case VariantTag::Elderly: return "elderly";
    case VariantTag::LeftWrist: return "left_wrist";
    case VariantTag::RightWrist: return "right_wrist";
    case VariantTag::Waist: return "waist";
  }
  return "unknown";
}

VariantTag parse_variant_tag(std::string_view text) {
  for (VariantTag tag : kAllVariantTags) {
    if (to_string(tag) == text) return tag;
  }
  throw ConfigError("unknown prompt variant tag '" + std::string(text) + "'");
}

std::string_view variant_phrase(VariantTag tag) {
  switch (tag) {
    case VariantTag::Neutral: return "";
    case VariantTag::Man: return "a man";
    case VariantTag::Woman: return "a woman";
    case VariantTag::Young: return "a young person";
    case VariantTag::Elderly: return "an elderly person";
    case VariantTag::LeftWrist: return "the left wrist";
    case VariantTag::RightWrist: return "the right wrist";
    case VariantTag::Waist: return "the waist";
  }
  return "";
}

PromptCatalog::PromptCatalog(std::vector<std::string> base_prompts)
    : base_(std::move(base_prompts)) {
  std::set<std::string_view> seen;
  for (const auto& p : base_) {
    if (p.empty()) throw ConfigError("empty base prompt");
    if (!seen.insert(p).second) throw ConfigError("duplicate base prompt: " + p);
  }
}

PromptCatalog PromptCatalog::from_text(std::string_view text) {
  std::vector<std::string> prompts;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (!line.empty()) prompts.emplace_back(line);
  }
  return PromptCatalog(std::move(prompts));
}

PromptCatalog PromptCatalog::bundled() { return from_text(kBundledPromptText); }

std::string rewrite_prompt(std::string_view prompt, VariantTag tag) {
  constexpr std::string_view kSubject = "A person ";
  std::string out;
  switch (tag) {
    case VariantTag::Neutral:
      return std::string(prompt);
    case VariantTag::Man:
    case VariantTag::Woman:
    case VariantTag::Young:
    case VariantTag::Elderly: {
      const std::string_view phrase = variant_phrase(tag);
      if (prompt.substr(0, kSubject.size()) == kSubject) {
        out.reserve(prompt.size() + 16);
        out.push_back(static_cast<char>(phrase[0] - 'a' + 'A'));
        out.append(phrase.substr(1));
        out.push_back(' ');
        out.append(prompt.substr(kSubject.size()));
      } else {
        out = std::string(prompt) + " The subject is " + std::string(phrase) + ".";
      }
      return out;
    }
    case VariantTag::LeftWrist:
    case VariantTag::RightWrist:
    case VariantTag::Waist:
      return std::string(prompt) + " The sensor is worn on " + std::string(variant_phrase(tag)) +
             ".";
  }
  return std::string(prompt);
}

std::vector<std::string> generate_prompt_variants(const PromptCatalog& catalog,
                                                  std::span<const VariantTag> tags) {
  std::set<VariantTag> distinct(tags.begin(), tags.end());
  if (distinct.size() != tags.size()) throw ConfigError("duplicate variant tag in selection");

  std::vector<std::string> out;
  out.reserve(catalog.size() * tags.size());
  for (const auto& base : catalog.base_prompts()) {
    for (VariantTag tag : tags) out.push_back(rewrite_prompt(base, tag));
  }
  return out;
}

std::vector<std::string> generate_prompt_variants(const PromptCatalog& catalog,
                                                  std::span<const std::string> tag_names) {
  std::vector<VariantTag> tags;
  tags.reserve(tag_names.size());
  for (const auto& name : tag_names) tags.push_back(parse_variant_tag(name));
  return generate_prompt_variants(catalog, tags);
}

}  // namespace fallsynth
