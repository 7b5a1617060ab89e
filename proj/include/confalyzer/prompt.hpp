#pragma once

#include "confalyzer/catalog.hpp"
#include "confalyzer/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace confalyzer {

/// System prompt (criterion-independent) plus a user template with
/// single-brace placeholders such as {criterion_description}.
struct PromptTemplatePair {
  std::string system_text;
  std::string user_template;

  bool operator==(const PromptTemplatePair&) const = default;
};

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
  CriterionId criterion_id;
  int sample_id = 0;
};

// Placeholders the renderer can fill.
inline constexpr std::string_view kPlaceholderNames[] = {
    "criterion_id", "criterion_name", "criterion_description", "configurator_name", "industry"};

PromptTemplatePair default_templates();

// {system_text, user_template} JSON document. Validated on load.
PromptTemplatePair load_templates(std::string_view document);
PromptTemplatePair load_templates_file(const std::filesystem::path& path);
std::string dump_templates(const PromptTemplatePair& templates);

// Placeholder names in order of appearance. Throws TemplateError on an
// unbalanced or empty brace pair.
std::vector<std::string> placeholders(std::string_view user_template);

// Throws TemplateError if the user template is missing {criterion_name} or
// {criterion_description}, or uses an unknown placeholder.
void validate_templates(const PromptTemplatePair& templates);

RenderedPrompt render(const PromptTemplatePair& templates, const Criterion& criterion,
                      const ConfiguratorSample& sample);

// ceil(characters / 4) over both prompt parts.
std::uint64_t estimate_prompt_tokens(const RenderedPrompt& prompt);
std::uint64_t estimate_text_tokens(std::string_view text);

}  // namespace confalyzer
