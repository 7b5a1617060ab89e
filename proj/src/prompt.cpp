#include "confalyzer/prompt.hpp"

#include "confalyzer/error.hpp"
#include "confalyzer/util.hpp"

#include <json.hpp>

#include <algorithm>

namespace confalyzer {

using nlohmann::json;

PromptTemplatePair default_templates() {
  PromptTemplatePair t;
  t.system_text =
      "You are an experienced usability expert evaluating the user interface of a product "
      "configurator. A configurator lets users customize a product or service by selecting "
      "options that must satisfy compatibility constraints.\n"
      "\n"
      "You receive a screen recording of a user interacting with the configurator and exactly "
      "one usability criterion. Evaluate only that criterion, based only on what the recording "
      "shows.\n"
      "\n"
      "Rate the severity on a 3-point scale:\n"
      "- \"no issue\": the configurator fulfills the criterion.\n"
      "- \"minor issue\": the criterion is only partially fulfilled.\n"
      "- \"major issue\": the criterion is not fulfilled at all.\n"
      "\n"
      "If the severity is \"minor issue\" or \"major issue\", describe the issue concretely, "
      "referring to the specific interface elements and interactions visible in the recording, "
      "and explain how it can be improved. A feature that exists but does not sufficiently "
      "support users can still be an issue.\n"
      "\n"
      "Output format: return a single JSON object and nothing else:\n"
      "{\"severity\": \"no issue\" | \"minor issue\" | \"major issue\", "
      "\"issue\": \"<description of the issue>\", "
      "\"improvement\": \"<how the issue can be improved>\"}\n"
      "Omit \"issue\" and \"improvement\" when the severity is \"no issue\".\n";
  t.user_template =
      "Analyze the screen recording of the configurator \"{configurator_name}\" "
      "(industry: {industry}).\n"
      "\n"
      "Usability criterion {criterion_id}: {criterion_name}\n"
      "{criterion_description}\n";
  return t;
}

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find_first_of("{}", pos);
    if (open == std::string_view::npos) break;
    if (tmpl[open] == '}') {
      throw TemplateError("unbalanced '}' at offset " + std::to_string(open));
    }
    const auto close = tmpl.find_first_of("{}", open + 1);
    if (close == std::string_view::npos || tmpl[close] == '{') {
      throw TemplateError("unbalanced '{' at offset " + std::to_string(open));
    }
    const auto name = tmpl.substr(open + 1, close - open - 1);
    if (name.empty()) throw TemplateError("empty placeholder at offset " + std::to_string(open));
    names.emplace_back(name);
    pos = close + 1;
  }
  return names;
}

void validate_templates(const PromptTemplatePair& templates) {
  if (trim(templates.system_text).empty()) throw TemplateError("empty system text");
  const auto names = placeholders(templates.user_template);
  for (const auto& n : names) {
    if (std::find(std::begin(kPlaceholderNames), std::end(kPlaceholderNames), n) ==
        std::end(kPlaceholderNames)) {
      throw TemplateError("unknown placeholder \"" + n + "\"");
    }
  }
  for (const char* required : {"criterion_name", "criterion_description"}) {
    if (std::find(names.begin(), names.end(), required) == names.end()) {
      throw TemplateError(std::string("user template lacks placeholder \"") + required + "\"");
    }
  }
}

PromptTemplatePair load_templates(std::string_view document) {
  PromptTemplatePair t;
  try {
    const auto doc = json::parse(document);
    t.system_text = doc.at("system_text").get<std::string>();
    t.user_template = doc.at("user_template").get<std::string>();
  } catch (const json::exception& e) {
    throw TemplateError(std::string("template document: ") + e.what());
  }
  validate_templates(t);
  return t;
}

PromptTemplatePair load_templates_file(const std::filesystem::path& path) {
  return load_templates(read_file(path));
}

std::string dump_templates(const PromptTemplatePair& templates) {
  return json{{"system_text", templates.system_text}, {"user_template", templates.user_template}}
             .dump(2) +
         "\n";
}

RenderedPrompt render(const PromptTemplatePair& templates, const Criterion& criterion,
                      const ConfiguratorSample& sample) {
  const auto value_of = [&](const std::string& name) -> std::string {
    if (name == "criterion_id") return criterion.id.str();
    if (name == "criterion_name") return criterion.name;
    if (name == "criterion_description") return criterion.description;
    if (name == "configurator_name") return sample.name;
    if (name == "industry") return sample.industry;
    throw TemplateError("unknown placeholder \"" + name + "\"");
  };

  const std::string_view tmpl = templates.user_template;
  // placeholders() rejects unbalanced braces before substitution starts.
  placeholders(tmpl);

  std::string out;
  out.reserve(tmpl.size() + criterion.description.size() + 64);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    const auto value = value_of(name);
    if (trim(value).empty()) throw TemplateError("missing value for placeholder \"" + name + "\"");
    out += value;
    pos = close + 1;
  }
  return RenderedPrompt{templates.system_text, std::move(out), criterion.id, sample.id};
}

std::uint64_t estimate_text_tokens(std::string_view text) { return ceil_div(text.size(), 4); }

std::uint64_t estimate_prompt_tokens(const RenderedPrompt& prompt) {
  return ceil_div(prompt.system_text.size() + prompt.user_text.size(), 4);
}

}  // namespace confalyzer
