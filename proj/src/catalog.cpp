#include "confalyzer/catalog.hpp"

#include "confalyzer/error.hpp"
#include "confalyzer/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace confalyzer {

using nlohmann::json;

namespace {

struct CategoryInfo {
  Category category;
  char letter;
  std::string_view name;
  int size;
};

constexpr CategoryInfo kCategories[] = {
    {Category::ConfigurationProcess, 'C', "ConfigurationProcess", 6},
    {Category::Explanation, 'E', "Explanation", 4},
    {Category::Navigation, 'N', "Navigation", 6},
    {Category::Visualization, 'V', "Visualization", 2},
};

const CategoryInfo& info(Category c) {
  return kCategories[static_cast<int>(c)];
}

}  // namespace

std::string_view to_string(Category c) { return info(c).name; }

std::optional<Category> category_from_string(std::string_view s) {
  for (const auto& ci : kCategories) {
    if (ci.name == s) return ci.category;
  }
  return std::nullopt;
}

char category_letter(Category c) { return info(c).letter; }

std::optional<Category> category_from_letter(char letter) {
  for (const auto& ci : kCategories) {
    if (ci.letter == letter) return ci.category;
  }
  return std::nullopt;
}

int category_size(Category c) { return info(c).size; }

std::optional<CriterionId> CriterionId::try_parse(std::string_view raw) {
  std::string text = trim(raw);
  if (text.size() < 2) return std::nullopt;
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  const auto category = category_from_letter(text[0]);
  if (!category) return std::nullopt;
  int number = 0;
  for (char ch : std::string_view(text).substr(1)) {
    if (ch < '0' || ch > '9') return std::nullopt;
    number = number * 10 + (ch - '0');
    if (number > 99) return std::nullopt;
  }
  if (text[1] == '0' || number < 1 || number > category_size(*category)) return std::nullopt;
  return CriterionId(std::move(text), *category, number);
}

CriterionId CriterionId::parse(std::string_view text) {
  if (auto id = try_parse(text)) return *id;
  throw CatalogError("malformed criterion id \"" + std::string(text) +
                     "\" (expected C1-C6, E1-E4, N1-N6 or V1-V2)");
}

std::strong_ordering CriterionId::operator<=>(const CriterionId& other) const noexcept {
  if (auto c = static_cast<int>(category_) <=> static_cast<int>(other.category_); c != 0) return c;
  return number_ <=> other.number_;
}

Catalog::Catalog(std::vector<Criterion> criteria) : criteria_(std::move(criteria)) {
  std::set<std::string> seen;
  for (const auto& c : criteria_) {
    if (!seen.insert(c.id.str()).second) {
      throw CatalogError("duplicate criterion id \"" + c.id.str() + "\"");
    }
    if (c.category != c.id.category()) {
      throw CatalogError("criterion " + c.id.str() + ": category " +
                         std::string(to_string(c.category)) + " does not match id letter");
    }
    if (trim(c.name).empty()) {
      throw CatalogError("criterion " + c.id.str() + ": empty name");
    }
    const auto desc = trim(c.description);
    if (desc.empty()) {
      throw CatalogError("criterion " + c.id.str() + ": empty description");
    }
    if (desc.back() != '?') {
      throw CatalogError("criterion " + c.id.str() + ": description must be a question");
    }
  }
}

const Criterion* Catalog::find(std::string_view id) const noexcept {
  for (const auto& c : criteria_) {
    if (c.id.str() == id) return &c;
  }
  return nullptr;
}

const Criterion& Catalog::at(const CriterionId& id) const {
  if (const auto* c = find(id.str())) return *c;
  throw CatalogError("unknown criterion id \"" + id.str() + "\"");
}

std::vector<CriterionId> Catalog::ids() const {
  std::vector<CriterionId> out;
  out.reserve(criteria_.size());
  for (const auto& c : criteria_) out.push_back(c.id);
  return out;
}

std::string Catalog::version() const {
  return "sha256:" + sha256_hex(dump_catalog(*this)).substr(0, 12);
}

Catalog builtin_catalog() {
  using C = Category;
  const auto make = [](std::string_view id, C cat, std::string name, std::string description,
                       std::vector<std::string> refs) {
    return Criterion{CriterionId::parse(id), cat, std::move(name), std::move(description),
                     std::move(refs)};
  };
  std::vector<Criterion> v;
  v.reserve(18);

  // Configuration process.
  v.push_back(make("C1", C::ConfigurationProcess, "Customized options",
                   "Does the configurator adapt the available options to meet different user "
                   "profiles (e.g., expert vs. non-expert), such as presenting a needs-based view "
                   "or a parameter view, with a clear way to select the profile?",
                   {"leclercq2022essential", "leitner2014userinterfaces", "trentin2013sales"}));
  v.push_back(make("C2", C::ConfigurationProcess, "Organized configuration space",
                   "Does the configurator help users with large option spaces by utilizing "
                   "explicit mechanisms (e.g., grouping, search/filtering, multi-step "
                   "configuration) to keep the number of simultaneously visible choices "
                   "manageable?",
                   {"leclercq2022essential", "rabiser2012qualitative"}));
  v.push_back(make("C3", C::ConfigurationProcess, "Availability of options",
                   "Can users revisit and change previously set options without losing their "
                   "current configuration state?",
                   {"abbasi2013anatomy", "leclercq2022essential", "rabiser2012qualitative"}));
  v.push_back(make("C4", C::ConfigurationProcess, "Auto-completion",
                   "Does the configurator offer user-triggered auto-completion that fills in the "
                   "remaining required options with defaults?",
                   {"abbasi2013anatomy"}));
  v.push_back(make("C5", C::ConfigurationProcess, "Variant comparison",
                   "Can users keep multiple variants and compare them (e.g., ranking by "
                   "properties, side-by-side, or highlighting differences) to review trade-offs?",
                   {"leitner2014userinterfaces", "trentin2013sales"}));
  v.push_back(make("C6", C::ConfigurationProcess, "Error prevention",
                   "Does the configurator prevent users from ending up with an invalid "
                   "configuration (e.g., by disabling incompatible options, auto-resolving "
                   "conflicts, or requiring conflict resolution before proceeding)?",
                   {"abbasi2013anatomy", "leclercq2018studying", "rabiser2012qualitative"}));

  // Explanation.
  v.push_back(make("E1", C::Explanation, "Providing domain knowledge",
                   "Does the configurator provide in-context explanations of options (e.g., "
                   "tooltips or examples) that clarify meaning and help users make informed "
                   "choices?",
                   {"abbasi2013anatomy", "leitner2014userinterfaces", "rogoll2004product",
                    "trentin2013sales"}));
  v.push_back(make("E2", C::Explanation, "Transparency of dependencies",
                   "Does the configurator explain dependencies of options at decision time (e.g., "
                   "‘choosing X requires Y’, ‘this removes Z’, impact on "
                   "price/delivery) to highlight consequences of choices?",
                   {"leclercq2018studying", "leitner2014userinterfaces", "trentin2013sales"}));
  v.push_back(make("E3", C::Explanation, "Transparency of errors",
                   "Does the configurator explain why a configuration is inconsistent (e.g., "
                   "highlighting which selected options are in conflict) using actionable, "
                   "non-technical language?",
                   {"abbasi2013anatomy", "leclercq2022essential", "leclercq2018studying",
                    "leitner2014userinterfaces", "rabiser2012qualitative"}));
  v.push_back(make("E4", C::Explanation, "Repair suggestions",
                   "Does the configurator suggest actionable repair options (e.g., ‘change X "
                   "to Y or Z’ or ‘remove X’) to assist users in resolving errors "
                   "with inconsistent constraints?",
                   {"abbasi2013anatomy", "leitner2014userinterfaces", "rabiser2012qualitative"}));

  // Navigation.
  v.push_back(make("N1", C::Navigation, "Focused navigation",
                   "Does the configurator provide a clear, task-aligned sequence of steps that "
                   "helps users reach a valid result efficiently (e.g., using a relevant order of "
                   "decisions or avoiding unnecessary steps)?",
                   {"abbasi2013anatomy", "leclercq2018studying", "rabiser2012qualitative",
                    "rogoll2004product"}));
  v.push_back(make("N2", C::Navigation, "Manual step transition",
                   "Does the configurator support moving forward/backward using consistently "
                   "placed, clearly labeled controls?",
                   {"abbasi2013anatomy", "rabiser2012qualitative"}));
  v.push_back(make("N3", C::Navigation, "Flexible navigation",
                   "Can users modify or undo earlier selections without losing the current "
                   "configuration state?",
                   {"abbasi2013anatomy", "rabiser2012qualitative", "trentin2013sales"}));
  v.push_back(make("N4", C::Navigation, "Progress indication",
                   "Does the configurator clearly indicate the current step, remaining steps, and "
                   "completion status (e.g., stepper or progress bar)?",
                   {"abbasi2013anatomy", "leclercq2018studying"}));
  v.push_back(make("N5", C::Navigation, "Variant persistence",
                   "Can users save, name, or restore previous full configuration variants during "
                   "or after the session (e.g., version history or saved configurations)?",
                   {"trentin2013sales"}));
  v.push_back(make("N6", C::Navigation, "Starting points",
                   "Does the system offer practical starting points to support different user "
                   "needs (e.g., starting from predefined configurations or selecting properties "
                   "to start with)?",
                   {"leitner2014userinterfaces", "trentin2013sales"}));

  // Visualization.
  v.push_back(make("V1", C::Visualization, "Product preview",
                   "Does the configurator provide a product preview that is continuously updated "
                   "after changes to reflect the current configuration?",
                   {"abbasi2013anatomy", "leclercq2018studying", "leitner2014userinterfaces",
                    "rabiser2012qualitative", "rogoll2004product"}));
  v.push_back(make("V2", C::Visualization, "Customized preview",
                   "Can users switch between preview modes (e.g., 2D/3D images or a textual "
                   "summary), with a consistent relation to the current configuration?",
                   {"leclercq2022essential", "rogoll2004product"}));

  return Catalog(std::move(v));
}

namespace {

std::string entry_label(std::size_t index, const json& entry) {
  std::string label = "entry " + std::to_string(index);
  if (entry.is_object() && entry.contains("id") && entry["id"].is_string()) {
    label += " (id \"" + entry["id"].get<std::string>() + "\")";
  }
  return label;
}

std::string required_string(const json& entry, const char* field, const std::string& label) {
  if (!entry.contains(field) || !entry[field].is_string()) {
    throw CatalogError(label + ": missing or non-string field \"" + field + "\"");
  }
  return entry[field].get<std::string>();
}

}  // namespace

Catalog load_catalog(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw CatalogError(std::string("catalog parse failure: ") + e.what());
  }
  if (!doc.is_array()) {
    throw CatalogError("catalog document must be an array of criterion records");
  }

  std::vector<Criterion> criteria;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const auto label = entry_label(i, e);
    if (!e.is_object()) throw CatalogError(label + ": not an object");

    const auto id_text = required_string(e, "id", label);
    const auto id = CriterionId::try_parse(id_text);
    if (!id) {
      throw CatalogError(label + ": malformed criterion id \"" + id_text + "\"");
    }
    if (!seen.insert(id_text).second) {
      throw CatalogError(label + ": duplicate criterion id \"" + id_text + "\"");
    }
    const auto category_text = required_string(e, "category", label);
    const auto category = category_from_string(category_text);
    if (!category) throw CatalogError(label + ": unknown category \"" + category_text + "\"");

    auto description = required_string(e, "description", label);
    if (trim(description).empty()) throw CatalogError(label + ": empty description");

    std::vector<std::string> refs;
    if (e.contains("references")) {
      if (!e["references"].is_array()) throw CatalogError(label + ": references must be an array");
      for (const auto& r : e["references"]) {
        if (!r.is_string()) throw CatalogError(label + ": references must be strings");
        refs.push_back(r.get<std::string>());
      }
    }
    criteria.push_back(Criterion{*id, *category, required_string(e, "name", label),
                                 std::move(description), std::move(refs)});
  }
  return Catalog(std::move(criteria));
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  return load_catalog(read_file(path));
}

std::string dump_catalog(const Catalog& catalog) {
  json doc = json::array();
  for (const auto& c : catalog) {
    doc.push_back({{"id", c.id.str()},
                   {"category", std::string(to_string(c.category))},
                   {"name", c.name},
                   {"description", c.description},
                   {"references", c.references}});
  }
  return doc.dump(2) + "\n";
}

Catalog criteria_subset(const Catalog& catalog, std::span<const CriterionId> ids) {
  for (const auto& id : ids) {
    if (!catalog.find(id.str())) {
      throw CatalogError("unknown criterion id \"" + id.str() + "\"");
    }
  }
  std::vector<Criterion> out;
  for (const auto& c : catalog) {
    if (std::find(ids.begin(), ids.end(), c.id) != ids.end()) out.push_back(c);
  }
  return Catalog(std::move(out));
}

std::vector<CriterionId> parse_criteria_list(std::string_view text, const Catalog& catalog) {
  if (trim(text) == "all") return catalog.ids();
  std::vector<CriterionId> ids;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto token = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    if (!token.empty()) {
      const auto id = CriterionId::try_parse(token);
      if (!id || !catalog.find(id->str())) {
        throw CatalogError("unknown criterion id \"" + token + "\"");
      }
      ids.push_back(*id);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (ids.empty()) throw CatalogError("empty criteria list");
  return ids;
}

}  // namespace confalyzer
