#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace confalyzer {

enum class Category { ConfigurationProcess, Explanation, Navigation, Visualization };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);
char category_letter(Category c);
std::optional<Category> category_from_letter(char letter);
// Number of criteria the built-in catalog defines for a category (C:6, E:4, N:6, V:2).
int category_size(Category c);

/// Criterion identifier such as "C4" or "N5".
///
/// Only ids inside the built-in ranges (C1-C6, E1-E4, N1-N6, V1-V2) are
/// valid, so an id always determines its category.
class CriterionId {
 public:
  // "C1"; keeps aggregates holding an id default-constructible.
  CriterionId() : value_("C1"), category_(Category::ConfigurationProcess), number_(1) {}

  // Case-insensitive; surrounding whitespace is ignored.
  static std::optional<CriterionId> try_parse(std::string_view text);
  // Throws CatalogError on a malformed id.
  static CriterionId parse(std::string_view text);

  const std::string& str() const noexcept { return value_; }
  Category category() const noexcept { return category_; }
  int number() const noexcept { return number_; }

  bool operator==(const CriterionId& other) const noexcept { return value_ == other.value_; }
  // Catalog order: category (C, E, N, V) then number.
  std::strong_ordering operator<=>(const CriterionId& other) const noexcept;

 private:
  CriterionId(std::string value, Category category, int number)
      : value_(std::move(value)), category_(category), number_(number) {}

  std::string value_;
  Category category_;
  int number_;
};

struct Criterion {
  CriterionId id;
  Category category;
  std::string name;
  // Evaluation question, injected verbatim into prompts.
  std::string description;
  std::vector<std::string> references;

  bool operator==(const Criterion&) const = default;
};

/// Ordered, validated list of criteria. Immutable once built.
class Catalog {
 public:
  Catalog() = default;
  // Validates ids, categories, names and descriptions; throws CatalogError.
  explicit Catalog(std::vector<Criterion> criteria);

  const std::vector<Criterion>& criteria() const noexcept { return criteria_; }
  std::size_t size() const noexcept { return criteria_.size(); }
  bool empty() const noexcept { return criteria_.empty(); }
  auto begin() const noexcept { return criteria_.begin(); }
  auto end() const noexcept { return criteria_.end(); }

  const Criterion* find(std::string_view id) const noexcept;
  const Criterion& at(const CriterionId& id) const;
  std::vector<CriterionId> ids() const;

  // Content hash of the canonical serialization, e.g. "sha256:3f1c0a9e2b7d".
  std::string version() const;

  bool operator==(const Catalog&) const = default;

 private:
  std::vector<Criterion> criteria_;
};

Catalog builtin_catalog();

// Parses the catalog document: a JSON array of
// {id, category, name, description, references[]}.
Catalog load_catalog(std::string_view document);
Catalog load_catalog_file(const std::filesystem::path& path);
std::string dump_catalog(const Catalog& catalog);

// Entries of `catalog` whose id is in `ids`, in catalog order.
Catalog criteria_subset(const Catalog& catalog, std::span<const CriterionId> ids);
// Accepts "all" or a comma-separated id list.
std::vector<CriterionId> parse_criteria_list(std::string_view text, const Catalog& catalog);

}  // namespace confalyzer
