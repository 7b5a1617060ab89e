#include "confalyzer/catalog.hpp"
#include "confalyzer/util.hpp"
#include "helpers.hpp"

#include <json.hpp>

#include <map>

using namespace confalyzer;

TEST_CASE("builtin catalog has 18 criteria in four categories") {
  const Catalog cat = builtin_catalog();
  REQUIRE(cat.size() == 18);
  std::map<Category, int> per;
  for (const auto& c : cat) ++per[c.category];
  CHECK(per[Category::ConfigurationProcess] == 6);
  CHECK(per[Category::Explanation] == 4);
  CHECK(per[Category::Navigation] == 6);
  CHECK(per[Category::Visualization] == 2);

  std::vector<std::string> ids;
  for (const auto& id : cat.ids()) ids.push_back(id.str());
  CHECK(ids == std::vector<std::string>{"C1", "C2", "C3", "C4", "C5", "C6", "E1", "E2", "E3",
                                        "E4", "N1", "N2", "N3", "N4", "N5", "N6", "V1", "V2"});
}

TEST_CASE("criterion names") {
  const std::map<std::string, std::string> expected = {
      {"C1", "Customized options"},       {"C2", "Organized configuration space"},
      {"C3", "Availability of options"},  {"C4", "Auto-completion"},
      {"C5", "Variant comparison"},       {"C6", "Error prevention"},
      {"E1", "Providing domain knowledge"}, {"E2", "Transparency of dependencies"},
      {"E3", "Transparency of errors"},   {"E4", "Repair suggestions"},
      {"N1", "Focused navigation"},       {"N2", "Manual step transition"},
      {"N3", "Flexible navigation"},      {"N4", "Progress indication"},
      {"N5", "Variant persistence"},      {"N6", "Starting points"},
      {"V1", "Product preview"},          {"V2", "Customized preview"}};
  const Catalog cat = builtin_catalog();
  for (const auto& [id, name] : expected) {
    const auto* c = cat.find(id);
    REQUIRE(c != nullptr);
    CHECK(c->name == name);
  }
}

TEST_CASE("descriptions are stored verbatim") {
  const Catalog cat = builtin_catalog();
  CHECK(cat.at(CriterionId::parse("C4")).description ==
        "Does the configurator offer user-triggered auto-completion that fills in the remaining required options "
        "with defaults?");
  CHECK(cat.at(CriterionId::parse("E2")).description ==
        "Does the configurator explain dependencies of options at decision time (e.g., \xE2\x80\x98" "choosing X "
        "requires Y\xE2\x80\x99, \xE2\x80\x98this removes Z\xE2\x80\x99, impact on price/delivery) to highlight "
        "consequences of choices?");
  CHECK(cat.at(CriterionId::parse("N5")).description ==
        "Can users save, name, or restore previous full configuration variants during or after the session (e.g., "
        "version history or saved configurations)?");
  for (const auto& c : cat) {
    CHECK(c.description.back() == '?');
    CHECK_FALSE(c.references.empty());
  }
}

TEST_CASE("criterion id parsing") {
  CHECK(CriterionId::parse("c4").str() == "C4");
  CHECK(CriterionId::parse(" V2 ").str() == "V2");
  CHECK_FALSE(CriterionId::try_parse("C7"));
  CHECK_FALSE(CriterionId::try_parse("X1"));
  CHECK_FALSE(CriterionId::try_parse("C0"));
  CHECK_FALSE(CriterionId::try_parse("E5"));
  CHECK_FALSE(CriterionId::try_parse(""));
  CHECK_THROWS_WITH_AS(CriterionId::parse("Q9"), doctest::Contains("malformed criterion id"), CatalogError);
  CHECK(CriterionId::parse("C6") < CriterionId::parse("E1"));
  CHECK(CriterionId::parse("N6") < CriterionId::parse("V1"));
}

TEST_CASE("dump and load round trip, version is stable") {
  const Catalog cat = builtin_catalog();
  const Catalog again = load_catalog(dump_catalog(cat));
  CHECK(again == cat);
  CHECK(again.version() == cat.version());
  CHECK(cat.version().rfind("sha256:", 0) == 0);
}

TEST_CASE("shipped catalog file equals the builtin catalog") {
  const Catalog file = load_catalog_file(testing::source_dir() / "data" / "catalog.json");
  CHECK(file == builtin_catalog());
}

TEST_CASE("catalog validation errors") {
  using nlohmann::json;
  auto doc = json::parse(dump_catalog(builtin_catalog()));

  SUBCASE("duplicate id") {
    doc.push_back(doc[0]);
    CHECK_THROWS_WITH_AS(load_catalog(doc.dump()), doctest::Contains("duplicate criterion id"), CatalogError);
  }
  SUBCASE("description must be a question") {
    doc[0]["description"] = "A statement.";
    CHECK_THROWS_WITH_AS(load_catalog(doc.dump()), doctest::Contains("question"), CatalogError);
  }
  SUBCASE("category must match the id letter") {
    doc[0]["category"] = "Navigation";
    CHECK_THROWS_AS(load_catalog(doc.dump()), CatalogError);
  }
  SUBCASE("not json") { CHECK_THROWS_AS(load_catalog("{oops"), CatalogError); }
  SUBCASE("missing name") {
    doc[3].erase("name");
    CHECK_THROWS_AS(load_catalog(doc.dump()), CatalogError);
  }
}

TEST_CASE("criteria lists") {
  const Catalog cat = builtin_catalog();
  CHECK(parse_criteria_list("all", cat).size() == 18);
  const auto ids = parse_criteria_list("C5,n5", cat);
  REQUIRE(ids.size() == 2);
  CHECK(ids[1].str() == "N5");
  CHECK(criteria_subset(cat, ids).size() == 2);
  CHECK_THROWS_WITH_AS(parse_criteria_list("C1,Z9", cat), doctest::Contains("unknown criterion id"), CatalogError);

  const Catalog small = criteria_subset(cat, ids);
  CHECK_THROWS_WITH_AS(parse_criteria_list("C1", small), doctest::Contains("unknown criterion id"), CatalogError);
}
