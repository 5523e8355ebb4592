#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "kgrev/diff.hpp"
#include "support/generators.hpp"

using namespace kgrev;

namespace {

EntityDocument country() {
    EntityDocument doc;
    doc.id = "Q219";
    doc.labels = {{"en", "Bulgaria"}, {"de", "Bulgarien"}};
    doc.descriptions = {{"en", "country in Southeast Europe"}};
    doc.aliases = {{"en", {"Republic of Bulgaria", "BGR"}}};
    doc.statements["P85"] = {{"P85", EntityRef{"Q23410"}}};
    doc.statements["P1082"] = {{"P1082", Quantity{"+6951482", std::nullopt}}};
    return doc;
}

}  // namespace

TEST_CASE("identical documents produce no deltas") {
    auto doc = country();
    CHECK(diff_entities(doc, doc).empty());
}

TEST_CASE("replacing a statement value yields one Change, not remove+insert") {
    auto parent = country();
    auto current = country();
    current.statements["P85"] = {{"P85", EntityRef{"Q1018186"}}};

    auto deltas = diff_entities(parent, current);
    REQUIRE(deltas.size() == 1);
    const auto& d = deltas[0];
    CHECK(d.action == DeltaAction::Change);
    CHECK(d.target == DeltaTarget{TargetFamily::Statement, "P85"});
    CHECK(d.old_value->triple_value() == StatementValue{EntityRef{"Q23410"}});
    CHECK(d.new_value->triple_value() == StatementValue{EntityRef{"Q1018186"}});
}

TEST_CASE("two unmatched on one side stay removes and inserts") {
    auto parent = country();
    parent.statements["P85"] = {{"P85", EntityRef{"Q1"}}, {"P85", EntityRef{"Q2"}}};
    auto current = country();
    current.statements["P85"] = {{"P85", EntityRef{"Q3"}}};

    auto deltas = diff_entities(parent, current);
    REQUIRE(deltas.size() == 3);
    int removes = 0, inserts = 0, changes = 0;
    for (const auto& d : deltas) {
        removes += d.action == DeltaAction::Remove;
        inserts += d.action == DeltaAction::Insert;
        changes += d.action == DeltaAction::Change;
    }
    CHECK(removes == 2);
    CHECK(inserts == 1);
    CHECK(changes == 0);
}

TEST_CASE("statement lists align as multisets") {
    auto parent = country();
    parent.statements["P85"] = {{"P85", EntityRef{"Q1"}}, {"P85", EntityRef{"Q1"}}};
    auto current = country();

    SUBCASE("reordering duplicates is invisible") {
        current.statements["P85"] = {{"P85", EntityRef{"Q1"}}, {"P85", EntityRef{"Q1"}}};
        CHECK(diff_entities(parent, current).empty());
    }
    SUBCASE("dropping one copy of a duplicate is a Remove") {
        current.statements["P85"] = {{"P85", EntityRef{"Q1"}}};
        auto deltas = diff_entities(parent, current);
        REQUIRE(deltas.size() == 1);
        CHECK(deltas[0].action == DeltaAction::Remove);
    }
}

TEST_CASE("aliases diff as per-language sets") {
    auto parent = country();
    auto current = country();

    SUBCASE("pure reorder is invisible") {
        current.aliases["en"] = {"BGR", "Republic of Bulgaria"};
        CHECK(diff_entities(parent, current).empty());
    }
    SUBCASE("replacement becomes remove plus insert, never Change") {
        current.aliases["en"] = {"Republic of Bulgaria", "BG"};
        auto deltas = diff_entities(parent, current);
        REQUIRE(deltas.size() == 2);
        for (const auto& d : deltas) {
            CHECK(d.target.family == TargetFamily::Alias);
            CHECK(d.action != DeltaAction::Change);
        }
    }
}

TEST_CASE("term maps diff per language key") {
    auto parent = country();
    auto current = country();
    current.labels["de"] = "Republik Bulgarien";  // change
    current.labels.erase("en");                   // remove
    current.descriptions["de"] = "Staat in Europa";  // insert

    auto deltas = diff_entities(parent, current);
    REQUIRE(deltas.size() == 3);
    CHECK(deltas[0] == ContentDelta{DeltaAction::Change,
                                    {TargetFamily::Label, "de"},
                                    DeltaValue{std::string("Bulgarien")},
                                    DeltaValue{std::string("Republik Bulgarien")}});
    CHECK(deltas[1] == ContentDelta{DeltaAction::Remove,
                                    {TargetFamily::Label, "en"},
                                    DeltaValue{std::string("Bulgaria")},
                                    std::nullopt});
    CHECK(deltas[2] == ContentDelta{DeltaAction::Insert,
                                    {TargetFamily::Description, "de"},
                                    std::nullopt,
                                    DeltaValue{std::string("Staat in Europa")}});
}

TEST_CASE("deltas appear family by family, keys in lexicographic order") {
    auto parent = country();
    auto current = country();
    current.statements["P1082"] = {{"P1082", Quantity{"+7000000", std::nullopt}}};
    current.labels["en"] = "BULGARIA";
    current.aliases["en"].push_back("Bulgarie");

    auto deltas = diff_entities(parent, current);
    REQUIRE(deltas.size() == 3);
    CHECK(deltas[0].target.family == TargetFamily::Label);
    CHECK(deltas[1].target.family == TargetFamily::Alias);
    CHECK(deltas[2].target.family == TargetFamily::Statement);
}

TEST_CASE("page creation inserts everything") {
    auto current = country();
    auto deltas = diff_entities(std::nullopt, current);
    CHECK(deltas.size() > 0);
    for (const auto& d : deltas) CHECK(d.action == DeltaAction::Insert);
    CHECK(diff_equal(apply_deltas(std::nullopt, deltas), current));
}

TEST_CASE("diffing different entities is an error") {
    auto parent = country();
    auto current = country();
    current.id = "Q42";
    CHECK_THROWS_AS(diff_entities(parent, current), EntityMismatch);
}

TEST_CASE("apply_deltas rejects deltas about content the parent lacks") {
    auto parent = country();
    ContentDelta bogus{DeltaAction::Remove,
                       {TargetFamily::Label, "fr"},
                       DeltaValue{std::string("Bulgarie")},
                       std::nullopt};
    CHECK_THROWS_AS(apply_deltas(parent, {bogus}), InconsistentDelta);

    ContentDelta stale{DeltaAction::Change,
                       {TargetFamily::Label, "en"},
                       DeltaValue{std::string("not the current label")},
                       DeltaValue{std::string("anything")}};
    CHECK_THROWS_AS(apply_deltas(parent, {stale}), InconsistentDelta);
}

TEST_CASE("delta well-formedness follows the action") {
    DeltaTarget t{TargetFamily::Label, "en"};
    DeltaValue v{std::string("x")};
    CHECK(delta_is_well_formed({DeltaAction::Insert, t, std::nullopt, v}));
    CHECK(delta_is_well_formed({DeltaAction::Remove, t, v, std::nullopt}));
    CHECK(delta_is_well_formed({DeltaAction::Change, t, v, DeltaValue{std::string("y")}}));
    CHECK_FALSE(delta_is_well_formed({DeltaAction::Insert, t, v, v}));
    CHECK_FALSE(delta_is_well_formed({DeltaAction::Remove, t, std::nullopt, v}));
    CHECK_FALSE(delta_is_well_formed({DeltaAction::Change, t, v, std::nullopt}));
}

TEST_CASE("every emitted delta is well-formed") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto parent = testgen::random_document(rng, "Q77");
        auto current = testgen::mutate_document(rng, parent);
        for (const auto& d : diff_entities(parent, current)) {
            CHECK(delta_is_well_formed(d));
        }
    }
}

TEST_CASE("diff then apply reproduces the revision") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 500; ++i) {
        auto parent = testgen::random_document(rng, "Q" + std::to_string(1 + i % 50));
        auto current = parent;
        int edits = 1 + int(rng() % 4);
        for (int e = 0; e < edits; ++e) current = testgen::mutate_document(rng, current);
        auto deltas = diff_entities(parent, current);
        CHECK(diff_equal(apply_deltas(parent, deltas), current));
    }
}

TEST_CASE("revision shape classification") {
    ContentDelta ins{DeltaAction::Insert,
                     {TargetFamily::Label, "en"},
                     std::nullopt,
                     DeltaValue{std::string("a")}};
    ContentDelta rem{DeltaAction::Remove,
                     {TargetFamily::Label, "de"},
                     DeltaValue{std::string("b")},
                     std::nullopt};
    ContentDelta chg{DeltaAction::Change,
                     {TargetFamily::Label, "fr"},
                     DeltaValue{std::string("c")},
                     DeltaValue{std::string("d")}};

    CHECK(classify_revision_shape({ins, ins}) == RevisionShape::InsertOnly);
    CHECK(classify_revision_shape({rem}) == RevisionShape::RemoveOnly);
    CHECK(classify_revision_shape({chg, chg}) == RevisionShape::ChangeOnly);
    CHECK(classify_revision_shape({ins, rem}) == RevisionShape::Mixed);
    CHECK(classify_revision_shape({ins, chg}) == RevisionShape::Mixed);
    CHECK_THROWS_AS(classify_revision_shape({}), EmptyRevision);
}

TEST_CASE("diff_equal sees multisets where the differ does") {
    auto a = country();
    auto b = country();
    b.aliases["en"] = {"BGR", "Republic of Bulgaria"};
    CHECK(diff_equal(a, b));  // alias reorder is invisible

    a.statements["P85"] = {{"P85", EntityRef{"Q1"}}, {"P85", EntityRef{"Q2"}}};
    b = a;
    b.statements["P85"] = {{"P85", EntityRef{"Q2"}}, {"P85", EntityRef{"Q1"}}};
    CHECK(diff_equal(a, b));  // statement reorder too

    b.statements["P85"].push_back({"P85", EntityRef{"Q1"}});
    CHECK_FALSE(diff_equal(a, b));  // multiplicity is visible

    b = a;
    b.labels["en"] = "BULGARIA";
    CHECK_FALSE(diff_equal(a, b));
}
