#include <gtest/gtest.h>

#include "fairhil/error.hpp"
#include "fairhil/subgroup.hpp"
#include "fairhil/summary.hpp"

using namespace fairhil;

namespace {

DataTable table() {
  std::vector<std::optional<std::string>> g{"m", "f", "f", "m", "f", "f"};
  std::vector<std::optional<std::string>> c{"d", "d", "x", "x", "x", "d"};
  std::vector<std::optional<std::string>> y{"1", "1", "0", "0", "1", "0"};
  return DataTable({Column::from_labels("g", g), Column::from_labels("c", c), Column::numeric("n", {1, 2, 3, 4, 5, 6}),
                    Column::from_labels("y", y)})
      .with_target("y", "1");
}

}  // namespace

TEST(Combination, NormalizedIdAndLimits) {
  const Combination a = make_combination({{"g", "f"}, {"c", "x"}});
  const Combination b = make_combination({{"c", "x"}, {"g", "f"}});
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.id.size(), 16u);
  EXPECT_EQ(a.constraints.front().first, "c");
  EXPECT_NE(make_combination({{"g", "m"}}).id, a.id);
  EXPECT_THROW((void)make_combination({}), Error);
  EXPECT_THROW((void)make_combination({{"g", "f"}, {"g", "m"}}), Error);
  EXPECT_THROW((void)make_combination({{"a", "1"}, {"b", "1"}, {"c", "1"}, {"d", "1"}}, 3), Error);
  EXPECT_NO_THROW((void)make_combination({{"a", "1"}, {"b", "1"}, {"c", "1"}, {"d", "1"}}, 4));
}

TEST(Card, MembersAndRateMatchFilter) {
  const DataTable t = table();
  const Combination c = make_combination({{"g", "f"}, {"c", "x"}});
  const SubgroupCard card = build_card(t, c, t.outcomes());
  std::vector<Constraint> f{{"g", std::string("f")}, {"c", std::string("x")}};
  EXPECT_EQ(card.member_count, filter_rows(t, f).size());
  EXPECT_EQ(card.member_count, 2u);
  ASSERT_TRUE(card.acceptance_rate);
  EXPECT_DOUBLE_EQ(*card.acceptance_rate, 0.5);
}

TEST(Card, OrderingRules) {
  const DataTable t = table();
  std::vector<SubgroupCard> cards;
  for (auto pairs : std::vector<std::vector<std::pair<std::string, std::string>>>{
           {{"g", "m"}}, {{"g", "f"}}, {{"c", "x"}}, {{"c", "d"}}, {{"g", "m"}, {"c", "d"}}}) {
    cards.push_back(build_card(t, make_combination(pairs), t.outcomes()));
  }
  const Outcomes unknown(t.rows(), kUnknownOutcome);
  cards.push_back(build_card(t, make_combination({{"g", "m"}, {"c", "x"}}), unknown));
  const auto ordered = order_cards(cards);
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    const auto& a = ordered[i - 1];
    const auto& b = ordered[i];
    if (!b.acceptance_rate) continue;
    ASSERT_TRUE(a.acceptance_rate);
    EXPECT_LE(*a.acceptance_rate, *b.acceptance_rate);
    if (*a.acceptance_rate == *b.acceptance_rate) EXPECT_GE(a.member_count, b.member_count);
  }
  EXPECT_FALSE(ordered.back().acceptance_rate);
}

TEST(FlagSet, ExplicitSetSemantics) {
  FlagSet f;
  const std::set<std::string> known{"a", "b"};
  f.set("a", true, known);
  f.set("a", true, known);
  EXPECT_TRUE(f.get("a"));
  f.set("a", false, known);
  EXPECT_FALSE(f.get("a"));
  EXPECT_THROW(f.set("zz", true, known), Error);
  f.set("b", true, known);
  f.retain({"a"});
  EXPECT_TRUE(f.ids().empty());
}
