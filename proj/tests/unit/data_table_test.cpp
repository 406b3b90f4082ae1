#include <cmath>

#include <gtest/gtest.h>

#include "fairhil/data_table.hpp"
#include "fairhil/error.hpp"

using namespace fairhil;

namespace {

DataTable small() {
  std::vector<std::optional<std::string>> g{"m", "f", std::nullopt, "f"};
  std::vector<std::optional<std::string>> y{"yes", "no", "no", "yes"};
  return DataTable({Column::numeric("age", {30, NAN, 41.5, 22}), Column::from_labels("g", g),
                    Column::from_labels("y", y)});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST(ParseNumber, AcceptsPlainDecimals) {
  EXPECT_EQ(parse_number("42"), 42.0);
  EXPECT_EQ(parse_number("-1.5e3"), -1500.0);
  EXPECT_EQ(parse_number("+7"), 7.0);
  EXPECT_EQ(parse_number("  3.25 "), 3.25);
  EXPECT_FALSE(parse_number("abc"));
  EXPECT_FALSE(parse_number("1,5"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("12x"));
}

TEST(FormatNumber, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 1e21}) {
    EXPECT_EQ(parse_number(format_number(v)), v) << format_number(v);
  }
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(SortLevels, NumericAware) {
  std::vector<std::string> a{"10", "9", "1"};
  sort_levels(a);
  EXPECT_EQ(a, (std::vector<std::string>{"1", "9", "10"}));
  std::vector<std::string> b{"b", "10", "a"};
  sort_levels(b);
  EXPECT_EQ(b, (std::vector<std::string>{"10", "a", "b"}));
}

TEST(Column, NumericAndCategoricalAccessors) {
  const DataTable t = small();
  const Column& age = t.column("age");
  EXPECT_TRUE(age.is_numeric());
  EXPECT_TRUE(age.is_missing(1));
  EXPECT_EQ(age.cell_text(2), "41.5");
  EXPECT_EQ(age.cell_text(1), "");
  const Column& g = t.column("g");
  EXPECT_EQ(g.levels(), (std::vector<std::string>{"f", "m"}));
  EXPECT_EQ(g.label(0), "m");
  EXPECT_TRUE(g.is_missing(2));
  EXPECT_EQ(g.code_of("m"), 1);
  EXPECT_FALSE(g.code_of("x"));
  EXPECT_EQ(g.missing_count(), 1u);
}

TEST(Column, SchemaReportsRangeAndValues) {
  const DataTable t = small();
  const ColumnSchema a = t.column("age").schema();
  EXPECT_EQ(a.kind, ColumnKind::kNumeric);
  EXPECT_DOUBLE_EQ(a.min, 22);
  EXPECT_DOUBLE_EQ(a.max, 41.5);
  EXPECT_EQ(a.missing_count, 1u);
  const ColumnSchema g = t.column("g").schema();
  EXPECT_EQ(g.distinct_values, (std::vector<std::string>{"f", "m"}));
}

TEST(DataTable, RejectsBadShapes) {
  EXPECT_EQ(code_of([] { DataTable({Column::numeric("a", {1}), Column::numeric("a", {2})}); }),
            ErrorCode::kSchema);
  EXPECT_EQ(code_of([] { DataTable({Column::numeric("a", {1}), Column::numeric("b", {2, 3})}); }),
            ErrorCode::kStructural);
}

TEST(DataTable, UnknownColumnListsAvailable) {
  const DataTable t = small();
  try {
    (void)t.column("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(e.detail().find("age"), std::string::npos);
    EXPECT_NE(e.detail().find("g"), std::string::npos);
  }
}

TEST(DataTable, TargetMustBeBinaryCategorical) {
  const DataTable t = small();
  EXPECT_EQ(code_of([&] { (void)t.with_target("age", "1"); }), ErrorCode::kValidation);
  EXPECT_EQ(code_of([&] { (void)t.with_target("g", "m"); }), ErrorCode::kValidation);  // has a missing cell
  EXPECT_EQ(code_of([&] { (void)t.with_target("y", "maybe"); }), ErrorCode::kValidation);
  std::vector<std::optional<std::string>> three{"a", "b", "c"};
  const DataTable t3({Column::from_labels("z", three)});
  EXPECT_EQ(code_of([&] { (void)t3.with_target("z", "a"); }), ErrorCode::kValidation);

  const DataTable w = t.with_target("y", "yes");
  EXPECT_EQ(w.target(), "y");
  EXPECT_EQ(w.negative_label(), "no");
  EXPECT_EQ(w.outcomes(), (Outcomes{1, 0, 0, 1}));
  EXPECT_EQ(w.positive_count(), 2u);
  EXPECT_EQ(w.features(), (std::vector<std::string>{"age", "g"}));
}

TEST(DataTable, WithColumnAppendsAndKeepsTarget) {
  const DataTable w = small().with_target("y", "yes");
  const DataTable x = w.with_column(Column::numeric("extra", {1, 2, 3, 4}).derived("age * 2"));
  EXPECT_EQ(x.cols(), 4u);
  EXPECT_EQ(x.target(), "y");
  ASSERT_TRUE(x.column("extra").derived_from());
  EXPECT_EQ(*x.column("extra").derived_from(), "age * 2");
  EXPECT_EQ(code_of([&] { (void)x.with_column(Column::numeric("age", {1, 2, 3, 4})); }), ErrorCode::kSchema);
}
