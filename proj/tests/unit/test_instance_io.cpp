#include <gtest/gtest.h>

#include <sstream>

#include "infoshare/instance_io.hpp"

using namespace infoshare;

namespace {

GameInstance parse(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const char* kPerPath = R"(# sample
[utility]
mode = per-path
M = 2000

[paths]
1 40 3875
2 25 3426   # trailing comment
3 10 2933

[types]
0.6 : 0.5 0.3 0.2
0.4 : 0.2 0.3 0.5
)";

}  // namespace

TEST(InstanceFile, ParsesPerPathInstance) {
  const auto g = parse(kPerPath);
  EXPECT_EQ(g.k(), 3u);
  EXPECT_EQ(g.m(), 2u);
  EXPECT_EQ(g.cost(0), 30.0);
  EXPECT_EQ(g.cost(2), 0.0);
  EXPECT_EQ(g.cost_shift(), 10.0);
  EXPECT_EQ(g.utility().mode(), UtilityModel::Mode::per_path);
  EXPECT_EQ(g.utility().capacities()[1], 3426);
  EXPECT_DOUBLE_EQ(g.weight(1, 2), 0.5);
}

TEST(InstanceFile, ParsesCommonFunctions) {
  const auto g = parse("[utility]\nmode = common\nfunction = power\nscale = 10\nexponent = 0.5\n"
                       "[paths]\n1 1\n2 0\n[types]\n1 : 0.5 0.5\n");
  EXPECT_NEAR(g.U(0, 0.25), 5.0, 1e-12);
  const auto h = parse("[utility]\nmode = common\nM = 2000\nN = 3875\n[paths]\n1 1\n2 0\n[types]\n1 : 0.5 0.5\n");
  EXPECT_EQ(h.utility().capacities()[0], 3875);
}

TEST(InstanceFile, RoundTripsThroughWriter) {
  const auto g = parse(kPerPath);
  std::ostringstream out;
  write_instance(out, g);
  const auto h = parse(out.str());
  ASSERT_EQ(h.k(), g.k());
  for (std::size_t j = 0; j < g.k(); ++j) EXPECT_EQ(h.cost(j), g.cost(j));
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j) EXPECT_EQ(h.weight(i, j), g.weight(i, j));
}

TEST(InstanceFile, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[utility]\nmode = common\nN = 10\nM = 10\n[paths]\n1 abc\n2 0\n[types]\n1 : 0.5 0.5\n"), 6u);
  EXPECT_EQ(error_line("[utility]\nmode = common\nN = 10\nM = 10\n[paths]\n1 1\n3 0\n[types]\n1 : 0.5 0.5\n"), 7u);
  EXPECT_EQ(error_line("[utility]\nmode = common\nN = 10\nM = 10\n[paths]\n1 1\n2 0\n[types]\n1 : 0.5\n"), 9u);
  EXPECT_EQ(error_line("[utility]\nmode = per-path\nM = 10\n[paths]\n1 1\n2 0\n[types]\n1 : 0.5 0.5\n"), 2u);
  EXPECT_EQ(error_line("[utility]\nmode = bogus\n[paths]\n1 1\n2 0\n[types]\n1 : 0.5 0.5\n"), 2u);
  EXPECT_EQ(error_line("stray\n"), 1u);
  EXPECT_EQ(error_line("[paths]\n1 1\n[paths]\n2 0\n"), 3u);
}

TEST(InstanceFile, ErrorMessageNamesField) {
  try {
    parse("[utility]\nmode = common\nN = 10\nM = 10\n[paths]\n1 -2\n2 0\n[types]\n1 : 0.5 0.5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "cost");
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos);
  }
}

TEST(InstanceFile, InvalidInstanceIsReportedAsParseError) {
  EXPECT_THROW(parse("[utility]\nmode = common\nN = 10\nM = 10\n[paths]\n1 1\n2 0\n[types]\n1 : 0.7 0.7\n"),
               ParseError);
  EXPECT_THROW(parse("[paths]\n1 1\n2 0\n"), ParseError);
}
