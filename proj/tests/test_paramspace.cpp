#include <gtest/gtest.h>

#include <random>
#include <set>

#include "aconf/paramspace.hpp"

using namespace aconf;

namespace {

const char* kConditional =
    "mode {on,off} [off]\n"
    "ratio [0.1,0.9] [0.5]\n"
    "child [1,10] [5] i\n"
    "child | mode in {on}\n";

std::vector<std::string> labels(const ParameterSpec& p) { return p.values; }

}  // namespace

TEST(Pcs, SingleCategorical) {
  auto s = parse_pcs("restart {luby,geometric} [luby]\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.parameters()[0].kind, ParamKind::categorical);
  EXPECT_EQ(s.to_string(s.default_configuration()), "restart=luby");
}

TEST(Pcs, ConditionalSpace) {
  auto s = parse_pcs(kConditional);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_TRUE(s.has_conditions_on(s.index_of("child")));
  auto def = s.default_configuration();
  EXPECT_TRUE(is_inactive(def[s.index_of("child")]));
  EXPECT_FALSE(s.is_active(def, "child"));
  EXPECT_TRUE(s.is_active(def, "ratio"));
  EXPECT_TRUE(s.is_valid(def));
}

TEST(Pcs, RoundTrip) {
  auto s = parse_pcs(kConditional);
  EXPECT_EQ(parse_pcs(serialize_pcs(s)), s);
  auto f = parse_pcs(
      "a {0,1} [0]\nb {0,1} [0]\nc [1,100] [10] l\nd [0,8] [2] i\ne {x,y,z} [x]\n"
      "e | a in {1}\n{a=1, b=1}\n");
  EXPECT_EQ(parse_pcs(serialize_pcs(f)), f);
  auto plain = parse_pcs("restart {luby,geometric} [luby]\n");
  EXPECT_EQ(serialize_pcs(plain).find('{', serialize_pcs(plain).find('\n')), std::string::npos);
}

TEST(Pcs, Errors) {
  EXPECT_THROW(parse_pcs("a {x,y} [z]\n"), SpaceError);
  EXPECT_THROW(parse_pcs("a [0,1] [2]\n"), SpaceError);
  EXPECT_THROW(parse_pcs("a {x,y} [x]\na {x,y} [y]\n"), SpaceError);
  try {
    parse_pcs("a {x,y} [x]\nb {x,y} [x]\na | b in {x}\nb | a in {x}\n");
    FAIL() << "cycle accepted";
  } catch (const SpaceError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(Space, TransitiveDeactivation) {
  auto s = parse_pcs(
      "mode {on,off} [off]\nchild {1,3} [3]\ngrand {p,q} [p]\n"
      "child | mode in {on}\ngrand | child in {3}\n");
  auto c = s.from_strings({{"mode", "off"}});
  EXPECT_FALSE(s.is_active(c, "grand"));
  auto on = s.from_strings({{"mode", "on"}});
  EXPECT_TRUE(s.is_active(on, "grand"));
  EXPECT_EQ(s.condition_depth(), 3u);
}

TEST(Space, ValidateViolations) {
  auto s = parse_pcs("a {0,1} [0]\nb {0,1} [0]\nr [0,1] [0.5]\n{a=1, b=1}\n");
  EXPECT_TRUE(s.validate(s.default_configuration()).empty());
  auto forbidden = s.from_strings({{"a", "1"}, {"b", "1"}});
  auto v = s.validate(forbidden);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::forbidden);
  Configuration high({0.0, 0.0, 1.5});
  v = s.validate(high);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, ViolationKind::out_of_domain);
}

TEST(Space, SamplerRespectsForbidden) {
  auto s = parse_pcs("a {0,1} [0]\nb {0,1} [0]\n{a=1, b=1}\n");
  std::mt19937_64 rng(4);
  std::set<std::string> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(s.to_string(s.sample_uniform(rng)));
  EXPECT_EQ(seen, (std::set<std::string>{"a=0 b=0", "a=0 b=1", "a=1 b=0"}));
}

TEST(Space, SamplerUniformBinary) {
  auto s = parse_pcs("a {0,1} [0]\n");
  std::mt19937_64 rng(11);
  int ones = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) ones += s.sample_uniform(rng)[0] == 1.0;
  // 3 sigma of Binomial(10000, 0.5) is 150.
  EXPECT_NEAR(ones, n / 2, 150);
}

TEST(Space, SamplerConditionalFrequency) {
  auto s = parse_pcs(kConditional);
  std::mt19937_64 rng(5);
  int on = 0, active = 0;
  const std::size_t mode = s.index_of("mode"), child = s.index_of("child");
  for (int i = 0; i < 5000; ++i) {
    auto c = s.sample_uniform(rng);
    on += s.parameters()[mode].values[static_cast<std::size_t>(c[mode])] == "on";
    active += !is_inactive(c[child]);
  }
  EXPECT_EQ(on, active);
}

TEST(Space, TooConstrained) {
  // Only the default survives the forbidden clauses; rejection sampling gives up.
  std::string text = "a {";
  for (int i = 0; i < 200; ++i) text += (i ? "," : "") + std::to_string(i);
  text += "} [0]\n";
  for (int i = 1; i < 200; ++i) text += "{a=" + std::to_string(i) + "}\n";
  auto s = parse_pcs(text);
  std::mt19937_64 rng(1);
  EXPECT_THROW(s.sample_uniform(rng, 3), SpaceTooConstrained);
}

TEST(Space, LogUniformSampling) {
  auto s = parse_pcs("x [0.01,100] [1] l\n");
  std::mt19937_64 rng(2);
  int below_one = 0;
  for (int i = 0; i < 4000; ++i) below_one += s.sample_uniform(rng)[0] < 1.0;
  EXPECT_NEAR(below_one, 2000, 3 * 32);
}

TEST(Discretize, Examples) {
  auto d = parse_pcs("x [0,1] [0.5]\n").discretize(5);
  EXPECT_EQ(labels(d.parameters()[0]), (std::vector<std::string>{"0", "0.25", "0.5", "0.75", "1"}));
  auto i = parse_pcs("k [1,3] [2] i\n").discretize(7);
  EXPECT_EQ(labels(i.parameters()[0]), (std::vector<std::string>{"1", "2", "3"}));
  auto l = parse_pcs("x [0.01,100] [1] l\n").discretize(5);
  ASSERT_EQ(l.parameters()[0].values.size(), 5u);
  const double expect[] = {0.01, 0.1, 1, 10, 100};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(std::stod(l.parameters()[0].values[k]), expect[k], expect[k] * 1e-12);
}

TEST(Discretize, DefaultInjected) {
  auto d = parse_pcs("x [0,1] [0.3]\n").discretize(5);
  auto v = labels(d.parameters()[0]);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_NE(std::find(v.begin(), v.end(), "0.3"), v.end());
  EXPECT_EQ(d.to_string(d.default_configuration()), "x=0.3");
}

TEST(Neighbors, OneExchange) {
  auto s = parse_pcs("a {0,1,2} [0]\n");
  auto n = s.neighbors(s.default_configuration());
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(s.to_string(n[0]), "a=1");
  EXPECT_EQ(s.to_string(n[1]), "a=2");
}

TEST(Neighbors, ConditionalChildEntersAtDefault) {
  auto s = parse_pcs("mode {on,off} [off]\nchild {1,5,9} [5]\nchild | mode in {on}\n");
  auto n = s.neighbors(s.default_configuration());
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(s.to_string(n[0]), "mode=on child=5");
  auto from_on = s.neighbors(n[0]);
  EXPECT_EQ(from_on.size(), 3u);  // mode off, child 1, child 9
}

TEST(Neighbors, NeverForbidden) {
  auto s = parse_pcs("a {0,1} [0]\nb {0,1} [1]\n{a=1, b=1}\n");
  for (const auto& c : s.neighbors(s.default_configuration())) EXPECT_TRUE(s.is_valid(c));
  EXPECT_EQ(s.neighbors(s.default_configuration()).size(), 1u);
}

TEST(Configuration, InactiveEquality) {
  Configuration a({1.0, kInactive});
  Configuration b({1.0, std::nan("")});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(Configuration({-0.0}), Configuration({0.0}));
}
