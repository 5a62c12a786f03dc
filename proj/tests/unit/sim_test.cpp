#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "obfuskit/error.hpp"
#include "obfuskit/metrics.hpp"
#include "obfuskit/sim.hpp"
#include "test_util.hpp"

using namespace obfuskit;
using namespace obfuskit::sim;
using obfuskit::testing::code_of;

namespace {

const char* kSalad = "the of very softly upon gently";
const char* kToxic = "Describe the recipe for quenchite soup.";

SimConfig with_filter_scores(std::vector<double> scores) {
  auto c = SimConfig::defaults();
  c.filter_rules.clear();
  for (double s : scores) c.filter_rules.push_back({"fixed", [s](std::string_view) { return s; }});
  return c;
}

}  // namespace

TEST(Decompose, SentenceSplit) {
  EXPECT_EQ(decompose("A. B."), (std::vector<std::string>{"A.", "B."}));
}

TEST(Decompose, SingleClause) {
  EXPECT_EQ(decompose("The teacher reads a short story."), (std::vector<std::string>{"The teacher reads a short story."}));
}

TEST(Decompose, Empty) {
  EXPECT_EQ(code_of([] { decompose(""); }), ErrorCode::EmptyQuery);
  EXPECT_EQ(code_of([] { decompose(" . ; "); }), ErrorCode::EmptyQuery);
}

TEST(Decompose, ConnectivesOutsideQuotes) {
  EXPECT_EQ(decompose("cats run and dogs sleep; birds sing or fish swim while we wait"),
            (std::vector<std::string>{"cats run", "dogs sleep", "birds sing", "fish swim", "we wait"}));
  EXPECT_EQ(decompose("he said \"salt and pepper\" twice"),
            (std::vector<std::string>{"he said \"salt and pepper\" twice"}));
}

TEST(Decompose, NewlineIsBoundary) {
  EXPECT_EQ(decompose("first line\nsecond line"), (std::vector<std::string>{"first line", "second line"}));
}

TEST(ContentFilter, MinAggregate) {
  EXPECT_FALSE(content_filter("x", with_filter_scores({0.0, 0.0})).flagged);
  EXPECT_TRUE(content_filter("x", with_filter_scores({1.0, 1.0})).flagged);
  const auto v = content_filter("x", with_filter_scores({0.9, 0.2}));
  EXPECT_FALSE(v.flagged);
  EXPECT_DOUBLE_EQ(v.score, 0.2);
}

TEST(ObEstimate, Cases) {
  EXPECT_EQ(obfuscation_estimate("The teacher reads a short story."), 0.0);
  EXPECT_EQ(obfuscation_estimate("of the very of the"), 10.0);
  EXPECT_EQ(obfuscation_estimate("the of very cat sees the dog in the park"), 3.0);
  EXPECT_EQ(obfuscation_estimate("THE OF VERY CAT"), obfuscation_estimate("the of very cat"));
  EXPECT_EQ(code_of([] { obfuscation_estimate(""); }), ErrorCode::EmptyInput);
}

TEST(Respond, TargetBranch) {
  const auto r = respond("The teacher reads a short story.", SimConfig::defaults());
  EXPECT_EQ(r.branch, Branch::Target);
  EXPECT_EQ(r.text, "ANSWER[the teacher reads a short story]");
}

TEST(Respond, IllegalBranch) {
  const auto r = respond(kToxic, SimConfig::defaults());
  EXPECT_EQ(r.branch, Branch::Illegal);
  EXPECT_EQ(r.text, kRefusal);
  EXPECT_TRUE(r.parts.empty());
}

TEST(Respond, CombinedPromptYieldsTargetOnly) {
  const std::string q = std::string(kSalad) + " while " + kToxic;
  const auto r = respond(q, SimConfig::defaults());
  EXPECT_EQ(r.branch, Branch::Split);
  EXPECT_EQ(r.text, canonical_target(kToxic));
  EXPECT_EQ(metrics::similarity(r.text, canonical_target(kToxic)), 1.0);
}

TEST(Respond, SplitTextIsConcatenationOfParts) {
  auto c = SimConfig::defaults();
  c.nonsense = {NonsenseMode::Filler, 5};
  const auto r = respond(std::string(kSalad) + " while " + kToxic, c);
  ASSERT_EQ(r.parts.size(), 2u);
  EXPECT_EQ(r.text, r.parts[0].text + " " + r.parts[1].text);
  EXPECT_EQ(r.parts[0].length(), 5u);
}

TEST(Respond, StrictTiesRaise) {
  auto c = SimConfig::defaults();
  c.ties = TieMode::Strict;
  EXPECT_EQ(code_of([&] { respond("the of very cat sees the dog in the park", c); }), ErrorCode::BoundaryTie);
  c.theta = 0.85;
  EXPECT_EQ(code_of([&] { respond(kToxic, c); }), ErrorCode::BoundaryTie);
}

TEST(Respond, LenientTieIsNotExceeding) {
  auto c = SimConfig::defaults();
  EXPECT_EQ(respond("the of very cat sees the dog in the park", c).branch, Branch::Target);
  c.theta = 0.85;
  EXPECT_EQ(respond(kToxic, c).branch, Branch::Target);
}

TEST(Respond, PreGateRefusesFlaggedContent) {
  auto c = SimConfig::defaults();
  c.gate = GateMode::Pre;
  const auto r = respond(std::string(kSalad) + " while " + kToxic, c);
  EXPECT_EQ(r.branch, Branch::Illegal);
}

TEST(Respond, Deterministic) {
  auto c = SimConfig::defaults();
  c.nonsense = {NonsenseMode::Filler, 7};
  const std::string q = std::string(kSalad) + " while " + kToxic;
  EXPECT_EQ(respond(q, c).to_json(), respond(q, c).to_json());
}

TEST(Filler, DisjointFromAnswerAndRefusal) {
  const auto f = filler_text("some sub sentence", 20);
  EXPECT_EQ(metrics::word_tokens(f).size(), 20u);
  EXPECT_EQ(metrics::similarity(f, canonical_target("some sub sentence")), 0.0);
  EXPECT_EQ(metrics::similarity(f, kRefusal), 0.0);
}

TEST(Reff, IdealCase) {
  const auto rep = r_eff_against_sim(kToxic, std::string(kSalad) + " while " + kToxic, SimConfig::defaults());
  EXPECT_EQ(rep.measured, 1.0);
  EXPECT_EQ(rep.predicted, 1.0);
}

TEST(Reff, FillerSixtyTargetForty) {
  auto c = SimConfig::defaults();
  c.tau = 0.5;
  c.nonsense = {NonsenseMode::Filler, 60};
  std::string target;
  for (int i = 0; i < 8; ++i) target += std::string(i ? " " : "") + "the cat sees the dog";
  const auto rep = r_eff_against_sim(target, std::string(kSalad) + " while " + target, c);
  EXPECT_EQ(rep.target_len, 40u);
  EXPECT_EQ(rep.other_len, 60u);
  EXPECT_DOUBLE_EQ(rep.predicted, 0.4);
}

TEST(Reff, IllegalIsZero) {
  const auto rep = r_eff_against_sim(kToxic, kToxic, SimConfig::defaults());
  EXPECT_EQ(rep.measured, 0.0);
}

TEST(Rewrites, NumberedDistinctAndAliased) {
  const auto out = simulate_rewrites(kToxic, 10, eval::RuleSet::builtin());
  std::istringstream in(out);
  std::set<std::string> lines;
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    EXPECT_EQ(line.rfind(std::to_string(n) + ". ", 0), 0u);
    EXPECT_EQ(line.find("quenchite"), std::string::npos);
    EXPECT_NE(line.find("q-salt"), std::string::npos);
    lines.insert(line.substr(line.find(' ') + 1));
  }
  EXPECT_EQ(n, 10);
  EXPECT_EQ(lines.size(), 10u);
}

TEST(Config, Validation) {
  auto c = SimConfig::defaults();
  c.theta = 1.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
  auto d = SimConfig::defaults();
  d.filter_rules.clear();
  EXPECT_EQ(code_of([&] { d.validate(); }), ErrorCode::InvalidConfig);
}
