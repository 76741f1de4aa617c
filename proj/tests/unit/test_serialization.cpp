#include <gtest/gtest.h>

#include <sstream>

#include <qndcount/errors.hpp>
#include <qndcount/serialization.hpp>

namespace qndcount {
namespace {

std::size_t parse_error_line(std::string_view text) {
  try {
    parse_json(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(Json, SyntaxErrorsCarryLine) {
  EXPECT_EQ(parse_error_line("{\n  \"a\": 1,\n  \"b\": ]\n}"), 3u);
  EXPECT_EQ(parse_error_line("[1, 2"), 1u);
}

TEST(Json, LocateArrayElement) {
  const std::string text = "{\n \"x\": [0],\n \"entries\": [\n  {\"a\": [1, 2]},\n  {\"a\": 3},\n  5\n ]\n}";
  EXPECT_EQ(locate_array_element(text, "entries", 0), 4u);
  EXPECT_EQ(locate_array_element(text, "entries", 1), 5u);
  EXPECT_EQ(locate_array_element(text, "entries", 2), 6u);
  EXPECT_EQ(locate_array_element(text, "entries", 3), 0u);
  EXPECT_EQ(locate_array_element("[\n 1,\n [2]\n]", "", 1), 3u);
}

TEST(Records, RoundTrip) {
  MeasurementRecord r{{{1.5e-7, Outcome::Rydberg}, {2.25e-7, Outcome::NoRydberg}}};
  const RecordParams p{1.0e7, 2.0e6, 3e-7, 10};
  const auto back = record_from_text(record_to_json(r, p).dump(2));
  ASSERT_EQ(back.record.size(), 2u);
  EXPECT_EQ(back.record.entries[0].tau, 1.5e-7);
  EXPECT_EQ(back.record.entries[1].outcome, Outcome::NoRydberg);
  ASSERT_TRUE(back.params);
  EXPECT_EQ(back.params->atoms, 10);
  EXPECT_EQ(back.params->gamma, 2.0e6);
}

TEST(Records, BadEntryReportsItsLine) {
  const std::string text =
      "{\n  \"entries\": [\n    {\"tau_s\": 1e-7, \"outcome\": 1},\n    {\"tau_s\": 1e-7, \"outcome\": \"maybe\"}\n  ]\n}";
  try {
    record_from_text(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("entry 1"), std::string::npos);
  }
  EXPECT_THROW(record_from_text("[]"), ParseError);
  EXPECT_NO_THROW(record_from_text("{\"entries\": []}"));
}

TEST(Candidates, ArrayAndObjectForms) {
  const auto a = candidates_from_text("[[0, 1], {\"p\": [0, 0, 0.5, 0.5]}]");
  ASSERT_EQ(a.candidates.size(), 2u);
  EXPECT_FALSE(a.prior);
  EXPECT_EQ(a.candidates[1][3], 0.5);
  const auto b = candidates_from_text(candidates_to_json(a.candidates, Posterior{{0.9, 0.1}}).dump());
  ASSERT_TRUE(b.prior);
  EXPECT_EQ(b.prior->weights[0], 0.9);
  EXPECT_THROW(candidates_from_text("{\"candidates\": [[0, 1]], \"prior\": [0.3]}"), ParseError);
  EXPECT_THROW(candidates_from_text("{\"other\": 1}"), ParseError);
  try {
    candidates_from_text("[\n [0, 1],\n [0.5, 0.2]\n]");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(States, RoundTrip) {
  const auto psi = PureCollectiveState::from_amplitudes({Complex(0.6), Complex(0.0, 0.8)});
  const auto back = pure_state_from_json(to_json(psi));
  EXPECT_EQ(back.s_amp, psi.s_amp);
  EXPECT_EQ(back.r_amp, psi.r_amp);
  const auto sigma = fock_block_state(2, 5, 1);
  const auto sb = block_state_from_json(to_json(sigma));
  EXPECT_EQ(sb.j, 1);
  EXPECT_LT((sb.x - sigma.x).norm(), 1e-15);
  Json bad = to_json(sigma);
  bad["x"].erase(0);
  EXPECT_THROW(block_state_from_json(bad), ParseError);
}

TEST(Schedules, RoundTrip) {
  for (const auto& s : {Schedule::fixed(1e-7), Schedule::uniform(1e-8, 2e-7),
                        Schedule::precomputed({1e-7, 3e-7}), Schedule::greedy({123, 5.0})}) {
    const auto back = schedule_from_json(to_json(s));
    EXPECT_EQ(back.kind, s.kind);
    EXPECT_EQ(to_json(back), to_json(s));
  }
}

TEST(Csv, HeaderAndWidth) {
  std::ostringstream out;
  CsvWriter w(out, "demo", Json{{"seed", 3}}, {"a", "b"});
  w.row(std::vector<double>{0.1, 2.0});
  EXPECT_EQ(out.str(), "# qndcount demo schema=1\n# config {\"seed\":3}\na,b\n0.1,2\n");
  EXPECT_THROW(w.row(std::vector<double>{1.0}), Error);
}

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.25), "0.25");
}

TEST(Trajectories, JsonLinesLayout) {
  TrajectoryLog log;
  log.index = 7;
  log.seed = 9;
  log.record.entries.push_back({1e-7, Outcome::Rydberg});
  log.outcome_probabilities = {0.4};
  log.posteriors = {Posterior{{0.2, 0.8}}};
  log.fidelity = {0.9};
  log.overlap = {0.95};
  log.wall_time_s = 12.0;
  std::ostringstream out;
  write_trajectories(out, Json{{"seed", 9}}, {log});
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(parse_json(header).at("schema_version"), kSchemaVersion);
  const Json j = parse_json(line);
  EXPECT_EQ(j.at("index"), 7);
  EXPECT_FALSE(j.contains("wall_time_s"));
  EXPECT_TRUE(record_from_text(line).record.size() == 1);
}

}  // namespace
}  // namespace qndcount
