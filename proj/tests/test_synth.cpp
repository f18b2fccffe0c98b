#include <doctest.h>

#include <set>

#include "patlink/synth.hpp"

using namespace patlink;

TEST_CASE("synthetic corpus shape and determinism") {
  SynthParams p;
  p.n_records = 200;
  p.n_planted = 60;
  p.n_distractors = 40;
  p.n_journals = 12;
  auto a = generate_synthetic(p);
  auto b = generate_synthetic(p);
  CHECK(a.corpus.records == b.corpus.records);
  CHECK(a.corpus.refs == b.corpus.refs);
  CHECK(a.truth == b.truth);

  CHECK(a.corpus.records.size() == 200);
  CHECK(a.corpus.refs.size() == 100);
  CHECK(a.truth.size() == 100);
  std::size_t planted = 0;
  std::set<std::string> targets;
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    CHECK(a.truth[i].ref_id == a.corpus.refs[i].ref_id);
    CHECK(a.corpus.find_patent(a.corpus.refs[i].patent_id) != nullptr);
    if (!a.truth[i].record_id) continue;
    ++planted;
    CHECK(a.corpus.find_record(*a.truth[i].record_id) != nullptr);
    targets.insert(*a.truth[i].record_id);
  }
  CHECK(planted == 60);
  CHECK(targets.size() == 60);

  std::set<std::string> dois;
  for (const auto& r : a.corpus.records)
    if (r.doi) CHECK(dois.insert(*r.doi).second);

  p.seed += 1;
  CHECK_FALSE(generate_synthetic(p).corpus.refs == a.corpus.refs);
}

TEST_CASE("synthetic parameters are validated") {
  SynthParams p;
  p.n_planted = p.n_records + 1;
  CHECK_THROWS_AS(generate_synthetic(p), std::invalid_argument);
  p = {};
  p.title_max = p.title_min - 1;
  CHECK_THROWS_AS(generate_synthetic(p), std::invalid_argument);
}

TEST_CASE("truth records round-trip through JSON") {
  SynthTruth t{"ref-1", std::nullopt, {"distractor"}};
  CHECK(Json(t).get<SynthTruth>() == t);
  t.record_id = "rec-7";
  CHECK(Json(t).get<SynthTruth>() == t);
}
