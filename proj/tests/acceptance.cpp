// One line per acceptance criterion: PASS/FAIL, name, measured values.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "patlink/blocking.hpp"
#include "patlink/indicators.hpp"
#include "patlink/normalize.hpp"
#include "patlink/parallel.hpp"
#include "patlink/review_server.hpp"
#include "patlink/scoring.hpp"
#include "patlink/synth.hpp"
#include "patlink/validation.hpp"
#include "properties.hpp"
#include "reconstructed.hpp"

using namespace patlink;
using namespace patlink::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

/// Checks that `value` rounds to `published` at the given decimals, i.e.
/// lies within half a unit of the last displayed digit.
bool matches_display(const Ratio& value, const std::string& published, int decimals) {
  return value && format_fixed(value, decimals) == published;
}

void table2_arithmetic() {
  struct Row {
    TrendCounts counts;
    std::string pct_journals, pct_docs, per_doc, fam_per_doc;
  };
  const std::vector<Row> rows = {
      {{2008, 23820, 8424, 7847445, 176321, 598989, 248725}, "35.4", "2.25", "0.076", "0.032"},
      {{2009, 25368, 8779, 8325768, 182296, 600541, 259075}, "34.6", "2.19", "0.072", "0.031"},
      {{2010, 27240, 9349, 8825158, 188379, 607578, 266009}, "34.3", "2.13", "0.069", "0.030"},
      {{2011, 28716, 9856, 9291259, 191230, 609970, 272490}, "34.3", "2.06", "0.066", "0.029"},
      {{2012, 30094, 10305, 9783094, 197467, 639670, 278183}, "34.2", "2.02", "0.065", "0.028"},
      {{2013, 30758, 10727, 10250199, 196259, 600011, 272744}, "34.9", "1.91", "0.059", "0.027"},
      {{2014, 31203, 10607, 10722918, 185699, 575083, 252377}, "34.0", "1.73", "0.054", "0.024"},
      {{2015, 31890, 9940, 11203655, 155557, 496650, 207536}, "31.2", "1.39", "0.044", "0.019"},
      {{2016, 32313, 9015, 11575432, 119278, 382423, 157430}, "27.9", "1.03", "0.033", "0.014"},
      {{2017, 32669, 7697, 11879030, 79459, 245469, 101388}, "23.6", "0.67", "0.021", "0.009"},
  };
  auto t0 = Clock::now();
  int ok = 0;
  std::string bad;
  for (const auto& r : rows) {
    auto d = derive_trend_row(r.counts);
    bool pass = matches_display(d.pct_journals_cited, r.pct_journals, 1) &&
                matches_display(d.pct_docs_cited, r.pct_docs, 2) &&
                matches_display(d.citations_per_doc, r.per_doc, 3) &&
                matches_display(d.families_per_doc, r.fam_per_doc, 3);
    if (pass) ++ok;
    else bad += " " + std::to_string(r.counts.year);
  }
  double secs = seconds_since(t0);
  std::ostringstream msg;
  msg << ok << "/10 rows match" << (bad.empty() ? "" : " (mismatch:" + bad + ")") << ", " << secs << " s";
  report(ok == 10 && secs < 1.0, "trend table arithmetic", msg.str());
}

void table1_arithmetic() {
  auto t0 = Clock::now();
  std::vector<SectorCounts> sectors = {
      {"higher_education", 18534000, 4129000, 527000}, {"government", 4137000, 930000, 134000},
      {"health", 3565000, 1811000, 150000},           {"private", 719000, 854000, 57000},
      {"other", 250000, 66000, 8000},
  };
  auto rows = derive_sector_rows(sectors, {"", 23511000, 5351000, 628000});
  std::map<std::string, std::string> want = {{"higher_education", "2.8"}, {"government", "3.2"},
                                             {"health", "4.2"},          {"private", "7.9"},
                                             {"other", "3.2"},           {kAssignmentsTotal, "3.2"},
                                             {kUniqueTotal, "2.7"}};
  int ok = 0;
  for (const auto& r : rows)
    if (want.count(r.sector) && matches_display(r.pct_papers_cited, want[r.sector], 1)) ++ok;
  double secs = seconds_since(t0);
  std::ostringstream msg;
  msg << ok << "/" << want.size() << " sector percentages match, " << secs << " s";
  report(ok == static_cast<int>(want.size()) && secs < 1.0, "sector table arithmetic", msg.str());
}

void reconstructed_fixtures() {
  auto nb = nature_biotech_fixture();
  JournalOptions jo;
  jo.granted_before = 2018;
  auto m = journal_metrics("NBT", 2012, nb.corpus, nb.links, jo);
  bool nb_ok = m.n_citable_docs == 988 && matches_display(m.patent_jif_5y, "3.85", 2) &&
               matches_display(m.family_jif_5y, "1.33", 2) && matches_display(m.pct_docs_cited, "30.9", 1);

  auto lis = lis_fixture();
  const std::string cat = "library_information_sciences";
  long long lis_total = -1, lis_top = -1;
  for (const auto& row : category_top_cited(2012, lis.corpus, lis.links, 3, 5, 2018))
    if (row.category_id == cat) {
      lis_total = row.total_patent_citations;
      if (!row.shortlist.empty()) lis_top = row.shortlist[0].patent_citations;
    }
  CitationScope scope;
  scope.filing_from = scope.filing_to = 2012;
  scope.window = 5;
  auto assignees = assignee_counts({cat}, lis.corpus, lis.links, scope);
  long long ibm = assignees.empty() || assignees[0].first != "ibm" ? -1 : assignees[0].second;

  std::ostringstream msg;
  msg << "Nature Biotechnology patent JIF " << format_fixed(m.patent_jif_5y, 2) << ", family JIF "
      << format_fixed(m.family_jif_5y, 2) << ", % cited " << format_fixed(m.pct_docs_cited, 1)
      << "; LIS total " << lis_total << " (top " << lis_top << "); IBM " << ibm;
  report(nb_ok && lis_total == 613 && lis_top == 223 && ibm == 13, "reconstructed fixtures", msg.str());
}

void matching_quality() {
  auto t0 = Clock::now();
  auto synth = generate_synthetic();
  auto& corpus = synth.corpus;
  corpus.refs = normalize_references(corpus.refs);
  auto index = InvertedIndex::build(corpus);
  BlockingParams blocking;
  ScoringParams scoring;
  auto results = match_all(corpus.refs, corpus, index, blocking, scoring);

  std::map<std::string, std::optional<std::string>> truth;
  std::size_t planted = 0;
  for (const auto& t : synth.truth) {
    truth[t.ref_id] = t.record_id;
    planted += t.record_id.has_value();
  }
  std::size_t accepted = 0, correct = 0, reviewable = 0;
  for (const auto& r : results) {
    bool right = truth[r.ref_id] && r.best_record_id == *truth[r.ref_id];
    if (r.status == MatchStatus::needs_review && right) ++reviewable;
    if (r.status != MatchStatus::auto_accepted) continue;
    ++accepted;
    if (right) ++correct;
  }
  double precision = accepted ? double(correct) / double(accepted) : 0.0;
  double recall = planted ? double(correct) / double(planted) : 0.0;

  // Brute-force oracle: every (ref, record) pair the scorer would accept.
  const auto& refs = corpus.refs;
  std::vector<std::size_t> oracle(refs.size()), covered(refs.size());
  std::atomic<std::size_t> pairs{0};
  parallel_for(refs.size(), [&](std::size_t i) {
    const auto& e = *refs[i].elements;
    RefScorer scorer(e, corpus, index, scoring);
    auto cands = generate_candidate_positions(e, index, blocking);
    std::set<RecordPos> cand_set(cands.begin(), cands.end());
    for (RecordPos p = 0; p < index.n_records(); ++p) {
      if (scorer.score(p) < scoring.tau_auto) continue;
      ++oracle[i];
      covered[i] += cand_set.count(p);
    }
    pairs += index.n_records();
  });
  std::size_t n_oracle = 0, n_covered = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    n_oracle += oracle[i];
    n_covered += covered[i];
  }
  double coverage = n_oracle ? double(n_covered) / double(n_oracle) : 1.0;
  double secs = seconds_since(t0);

  std::ostringstream msg;
  msg << "precision " << precision << " (" << correct << "/" << accepted << "), recall " << recall << " ("
      << correct << "/" << planted << "), with review queue " << double(correct + reviewable) / double(planted)
      << ", blocking coverage " << coverage << " (" << n_covered << "/" << n_oracle
      << " of " << pairs.load() << " scored pairs), " << secs << " s";
  report(precision >= 0.95 && recall >= 0.90 && coverage >= 0.99 && secs < 60.0, "matching quality",
         msg.str());
}

void property_suites() {
  auto t0 = Clock::now();
  std::size_t total_failures = 0, props = 0;
  std::string failed;
  for (const auto& prop : all_properties()) {
    auto r = prop.run(kPropertySeed, kPropertyCases);
    ++props;
    total_failures += r.failures;
    if (r.failures) failed += " " + prop.name;
  }
  std::ostringstream msg;
  msg << props << " properties x " << kPropertyCases << " cases, " << total_failures << " failures"
      << (failed.empty() ? "" : " (" + failed.substr(1) + ")") << ", " << seconds_since(t0) << " s";
  report(total_failures == 0, "property suites", msg.str());
}

void validation_service() {
  auto t0 = Clock::now();
  const int n_tasks = 500, n_validators = 8;
  Corpus corpus;
  std::vector<MatchResult> matches;
  for (int i = 0; i < n_tasks; ++i) {
    auto id = padded("", static_cast<std::size_t>(i));
    corpus.patents.push_back(make_patent("P" + id, "F" + id, 2012));
    corpus.refs.push_back({"q" + id, "P" + id, "reference " + id, std::nullopt});
    for (const char* s : {"a", "b"}) corpus.records.push_back(make_record("r" + id + s, "J", 2010));
    matches.push_back({"q" + id, "r" + id + "a", 0.7, MatchStatus::needs_review, {{"r" + id + "b", 0.6}}});
  }
  corpus.reindex();

  auto dir = scratch_dir("acceptance");
  auto log = dir / "decisions.ndrec";
  ExportResult live;
  std::size_t closed = 0, leases = 0, double_leases = 0;
  {
    ValidationQueue queue(corpus);
    queue.enqueue(matches);
    queue.attach_log(log);
    ReviewServer server(queue, matches, corpus);
    int port = server.bind();
    std::thread serving([&] { server.serve(); });
    while (!httplib::Client("127.0.0.1", port).Get("/stats")) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    std::mutex mu;
    std::map<std::string, std::set<std::string>> holders;
    std::vector<std::thread> validators;
    for (int v = 0; v < n_validators; ++v) {
      validators.emplace_back([&, v] {
        httplib::Client cli("127.0.0.1", port);
        auto who = "validator-" + std::to_string(v);
        for (int n = 0;; ++n) {
          auto res = cli.Get("/tasks/next?validator=" + who);
          if (!res || res->status != 200) break;
          auto task = Json::parse(res->body);
          auto ref = task.at("ref_id").get<std::string>();
          {
            std::lock_guard lock(mu);
            holders[ref].insert(who);
          }
          Json d = {{"ref_id", ref},
                    {"chosen_record_id", n % 5 == 4 ? Json(nullptr) : task["candidates"][0]["record_id"]},
                    {"validator_id", who},
                    {"request_id", who + "-" + std::to_string(n)}};
          cli.Post("/decisions", d.dump(), "application/json");
        }
      });
    }
    for (auto& t : validators) t.join();
    server.stop();
    serving.join();
    closed = queue.stats().closed();
    for (const auto& [_, who] : holders) {
      ++leases;
      double_leases += who.size() > 1;
    }
    live = export_links(matches, queue.decisions(), queue.params(), corpus);
  }

  ValidationQueue replay(corpus);
  replay.enqueue(matches);
  replay.attach_log(log);
  auto replayed = export_links(matches, replay.decisions(), replay.params(), corpus);
  bool same = replayed.links == live.links && replayed.rejected == live.rejected &&
              replayed.disputed == live.disputed && replayed.pending == live.pending;
  double secs = seconds_since(t0);
  std::filesystem::remove_all(dir);

  std::ostringstream msg;
  msg << closed << "/" << n_tasks << " closed by " << n_validators << " validators, " << leases
      << " tasks leased, " << double_leases << " double leases, replay " << (same ? "identical" : "DIFFERS")
      << " (" << live.links.size() << " links, " << live.rejected.size() << " rejected), " << secs << " s";
  report(closed == n_tasks && double_leases == 0 && same && secs < 30.0, "validation service", msg.str());
}

}  // namespace

int main() {
  table2_arithmetic();
  table1_arithmetic();
  reconstructed_fixtures();
  matching_quality();
  property_suites();
  validation_service();
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << "(" << failures << " failing criteria)" << std::endl;
  return failures ? 1 : 0;
}
