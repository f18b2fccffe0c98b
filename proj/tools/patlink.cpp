// patlink command line: corpus checks, matching stages, the review service
// and indicator reports.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "patlink/blocking.hpp"
#include "patlink/family.hpp"
#include "patlink/indicators.hpp"
#include "patlink/ndrec.hpp"
#include "patlink/normalize.hpp"
#include "patlink/parallel.hpp"
#include "patlink/params.hpp"
#include "patlink/review_server.hpp"
#include "patlink/scoring.hpp"
#include "patlink/synth.hpp"
#include "patlink/validation.hpp"

using namespace patlink;
namespace fs = std::filesystem;

namespace {

struct Global {
  fs::path data = ".";
  std::optional<fs::path> params;
  bool lenient = false;
  unsigned threads = 0;
};

PipelineParams pipeline_params(const Global& g) {
  return g.params ? load_params(*g.params) : PipelineParams{};
}

Corpus corpus_of(const Global& g) {
  LoadOptions opts;
  opts.strict = !g.lenient;
  auto c = load_corpus(CorpusPaths::in_directory(g.data), opts);
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << '\n';
  return c;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw FormatError("cannot write " + p.string());
  return out;
}

// ---- load --------------------------------------------------------------

int cmd_load(const Global& g, bool check) {
  auto c = corpus_of(g);
  if (check) validate_corpus(c);
  std::set<std::string> families, sources, categories, sectors;
  for (const auto& p : c.patents) families.insert(p.family_id);
  std::map<DocType, std::size_t> types;
  for (const auto& r : c.records) {
    sources.insert(r.source_id);
    categories.insert(r.category_ids.begin(), r.category_ids.end());
    sectors.insert(r.sector_ids.begin(), r.sector_ids.end());
    ++types[r.doc_type];
  }
  std::size_t with_elements = 0;
  for (const auto& r : c.refs) with_elements += r.elements.has_value();
  std::cout << "records        " << c.records.size() << '\n'
            << "sources        " << sources.size() << '\n'
            << "categories     " << categories.size() << '\n'
            << "sectors        " << sectors.size() << '\n'
            << "patents        " << c.patents.size() << '\n'
            << "families       " << families.size() << '\n'
            << "npl_refs       " << c.refs.size() << " (" << with_elements << " segmented)\n"
            << "paper_cites    " << c.paper_cites.size() << '\n'
            << "overrides      " << c.overrides.size() << '\n'
            << "rejected_lines " << c.rejected_lines << '\n'
            << "warnings       " << c.warnings.size() << '\n';
  for (const auto& [t, n] : types) std::cout << "doc_type." << to_string(t) << ' ' << n << '\n';
  if (check) std::cout << "integrity      ok\n";
  return 0;
}

// ---- matching stages ---------------------------------------------------

int cmd_normalize(const Global& g, const fs::path& in, const fs::path& out) {
  auto params = pipeline_params(g);
  auto refs = normalize_references(read_ndrec<NplReference>(in), params.text);
  write_ndrec(out, refs);
  std::size_t empty = 0;
  for (const auto& r : refs) empty += r.elements->empty();
  std::cerr << refs.size() << " refs normalized, " << empty << " without elements\n";
  return 0;
}

std::vector<NplReference> segmented(const fs::path& path) {
  auto refs = read_ndrec<NplReference>(path);
  for (const auto& r : refs)
    if (!r.elements) throw FormatError(path.string() + ": ref " + r.ref_id + " has no elements");
  return refs;
}

int cmd_block(const Global& g, const fs::path& refs_path, const fs::path& out) {
  auto params = pipeline_params(g);
  auto corpus = corpus_of(g);
  auto index = InvertedIndex::build(corpus, params.text);
  auto refs = segmented(refs_path);
  std::vector<Candidates> cands(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    cands[i] = {refs[i].ref_id, generate_candidates(*refs[i].elements, index, params.blocking)};
  }, g.threads ? g.threads : default_threads());
  write_ndrec(out, cands);
  std::size_t pairs = 0;
  for (const auto& c : cands) pairs += c.record_ids.size();
  std::cerr << refs.size() << " refs, " << pairs << " candidate pairs\n";
  return 0;
}

int cmd_score(const Global& g, const fs::path& refs_path, const fs::path& cand_path,
              const fs::path& out) {
  auto params = pipeline_params(g);
  auto corpus = corpus_of(g);
  auto index = InvertedIndex::build(corpus, params.text);
  std::map<std::string, RefElements> elements;
  for (auto& r : segmented(refs_path)) elements.emplace(r.ref_id, std::move(*r.elements));
  auto cands = read_ndrec<Candidates>(cand_path);
  std::vector<MatchResult> matches(cands.size());
  parallel_for(cands.size(), [&](std::size_t i) {
    auto it = elements.find(cands[i].ref_id);
    if (it == elements.end()) throw IntegrityError("candidates for unknown ref " + cands[i].ref_id);
    matches[i] = resolve_reference(cands[i].ref_id, it->second, cands[i].record_ids, corpus,
                                   index, params.scoring);
  }, g.threads ? g.threads : default_threads());
  write_ndrec(out, matches);
  std::map<MatchStatus, std::size_t> by_status;
  for (const auto& m : matches) ++by_status[m.status];
  for (const auto& [s, n] : by_status) std::cerr << to_string(s) << ' ' << n << '\n';
  return 0;
}

// ---- review service ----------------------------------------------------

ReviewServer* running_server = nullptr;

void on_signal(int) {
  if (running_server) running_server->stop();
}

int cmd_serve(const Global& g, const std::string& host, int port, const fs::path& queue_path,
              const fs::path& log_path) {
  auto params = pipeline_params(g);
  auto corpus = corpus_of(g);
  auto matches = read_ndrec<MatchResult>(queue_path);
  std::vector<MatchResult> review;
  for (const auto& m : matches)
    if (m.status == MatchStatus::needs_review) review.push_back(m);
  ValidationQueue queue(corpus, params.validation);
  queue.enqueue(review);
  queue.attach_log(log_path);
  ReviewServer server(queue, matches, corpus);
  int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ':' << port << '\n';
    return 1;
  }
  auto s = queue.stats();
  std::cerr << "serving " << s.total << " tasks (" << s.closed() << " closed) on http://" << host
            << ':' << bound << '\n';
  running_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.serve();
  running_server = nullptr;
  return 0;
}

int cmd_export(const Global& g, const fs::path& matches_path, const std::optional<fs::path>& log_path,
               const fs::path& out) {
  auto params = pipeline_params(g);
  auto corpus = corpus_of(g);
  auto matches = read_ndrec<MatchResult>(matches_path);
  std::vector<Decision> decisions;
  if (log_path && fs::exists(*log_path)) decisions = read_ndrec<Decision>(*log_path);
  auto r = export_links(matches, decisions, params.validation, corpus);
  write_ndrec(out, r.links);
  std::cerr << r.links.size() << " links, " << r.rejected.size() << " rejected, "
            << r.disputed.size() << " disputed, " << r.pending.size() << " pending\n";
  return 0;
}

int cmd_propagate(const Global& g, const fs::path& links_path, const fs::path& out) {
  auto corpus = corpus_of(g);
  auto direct = read_ndrec<CitationLink>(links_path);
  auto links = propagate(direct, corpus.patents);
  write_ndrec(out, links);
  std::cerr << direct.size() << " links in, " << links.size() << " after propagation\n";
  return 0;
}

// ---- indicators --------------------------------------------------------

struct IndicatorArgs {
  fs::path links;
  std::string report;
  std::optional<int> year;
  int window = 5;
  fs::path out;
  std::optional<int> from;
  std::optional<int> to;
  std::optional<int> granted_before;
  std::vector<std::string> categories;
  std::string side = "patents";
  std::size_t top = 0;
  std::string rank = "patent_jif";
  bool fractional = false;
};

int need_year(const IndicatorArgs& a) {
  if (!a.year) throw CLI::ValidationError("--year", "required for report " + a.report);
  return *a.year;
}

std::set<std::string> category_set(const IndicatorArgs& a) {
  if (a.categories.empty()) throw CLI::ValidationError("--category", "required for report " + a.report);
  return {a.categories.begin(), a.categories.end()};
}

int cmd_indicators(const Global& g, const IndicatorArgs& a) {
  auto params = pipeline_params(g);
  auto corpus = corpus_of(g);
  auto links = read_ndrec<CitationLink>(a.links);
  auto out = open_out(a.out);

  CitationScope scope;
  scope.granted_before = a.granted_before;
  if (a.year) scope.filing_from = scope.filing_to = a.year;

  if (a.report == "sectors") {
    SectorOptions opts;
    opts.pub_from = a.from;
    opts.pub_to = a.to;
    opts.scope.granted_before = a.granted_before;
    if (a.year) {
      opts.scope.filing_from = opts.scope.filing_to = a.year;
      opts.scope.window = a.window;
    }
    write_csv(out, sector_breakdown(corpus, links, opts));
  } else if (a.report == "trend") {
    std::vector<int> years;
    if (a.year) {
      years.push_back(*a.year);
    } else {
      if (!a.from || !a.to) throw CLI::ValidationError("--year", "trend needs --year or --from/--to");
      for (int y = *a.from; y <= *a.to; ++y) years.push_back(y);
    }
    write_csv(out, annual_trend(corpus, links, years, {a.window, a.granted_before}));
  } else if (a.report == "journals") {
    JournalOptions opts;
    opts.patent_window = a.window;
    opts.granted_before = a.granted_before;
    auto rows = journal_metrics_all(need_year(a), corpus, links, opts);
    if (a.top > 0) {
      auto key = a.rank == "pct_cited" ? RankKey::pct_docs_cited : RankKey::patent_jif_5y;
      rows = top_journals(std::move(rows), a.top, key);
    }
    write_csv(out, rows);
  } else if (a.report == "categories") {
    if (a.top > 0) {
      write_csv(out, category_top_cited(need_year(a), corpus, links, a.top, a.window,
                                        a.granted_before));
    } else {
      CategoryOptions opts;
      opts.journal.patent_window = a.window;
      opts.journal.granted_before = a.granted_before;
      opts.fractional = a.fractional;
      write_csv(out, category_means(need_year(a), corpus, links, opts));
    }
  } else if (a.report == "terms") {
    auto side = a.side == "papers" ? TitleSide::cited_papers : TitleSide::citing_patents;
    auto titles = category_titles(category_set(a), corpus, links, scope, side);
    write_csv(out, term_profile(titles, params.text.stopwords), "term");
  } else if (a.report == "assignees") {
    write_csv(out, assignee_counts(category_set(a), corpus, links, scope), "assignee");
  }
  return 0;
}

// ---- synthetic corpus --------------------------------------------------

int cmd_synth(const SynthParams& p, const fs::path& dir) {
  fs::create_directories(dir);
  auto s = generate_synthetic(p);
  save_corpus(s.corpus, CorpusPaths::in_directory(dir));
  write_ndrec(dir / "truth.ndrec", s.truth);
  std::cerr << s.corpus.records.size() << " records, " << s.corpus.patents.size() << " patents, "
            << s.corpus.refs.size() << " refs written to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link patent non-patent references to bibliographic records and report on the links"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--data", g.data, "Corpus directory")->check(CLI::ExistingDirectory);
  app.add_option("--params", g.params, "Pipeline parameter file")->check(CLI::ExistingFile);
  app.add_flag("--lenient", g.lenient, "Skip malformed input lines instead of failing");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  auto* load = app.add_subcommand("load", "Load the corpus and print statistics");
  bool check = false;
  load->add_flag("--check", check, "Also verify cross references");

  fs::path in, out, refs, cands, links, queue_path, log_path;
  std::optional<fs::path> export_log;

  auto* normalize = app.add_subcommand("normalize", "Segment raw reference strings");
  normalize->add_option("--in", in, "npl_refs.ndrec")->required()->check(CLI::ExistingFile);
  normalize->add_option("--out", out, "Segmented refs")->required();

  auto* block = app.add_subcommand("block", "Candidate records per reference");
  block->add_option("--refs", refs, "Segmented refs")->required()->check(CLI::ExistingFile);
  block->add_option("--out", out, "candidates.ndrec")->required();

  auto* score = app.add_subcommand("score", "Score candidates and triage");
  score->add_option("--refs", refs, "Segmented refs")->required()->check(CLI::ExistingFile);
  score->add_option("--candidates", cands, "candidates.ndrec")->required()->check(CLI::ExistingFile);
  score->add_option("--out", out, "matches.ndrec")->required();

  auto* serve = app.add_subcommand("serve", "Run the validation service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 = any free port)");
  serve->add_option("--queue", queue_path, "matches.ndrec")->required()->check(CLI::ExistingFile);
  serve->add_option("--log", log_path, "Decision log, replayed and appended")->required();

  auto* exp = app.add_subcommand("export", "Accepted links from matches and decisions");
  exp->add_option("--matches", in, "matches.ndrec")->required()->check(CLI::ExistingFile);
  exp->add_option("--log", export_log, "Decision log");
  exp->add_option("--out", out, "accepted.ndrec")->required();

  auto* prop = app.add_subcommand("propagate", "Extend links across patent families");
  prop->add_option("--links", links, "accepted.ndrec")->required()->check(CLI::ExistingFile);
  prop->add_option("--out", out, "links_final.ndrec")->required();

  auto* ind = app.add_subcommand("indicators", "Citation indicator reports as CSV");
  IndicatorArgs ia;
  ind->add_option("--links", ia.links, "links_final.ndrec")->required()->check(CLI::ExistingFile);
  ind->add_option("--report", ia.report, "Report kind")
      ->required()
      ->check(CLI::IsMember({"sectors", "trend", "journals", "categories", "terms", "assignees"}));
  ind->add_option("--year", ia.year, "Patent filing year (anchor year)");
  ind->add_option("--window", ia.window, "Citation window in years")->check(CLI::IsMember({3, 5}));
  ind->add_option("--out", ia.out, "report.csv")->required();
  ind->add_option("--from", ia.from, "First year (sectors: publication, trend: filing)");
  ind->add_option("--to", ia.to, "Last year");
  ind->add_option("--granted-before", ia.granted_before, "Only patents granted before this year");
  ind->add_option("--category", ia.categories, "Category ids (terms, assignees)");
  ind->add_option("--side", ia.side, "Titles of citing patents or cited papers (terms)")
      ->check(CLI::IsMember({"patents", "papers"}));
  ind->add_option("--top", ia.top, "Keep the top K journals (journals) or shortlist journals (categories)");
  ind->add_option("--rank", ia.rank, "Journal ranking key")->check(CLI::IsMember({"patent_jif", "pct_cited"}));
  ind->add_flag("--fractional", ia.fractional, "Split multi-category journals across categories");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with ground truth");
  SynthParams sp;
  fs::path synth_dir;
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--seed", sp.seed);
  synth->add_option("--records", sp.n_records);
  synth->add_option("--planted", sp.n_planted);
  synth->add_option("--distractors", sp.n_distractors);
  synth->add_option("--journals", sp.n_journals);
  synth->add_option("--token-drop-rate", sp.token_drop_rate);
  synth->add_option("--ocr-rate", sp.ocr_rate);
  synth->add_option("--missing-doi-rate", sp.missing_doi_rate);
  synth->add_option("--near-miss-rate", sp.near_miss_rate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*load) return cmd_load(g, check);
    if (*normalize) return cmd_normalize(g, in, out);
    if (*block) return cmd_block(g, refs, out);
    if (*score) return cmd_score(g, refs, cands, out);
    if (*serve) return cmd_serve(g, host, port, queue_path, log_path);
    if (*exp) return cmd_export(g, in, export_log, out);
    if (*prop) return cmd_propagate(g, links, out);
    if (*ind) return cmd_indicators(g, ia);
    if (*synth) return cmd_synth(sp, synth_dir);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
