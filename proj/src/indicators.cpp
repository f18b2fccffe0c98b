#include "patlink/indicators.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace patlink {

Ratio ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

Ratio percent(double num, double den) {
  auto r = ratio(num, den);
  if (r) *r *= 100.0;
  return r;
}

namespace {

bool in_range(int v, const std::optional<int>& lo, const std::optional<int>& hi) {
  return (!lo || v >= *lo) && (!hi || v <= *hi);
}

bool in_window(int pub_year, int anchor, int window) {
  return pub_year >= anchor - window && pub_year <= anchor - 1;
}

double d(long long v) { return static_cast<double>(v); }

struct PairHash {
  std::size_t operator()(const std::pair<std::size_t, std::size_t>& p) const {
    return std::hash<std::size_t>()(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
  }
};

}  // namespace

std::vector<Citation> scoped_citations(const Corpus& corpus, const std::vector<CitationLink>& links,
                                       const CitationScope& scope) {
  std::vector<Citation> out;
  std::unordered_set<std::pair<std::size_t, std::size_t>, PairHash> seen;
  for (const auto& l : links) {
    auto pi = corpus.patent_index(l.patent_id);
    auto ri = corpus.record_index(l.record_id);
    if (!pi) throw IntegrityError("link to unknown patent " + l.patent_id);
    if (!ri) throw IntegrityError("link to unknown record " + l.record_id);
    const auto& p = corpus.patents[*pi];
    const auto& r = corpus.records[*ri];
    if (!in_range(p.filing_year, scope.filing_from, scope.filing_to)) continue;
    if (scope.granted_before && !(p.grant_year && *p.grant_year < *scope.granted_before)) continue;
    if (scope.citable_only && !is_citable(r.doc_type)) continue;
    if (scope.window && !in_window(r.pub_year, p.filing_year, *scope.window)) continue;
    if (!seen.insert({*pi, *ri}).second) continue;
    out.push_back({&p, &r});
  }
  return out;
}

// ---- sectors ---------------------------------------------------------------

std::vector<SectorRow> derive_sector_rows(const std::vector<SectorCounts>& sectors,
                                          const SectorCounts& unique_papers) {
  SectorCounts total{kAssignmentsTotal, 0, 0, 0};
  for (const auto& s : sectors) {
    total.papers += s.papers;
    total.citations += s.citations;
    total.papers_cited += s.papers_cited;
  }
  auto row = [&](const SectorCounts& s, bool shares) {
    SectorRow r;
    r.sector = s.sector;
    r.papers = s.papers;
    r.citations = s.citations;
    r.papers_cited = s.papers_cited;
    if (shares) {
      r.papers_share = percent(d(s.papers), d(total.papers));
      r.citations_share = percent(d(s.citations), d(total.citations));
      r.papers_cited_share = percent(d(s.papers_cited), d(total.papers_cited));
    }
    r.pct_papers_cited = percent(d(s.papers_cited), d(s.papers));
    return r;
  };
  std::vector<SectorRow> rows;
  for (const auto& s : sectors) rows.push_back(row(s, true));
  rows.push_back(row(total, true));
  auto unique = unique_papers;
  unique.sector = kUniqueTotal;
  rows.push_back(row(unique, false));
  return rows;
}

std::vector<SectorRow> sector_breakdown(const Corpus& corpus, const std::vector<CitationLink>& links,
                                        const SectorOptions& opts) {
  std::unordered_map<const BibRecord*, long long> cites;
  for (const auto& c : scoped_citations(corpus, links, opts.scope)) ++cites[c.record];

  std::map<std::string, SectorCounts> by_sector;
  SectorCounts unique;
  for (const auto& r : corpus.records) {
    if (r.sector_ids.empty() || !in_range(r.pub_year, opts.pub_from, opts.pub_to)) continue;
    if (opts.scope.citable_only && !is_citable(r.doc_type)) continue;
    auto it = cites.find(&r);
    long long c = it == cites.end() ? 0 : it->second;
    for (const auto& s : r.sector_ids) {
      auto& sc = by_sector[s];
      sc.sector = s;
      ++sc.papers;
      sc.citations += c;
      sc.papers_cited += c > 0;
    }
    ++unique.papers;
    unique.citations += c;
    unique.papers_cited += c > 0;
  }
  std::vector<SectorCounts> sectors;
  for (auto& [_, s] : by_sector) sectors.push_back(s);
  return derive_sector_rows(sectors, unique);
}

// ---- trend -----------------------------------------------------------------

TrendRow derive_trend_row(const TrendCounts& c) {
  TrendRow r;
  r.year = c.year;
  r.journals_with_docs = c.journals_with_docs;
  r.journals_cited = c.journals_cited;
  r.pct_journals_cited = percent(d(c.journals_cited), d(c.journals_with_docs));
  r.citable_docs = c.citable_docs;
  r.docs_cited = c.docs_cited;
  r.pct_docs_cited = percent(d(c.docs_cited), d(c.citable_docs));
  r.patent_citations = c.patent_citations;
  r.citations_per_doc = ratio(d(c.patent_citations), d(c.citable_docs));
  r.citing_families = c.citing_families;
  r.families_per_doc = ratio(d(c.citing_families), d(c.citable_docs));
  return r;
}

TrendCounts trend_counts(int year, const Corpus& corpus, const std::vector<CitationLink>& links,
                         const TrendOptions& opts) {
  TrendCounts c;
  c.year = year;
  std::set<std::string_view> journals;
  for (const auto& r : corpus.records) {
    if (!is_citable(r.doc_type) || !in_window(r.pub_year, year, opts.window)) continue;
    ++c.citable_docs;
    journals.insert(r.source_id);
  }
  c.journals_with_docs = static_cast<long long>(journals.size());

  CitationScope scope;
  scope.filing_from = scope.filing_to = year;
  scope.window = opts.window;
  scope.granted_before = opts.granted_before;
  std::set<const BibRecord*> cited;
  std::set<std::pair<const BibRecord*, std::string_view>> doc_families;
  std::set<std::string_view> cited_journals;
  for (const auto& ct : scoped_citations(corpus, links, scope)) {
    ++c.patent_citations;
    cited.insert(ct.record);
    doc_families.insert({ct.record, ct.patent->family_id});
    cited_journals.insert(ct.record->source_id);
  }
  c.docs_cited = static_cast<long long>(cited.size());
  c.citing_families = static_cast<long long>(doc_families.size());
  c.journals_cited = static_cast<long long>(cited_journals.size());
  return c;
}

std::vector<TrendRow> annual_trend(const Corpus& corpus, const std::vector<CitationLink>& links,
                                   const std::vector<int>& years, const TrendOptions& opts) {
  std::vector<TrendRow> rows;
  for (int y : years) rows.push_back(derive_trend_row(trend_counts(y, corpus, links, opts)));
  return rows;
}

// ---- journals --------------------------------------------------------------

JournalMetrics derive_journal_metrics(const JournalCounts& c) {
  JournalMetrics m;
  m.source_id = c.source_id;
  m.source_title = c.source_title;
  m.anchor_year = c.anchor_year;
  m.n_citable_docs = c.n_citable_docs;
  m.n_docs_cited = c.n_docs_cited;
  m.pct_docs_cited = percent(d(c.n_docs_cited), d(c.n_citable_docs));
  m.patent_jif_5y = ratio(d(c.patent_citations), d(c.n_citable_docs));
  m.family_jif_5y = ratio(d(c.citing_families), d(c.n_citable_docs));
  m.paper_jif_3y = ratio(d(c.paper_citations), d(c.n_citable_docs_paper_window));
  m.patent_citations = c.patent_citations;
  m.citing_families = c.citing_families;
  m.paper_citations = c.paper_citations;
  return m;
}

namespace {

// Counts keyed by (category, source); the category is "" when the caller
// does not split by category.
using JournalKey = std::pair<std::string, std::string>;

std::map<JournalKey, JournalCounts> journal_counts(int year, const Corpus& corpus,
                                                   const std::vector<CitationLink>& links,
                                                   const JournalOptions& opts, bool per_category) {
  std::map<JournalKey, JournalCounts> out;
  auto keys_of = [&](const BibRecord& r) {
    std::vector<JournalKey> ks;
    if (per_category) {
      for (const auto& c : r.category_ids) ks.push_back({c, r.source_id});
    } else if (!opts.category || r.category_ids.count(*opts.category)) {
      ks.push_back({"", r.source_id});
    }
    return ks;
  };
  auto slot = [&](const JournalKey& k, const BibRecord& r) -> JournalCounts& {
    auto& c = out[k];
    if (c.source_id.empty()) {
      c.source_id = r.source_id;
      c.source_title = r.source_title;
      c.anchor_year = year;
    }
    return c;
  };

  for (const auto& r : corpus.records) {
    for (const auto& k : keys_of(r)) {
      auto& c = slot(k, r);
      if (!is_citable(r.doc_type)) continue;
      if (in_window(r.pub_year, year, opts.patent_window)) ++c.n_citable_docs;
      if (in_window(r.pub_year, year, opts.paper_window)) ++c.n_citable_docs_paper_window;
    }
  }

  CitationScope scope;
  scope.filing_from = scope.filing_to = year;
  scope.window = opts.patent_window;
  scope.granted_before = opts.granted_before;
  std::set<std::pair<JournalKey, const BibRecord*>> cited;
  std::set<std::tuple<JournalKey, const BibRecord*, std::string_view>> fams;
  for (const auto& ct : scoped_citations(corpus, links, scope)) {
    for (const auto& k : keys_of(*ct.record)) {
      auto& c = slot(k, *ct.record);
      ++c.patent_citations;
      if (cited.insert({k, ct.record}).second) ++c.n_docs_cited;
      if (fams.insert({k, ct.record, ct.patent->family_id}).second) ++c.citing_families;
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : corpus.paper_cites) {
    auto ci = corpus.record_index(e.citing_record_id);
    auto di = corpus.record_index(e.cited_record_id);
    if (!ci || !di) continue;
    const auto& citing = corpus.records[*ci];
    const auto& cited_rec = corpus.records[*di];
    if (citing.pub_year != year || !is_citable(cited_rec.doc_type)) continue;
    if (!in_window(cited_rec.pub_year, year, opts.paper_window)) continue;
    if (!edges.insert({*ci, *di}).second) continue;
    for (const auto& k : keys_of(cited_rec)) ++slot(k, cited_rec).paper_citations;
  }
  return out;
}

}  // namespace

std::vector<JournalMetrics> journal_metrics_all(int anchor_year, const Corpus& corpus,
                                                const std::vector<CitationLink>& links,
                                                const JournalOptions& opts) {
  std::vector<JournalMetrics> out;
  for (const auto& [_, c] : journal_counts(anchor_year, corpus, links, opts, false))
    out.push_back(derive_journal_metrics(c));
  return out;
}

JournalMetrics journal_metrics(const std::string& source_id, int anchor_year, const Corpus& corpus,
                               const std::vector<CitationLink>& links, const JournalOptions& opts) {
  bool known = std::any_of(corpus.records.begin(), corpus.records.end(),
                           [&](const BibRecord& r) { return r.source_id == source_id; });
  if (!known) throw std::invalid_argument("unknown source_id " + source_id);
  for (auto& m : journal_metrics_all(anchor_year, corpus, links, opts))
    if (m.source_id == source_id) return m;
  // Known source but filtered out by the category restriction.
  JournalCounts empty;
  empty.source_id = source_id;
  empty.anchor_year = anchor_year;
  return derive_journal_metrics(empty);
}

std::vector<JournalMetrics> top_journals(std::vector<JournalMetrics> metrics, std::size_t k, RankKey key,
                                         long long min_docs) {
  auto value = [key](const JournalMetrics& m) {
    return key == RankKey::pct_docs_cited ? m.pct_docs_cited : m.patent_jif_5y;
  };
  std::erase_if(metrics, [&](const JournalMetrics& m) { return m.n_citable_docs < min_docs || !value(m); });
  std::sort(metrics.begin(), metrics.end(), [&](const JournalMetrics& a, const JournalMetrics& b) {
    if (*value(a) != *value(b)) return *value(a) > *value(b);
    if (a.n_citable_docs != b.n_citable_docs) return a.n_citable_docs > b.n_citable_docs;
    return a.source_id < b.source_id;
  });
  if (metrics.size() > k) metrics.resize(k);
  return metrics;
}

// ---- categories ------------------------------------------------------------

Ratio r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy * sxy / (sxx * syy);
}

CategoryFit category_means(int anchor_year, const Corpus& corpus, const std::vector<CitationLink>& links,
                           const CategoryOptions& opts) {
  auto counts = journal_counts(anchor_year, corpus, links, opts.journal, true);
  // Categories per journal, for fractional weights.
  std::map<std::string, int> n_categories;
  for (const auto& [key, c] : counts)
    if (c.n_citable_docs > 0) ++n_categories[key.second];

  struct Acc {
    std::size_t journals = 0;
    double w_paper = 0, paper = 0, w = 0, patent = 0, family = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& [key, c] : counts) {
    auto& a = acc[key.first];
    auto m = derive_journal_metrics(c);
    double w = opts.fractional && n_categories.count(key.second) ? 1.0 / n_categories[key.second] : 1.0;
    if (m.patent_jif_5y) {
      ++a.journals;
      a.w += w;
      a.patent += w * *m.patent_jif_5y;
      a.family += w * *m.family_jif_5y;
    }
    if (m.paper_jif_3y) {
      a.w_paper += w;
      a.paper += w * *m.paper_jif_3y;
    }
  }
  CategoryFit fit;
  std::vector<double> xs, ys;
  for (const auto& [cat, a] : acc) {
    CategoryMeans cm;
    cm.category_id = cat;
    cm.n_journals = a.journals;
    cm.mean_paper_jif = ratio(a.paper, a.w_paper);
    cm.mean_patent_jif = ratio(a.patent, a.w);
    cm.mean_family_jif = ratio(a.family, a.w);
    if (cm.mean_patent_jif) {
      xs.push_back(*cm.mean_patent_jif);
      ys.push_back(*cm.mean_family_jif);
    }
    fit.categories.push_back(std::move(cm));
  }
  fit.r_squared = r_squared(xs, ys);
  return fit;
}

std::set<std::string> proceedings_sources(const Corpus& corpus) {
  std::map<std::string, bool> all_conf;
  for (const auto& r : corpus.records) {
    auto [it, fresh] = all_conf.emplace(r.source_id, true);
    it->second = it->second && r.doc_type == DocType::conference_paper;
  }
  std::set<std::string> out;
  for (const auto& [s, conf] : all_conf)
    if (conf) out.insert(s);
  return out;
}

std::vector<CategoryTopCited> category_top_cited(int anchor_year, const Corpus& corpus,
                                                 const std::vector<CitationLink>& links,
                                                 std::size_t shortlist_len, int window,
                                                 std::optional<int> granted_before) {
  std::map<std::string, CategoryTopCited> cats;
  std::map<std::string, std::map<std::string, ShortlistEntry>> per_source;
  for (const auto& r : corpus.records)
    for (const auto& c : r.category_ids) cats[c].category_id = c;

  CitationScope scope;
  scope.filing_from = scope.filing_to = anchor_year;
  scope.window = window;
  scope.granted_before = granted_before;
  for (const auto& ct : scoped_citations(corpus, links, scope)) {
    for (const auto& c : ct.record->category_ids) {
      ++cats[c].total_patent_citations;
      auto& e = per_source[c][ct.record->source_id];
      e.source_id = ct.record->source_id;
      e.source_title = ct.record->source_title;
      ++e.patent_citations;
    }
  }
  auto proceedings = proceedings_sources(corpus);
  std::vector<CategoryTopCited> out;
  for (auto& [c, row] : cats) {
    std::vector<ShortlistEntry> list;
    for (const auto& [s, e] : per_source[c])
      if (!proceedings.count(s)) list.push_back(e);
    std::sort(list.begin(), list.end(), [](const ShortlistEntry& a, const ShortlistEntry& b) {
      return a.patent_citations != b.patent_citations ? a.patent_citations > b.patent_citations
                                                      : a.source_id < b.source_id;
    });
    if (list.size() > shortlist_len) list.resize(shortlist_len);
    row.shortlist = std::move(list);
    out.push_back(std::move(row));
  }
  return out;
}

// ---- terms and assignees ---------------------------------------------------

namespace {

std::vector<TermCount> sorted_counts(const std::map<std::string, long long>& counts) {
  std::vector<TermCount> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const TermCount& a, const TermCount& b) { return a.second > b.second; });
  return out;
}

}  // namespace

std::vector<TermCount> term_profile(const std::vector<std::string>& titles, const StopwordSet& stopwords) {
  std::map<std::string, long long> counts;
  for (const auto& t : titles) {
    std::istringstream in(normalize_text(t));
    for (std::string w; in >> w;)
      if (!stopwords.count(w)) ++counts[w];
  }
  return sorted_counts(counts);
}

std::vector<std::string> category_titles(const std::set<std::string>& category_ids, const Corpus& corpus,
                                         const std::vector<CitationLink>& links, const CitationScope& scope,
                                         TitleSide side) {
  std::map<std::string, std::string> by_id;
  for (const auto& ct : scoped_citations(corpus, links, scope)) {
    const auto& cats = ct.record->category_ids;
    if (std::none_of(cats.begin(), cats.end(), [&](const std::string& c) { return category_ids.count(c); }))
      continue;
    if (side == TitleSide::citing_patents) {
      by_id.emplace(ct.patent->patent_id, ct.patent->title);
    } else {
      by_id.emplace(ct.record->record_id, ct.record->title);
    }
  }
  std::vector<std::string> out;
  for (auto& [_, t] : by_id) out.push_back(std::move(t));
  return out;
}

std::string normalize_assignee(std::string_view name) {
  std::string kept;
  for (char c : name)
    if (!std::ispunct(static_cast<unsigned char>(c))) kept += c;
  return normalize_text(kept);
}

std::vector<TermCount> assignee_counts(const std::set<std::string>& category_ids, const Corpus& corpus,
                                       const std::vector<CitationLink>& links, const CitationScope& scope) {
  std::set<const Patent*> patents;
  for (const auto& ct : scoped_citations(corpus, links, scope)) {
    const auto& cats = ct.record->category_ids;
    if (std::any_of(cats.begin(), cats.end(), [&](const std::string& c) { return category_ids.count(c); }))
      patents.insert(ct.patent);
  }
  std::map<std::string, long long> counts;
  for (const auto* p : patents) {
    std::set<std::string> names;
    for (const auto& a : p->assignees) {
      auto n = normalize_assignee(a);
      if (!n.empty()) names.insert(n);
    }
    for (const auto& n : names) ++counts[n];
  }
  return sorted_counts(counts);
}

// ---- output ----------------------------------------------------------------

std::string format_fixed(const Ratio& v, int decimals) {
  if (!v) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

template <class... Ts>
void csv_row(std::ostream& out, const Ts&... fields) {
  bool first = true;
  auto put = [&](const auto& f) {
    if (!first) out << ',';
    first = false;
    if constexpr (std::is_convertible_v<decltype(f), std::string>) {
      out << csv_field(f);
    } else {
      out << f;
    }
  };
  (put(fields), ...);
  out << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SectorRow>& rows) {
  csv_row(out, "sector", "papers", "papers_share", "citations", "citations_share", "papers_cited",
          "papers_cited_share", "pct_papers_cited");
  for (const auto& r : rows)
    csv_row(out, r.sector, r.papers, format_fixed(r.papers_share, 1), r.citations,
            format_fixed(r.citations_share, 1), r.papers_cited, format_fixed(r.papers_cited_share, 1),
            format_fixed(r.pct_papers_cited, 1));
}

void write_csv(std::ostream& out, const std::vector<TrendRow>& rows) {
  csv_row(out, "year", "journals_with_docs", "journals_cited", "pct_journals_cited", "citable_docs", "docs_cited",
          "pct_docs_cited", "patent_citations", "citations_per_doc", "citing_families", "families_per_doc");
  for (const auto& r : rows)
    csv_row(out, r.year, r.journals_with_docs, r.journals_cited, format_fixed(r.pct_journals_cited, 1),
            r.citable_docs, r.docs_cited, format_fixed(r.pct_docs_cited, 2), r.patent_citations,
            format_fixed(r.citations_per_doc, 3), r.citing_families, format_fixed(r.families_per_doc, 3));
}

void write_csv(std::ostream& out, const std::vector<JournalMetrics>& rows) {
  csv_row(out, "source_id", "source_title", "anchor_year", "n_citable_docs", "n_docs_cited", "pct_docs_cited",
          "patent_jif_5y", "family_jif_5y", "paper_jif_3y", "patent_citations", "citing_families",
          "paper_citations");
  for (const auto& m : rows)
    csv_row(out, m.source_id, m.source_title, m.anchor_year, m.n_citable_docs, m.n_docs_cited,
            format_fixed(m.pct_docs_cited, 1), format_fixed(m.patent_jif_5y, 2), format_fixed(m.family_jif_5y, 2),
            format_fixed(m.paper_jif_3y, 1), m.patent_citations, m.citing_families, m.paper_citations);
}

void write_csv(std::ostream& out, const CategoryFit& fit) {
  csv_row(out, "category_id", "n_journals", "mean_paper_jif", "mean_patent_jif", "mean_family_jif", "r_squared");
  auto r2 = format_fixed(fit.r_squared, 3);
  for (const auto& c : fit.categories)
    csv_row(out, c.category_id, c.n_journals, format_fixed(c.mean_paper_jif, 3), format_fixed(c.mean_patent_jif, 3),
            format_fixed(c.mean_family_jif, 3), r2);
}

void write_csv(std::ostream& out, const std::vector<CategoryTopCited>& rows) {
  csv_row(out, "category_id", "total_patent_citations", "rank", "source_id", "source_title", "patent_citations");
  for (const auto& c : rows) {
    if (c.shortlist.empty()) csv_row(out, c.category_id, c.total_patent_citations, "", "", "", "");
    for (std::size_t i = 0; i < c.shortlist.size(); ++i) {
      const auto& e = c.shortlist[i];
      csv_row(out, c.category_id, c.total_patent_citations, i + 1, e.source_id, e.source_title,
              e.patent_citations);
    }
  }
}

void write_csv(std::ostream& out, const std::vector<TermCount>& rows, const std::string& key_column) {
  csv_row(out, key_column, "count");
  for (const auto& [k, n] : rows) csv_row(out, k, n);
}

}  // namespace patlink
