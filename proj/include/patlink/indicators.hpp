#pragma once

// Citation statistics over final links. Each report has a counts struct and
// a derivation step that fills the ratio columns, so tables can be rebuilt
// from published counts as well as from a corpus. Ratios with a zero
// denominator are std::nullopt, never 0.

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/family.hpp"
#include "patlink/normalize.hpp"

namespace patlink {

using Ratio = std::optional<double>;

Ratio ratio(double num, double den);
Ratio percent(double num, double den);

/// Which (patent, record) citations count.
struct CitationScope {
  std::optional<int> filing_from;  // patent filing year bounds, inclusive
  std::optional<int> filing_to;
  /// Cited publication year must lie in [filing - window, filing - 1].
  std::optional<int> window;
  /// Only patents with grant_year < granted_before.
  std::optional<int> granted_before;
  bool citable_only = true;
};

/// Distinct (patent, record) citations in scope, with the patent and record
/// resolved. Links to unknown patents or records throw IntegrityError.
struct Citation {
  const Patent* patent;
  const BibRecord* record;
};
std::vector<Citation> scoped_citations(const Corpus& corpus, const std::vector<CitationLink>& links,
                                       const CitationScope& scope);

// ---- sectors ---------------------------------------------------------------

struct SectorCounts {
  std::string sector;
  long long papers = 0;
  long long citations = 0;
  long long papers_cited = 0;
};

struct SectorRow {
  std::string sector;
  long long papers = 0;
  Ratio papers_share;  // % of the assignments total
  long long citations = 0;
  Ratio citations_share;
  long long papers_cited = 0;
  Ratio papers_cited_share;
  Ratio pct_papers_cited;
};

inline const std::string kAssignmentsTotal = "total_paper_sector_assignments";
inline const std::string kUniqueTotal = "total_unique_papers";

/// Rows per sector, then the assignments total (column sums) and the
/// unique-papers total.
std::vector<SectorRow> derive_sector_rows(const std::vector<SectorCounts>& sectors,
                                          const SectorCounts& unique_papers);

struct SectorOptions {
  std::optional<int> pub_from;  // paper publication years, inclusive
  std::optional<int> pub_to;
  CitationScope scope;  // window unset = all-years mode
};

/// Papers carrying at least one sector, counted once per sector and once in
/// the unique total.
std::vector<SectorRow> sector_breakdown(const Corpus& corpus, const std::vector<CitationLink>& links,
                                        const SectorOptions& opts);

// ---- annual trend ----------------------------------------------------------

struct TrendCounts {
  int year = 0;
  long long journals_with_docs = 0;
  long long journals_cited = 0;
  long long citable_docs = 0;
  long long docs_cited = 0;
  long long patent_citations = 0;
  long long citing_families = 0;  // distinct families per doc, summed
};

struct TrendRow {
  int year = 0;
  long long journals_with_docs = 0;
  long long journals_cited = 0;
  Ratio pct_journals_cited;
  long long citable_docs = 0;
  long long docs_cited = 0;
  Ratio pct_docs_cited;
  long long patent_citations = 0;
  Ratio citations_per_doc;
  long long citing_families = 0;
  Ratio families_per_doc;
};

TrendRow derive_trend_row(const TrendCounts& c);

struct TrendOptions {
  int window = 5;
  std::optional<int> granted_before;
};

TrendCounts trend_counts(int year, const Corpus& corpus, const std::vector<CitationLink>& links,
                         const TrendOptions& opts = {});
std::vector<TrendRow> annual_trend(const Corpus& corpus, const std::vector<CitationLink>& links,
                                   const std::vector<int>& years, const TrendOptions& opts = {});

// ---- journals --------------------------------------------------------------

struct JournalCounts {
  std::string source_id;
  std::string source_title;
  int anchor_year = 0;
  long long n_citable_docs = 0;  // patent window
  long long n_docs_cited = 0;
  long long patent_citations = 0;
  long long citing_families = 0;
  long long n_citable_docs_paper_window = 0;
  long long paper_citations = 0;
};

struct JournalMetrics {
  std::string source_id;
  std::string source_title;
  int anchor_year = 0;
  long long n_citable_docs = 0;
  long long n_docs_cited = 0;
  Ratio pct_docs_cited;
  Ratio patent_jif_5y;
  Ratio family_jif_5y;
  Ratio paper_jif_3y;
  long long patent_citations = 0;
  long long citing_families = 0;
  long long paper_citations = 0;
};

JournalMetrics derive_journal_metrics(const JournalCounts& c);

struct JournalOptions {
  int patent_window = 5;
  int paper_window = 3;
  std::optional<int> granted_before;
  /// Restrict documents to this category (used per category); empty = all.
  std::optional<std::string> category;
};

/// Metrics for every source in the corpus, by source_id.
std::vector<JournalMetrics> journal_metrics_all(int anchor_year, const Corpus& corpus,
                                                const std::vector<CitationLink>& links,
                                                const JournalOptions& opts = {});
/// Throws std::invalid_argument for an unknown source.
JournalMetrics journal_metrics(const std::string& source_id, int anchor_year, const Corpus& corpus,
                               const std::vector<CitationLink>& links, const JournalOptions& opts = {});

enum class RankKey { pct_docs_cited, patent_jif_5y };

std::vector<JournalMetrics> top_journals(std::vector<JournalMetrics> metrics, std::size_t k, RankKey key,
                                         long long min_docs = 50);

// ---- categories ------------------------------------------------------------

struct CategoryMeans {
  std::string category_id;
  std::size_t n_journals = 0;
  Ratio mean_paper_jif;
  Ratio mean_patent_jif;
  Ratio mean_family_jif;
};

struct CategoryFit {
  std::vector<CategoryMeans> categories;
  /// Least-squares fit of mean family rate on mean patent rate.
  Ratio r_squared;
};

/// R² of the ordinary least-squares line through (x, y); absent for fewer
/// than two points or zero variance.
Ratio r_squared(const std::vector<double>& x, const std::vector<double>& y);

struct CategoryOptions {
  JournalOptions journal;
  /// Journals in k categories count 1/k toward each category's mean.
  bool fractional = false;
};

CategoryFit category_means(int anchor_year, const Corpus& corpus, const std::vector<CitationLink>& links,
                           const CategoryOptions& opts = {});

struct ShortlistEntry {
  std::string source_id;
  std::string source_title;
  long long patent_citations = 0;
};

struct CategoryTopCited {
  std::string category_id;
  long long total_patent_citations = 0;
  std::vector<ShortlistEntry> shortlist;
};

/// A source is a proceedings source when every one of its records is a
/// conference paper.
std::set<std::string> proceedings_sources(const Corpus& corpus);

/// Per category: windowed patent citations in the anchor year over all
/// sources, and the most cited non-proceedings journals.
std::vector<CategoryTopCited> category_top_cited(int anchor_year, const Corpus& corpus,
                                                 const std::vector<CitationLink>& links,
                                                 std::size_t shortlist_len = 3, int window = 5,
                                                 std::optional<int> granted_before = std::nullopt);

// ---- terms and assignees ---------------------------------------------------

using TermCount = std::pair<std::string, long long>;

/// Normalize, split, drop stopwords, count; sorted by descending count then
/// term.
std::vector<TermCount> term_profile(const std::vector<std::string>& titles, const StopwordSet& stopwords);

enum class TitleSide { citing_patents, cited_papers };

/// Titles of distinct patents (or records) joined by an in-scope citation to
/// a record in any of the categories.
std::vector<std::string> category_titles(const std::set<std::string>& category_ids, const Corpus& corpus,
                                         const std::vector<CitationLink>& links, const CitationScope& scope,
                                         TitleSide side);

/// Case-folded, punctuation removed ("I.B.M." -> "ibm").
std::string normalize_assignee(std::string_view name);

/// Distinct citing patents per normalized assignee, among patents holding an
/// in-scope citation to a record in the categories.
std::vector<TermCount> assignee_counts(const std::set<std::string>& category_ids, const Corpus& corpus,
                                       const std::vector<CitationLink>& links, const CitationScope& scope = {});

// ---- output ----------------------------------------------------------------

/// Fixed-point text, empty for an absent value.
std::string format_fixed(const Ratio& v, int decimals);

void write_csv(std::ostream& out, const std::vector<SectorRow>& rows);
void write_csv(std::ostream& out, const std::vector<TrendRow>& rows);
void write_csv(std::ostream& out, const std::vector<JournalMetrics>& rows);
void write_csv(std::ostream& out, const CategoryFit& fit);
void write_csv(std::ostream& out, const std::vector<CategoryTopCited>& rows);
/// Two columns named by `key_column` and "count".
void write_csv(std::ostream& out, const std::vector<TermCount>& rows, const std::string& key_column);

}  // namespace patlink
