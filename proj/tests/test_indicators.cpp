#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "patlink/indicators.hpp"
#include "reconstructed.hpp"

using namespace patlink;
using namespace patlink::test;

namespace {

const SectorRow& row_named(const std::vector<SectorRow>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.sector == name) return r;
  throw std::runtime_error("no row " + name);
}

const CategoryMeans& category_named(const CategoryFit& fit, const std::string& name) {
  for (const auto& c : fit.categories)
    if (c.category_id == name) return c;
  throw std::runtime_error("no category " + name);
}

}  // namespace

TEST_CASE("ratio and percent are absent on a zero denominator") {
  CHECK_FALSE(ratio(3, 0).has_value());
  CHECK(*ratio(5, 10) == doctest::Approx(0.5));
  CHECK(*percent(1, 4) == doctest::Approx(25.0));
  CHECK(format_fixed(std::nullopt, 2).empty());
  CHECK(format_fixed(0.06538, 3) == "0.065");
}

TEST_CASE("scoped citations count each patent-record pair once") {
  Corpus c;
  c.records = {make_record("r1", "J", 2010), make_record("r2", "J", 2004), make_record("r3", "J", 2010, DocType::other)};
  auto p = make_patent("p1", "f1", 2012, 2014);
  auto q = make_patent("p2", "f2", 2012, 2019);
  c.patents = {p, q};
  c.reindex();
  std::vector<CitationLink> links = {direct_link(p, "r1"), direct_link(p, "r1"), direct_link(p, "r2"),
                                     direct_link(p, "r3"), direct_link(q, "r1")};
  CHECK(scoped_citations(c, links, {}).size() == 3);
  CitationScope s;
  s.window = 5;
  CHECK(scoped_citations(c, links, s).size() == 2);
  s.granted_before = 2018;
  CHECK(scoped_citations(c, links, s).size() == 1);
  links.push_back({"ghost", "f9", "r1", LinkOrigin::direct, 1.0, ""});
  CHECK_THROWS_AS(scoped_citations(c, links, {}), IntegrityError);
}

TEST_CASE("sector breakdown: single-sector paper without links") {
  Corpus c;
  auto r = make_record("r1", "J", 2010);
  r.sector_ids = {"private"};
  c.records = {r};
  c.reindex();
  auto rows = sector_breakdown(c, {}, {});
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.papers == 1);
    CHECK(*row.pct_papers_cited == 0.0);
  }
  const auto& total = row_named(rows, kAssignmentsTotal);
  const auto& unique = row_named(rows, kUniqueTotal);
  CHECK(total.papers == unique.papers);
  CHECK(total.citations == unique.citations);
}

TEST_CASE("sector breakdown counts multi-sector papers once per sector and once in the unique row") {
  Corpus c;
  auto a = make_record("a", "J", 2010);
  a.sector_ids = {"higher_education", "private"};
  auto b = make_record("b", "J", 2011);
  b.sector_ids = {"private"};
  auto none = make_record("n", "J", 2011);
  c.records = {a, b, none};
  auto p = make_patent("p", "f", 2012);
  auto q = make_patent("q", "g", 2013);
  c.patents = {p, q};
  c.reindex();
  auto rows = sector_breakdown(c, {direct_link(p, "a"), direct_link(q, "a"), direct_link(q, "n")}, {});
  const auto& priv = row_named(rows, "private");
  CHECK(priv.papers == 2);
  CHECK(priv.citations == 2);
  CHECK(priv.papers_cited == 1);
  CHECK(*priv.pct_papers_cited == doctest::Approx(50.0));
  const auto& total = row_named(rows, kAssignmentsTotal);
  CHECK(total.papers == 3);
  CHECK(total.citations == 4);
  CHECK(*total.papers_share == doctest::Approx(100.0));
  const auto& unique = row_named(rows, kUniqueTotal);
  CHECK(unique.papers == 2);
  CHECK(unique.citations == 2);
  CHECK_FALSE(unique.papers_share.has_value());

  SectorOptions bounded;
  bounded.pub_from = 2011;
  CHECK(row_named(sector_breakdown(c, {}, bounded), kUniqueTotal).papers == 1);
}

TEST_CASE("published sector counts give the published percentages") {
  std::vector<SectorCounts> sectors = {
      {"higher_education", 18534000, 4129000, 527000}, {"government", 4137000, 930000, 134000},
      {"health", 3565000, 1811000, 150000},           {"private", 719000, 854000, 57000},
      {"other", 250000, 66000, 8000},
  };
  auto rows = derive_sector_rows(sectors, {"", 23511000, 5351000, 628000});
  CHECK(format_fixed(row_named(rows, "private").pct_papers_cited, 1) == "7.9");
  CHECK(format_fixed(row_named(rows, "health").pct_papers_cited, 1) == "4.2");
  CHECK(format_fixed(row_named(rows, "higher_education").pct_papers_cited, 1) == "2.8");
  CHECK(format_fixed(row_named(rows, "private").papers_share, 1) == "2.6");
  CHECK(format_fixed(row_named(rows, "private").citations_share, 1) == "11.0");
  const auto& total = row_named(rows, kAssignmentsTotal);
  CHECK(total.papers == 27205000);
  CHECK(format_fixed(total.pct_papers_cited, 1) == "3.2");
  CHECK(format_fixed(row_named(rows, kUniqueTotal).pct_papers_cited, 1) == "2.7");
}

TEST_CASE("published trend counts give the published ratios") {
  auto r = derive_trend_row({2012, 30094, 10305, 9783094, 197467, 639670, 278183});
  CHECK(format_fixed(r.pct_docs_cited, 2) == "2.02");
  CHECK(format_fixed(r.citations_per_doc, 3) == "0.065");
  CHECK(format_fixed(r.families_per_doc, 3) == "0.028");
  CHECK(format_fixed(r.pct_journals_cited, 1) == "34.2");
  auto r8 = derive_trend_row({2008, 23820, 8424, 7847445, 176321, 598989, 248725});
  CHECK(format_fixed(r8.pct_docs_cited, 2) == "2.25");
  CHECK(format_fixed(r8.pct_journals_cited, 1) == "35.4");
  CHECK(format_fixed(r8.citations_per_doc, 3) == "0.076");
  CHECK(format_fixed(r8.families_per_doc, 3) == "0.032");
}

TEST_CASE("trend counts on a corpus") {
  Corpus c;
  c.records = {make_record("a", "J1", 2008), make_record("b", "J1", 2011), make_record("c", "J2", 2010),
               make_record("d", "J3", 2006), make_record("e", "J2", 2009, DocType::other)};
  auto p1 = make_patent("p1", "f", 2012, 2014);
  auto p2 = make_patent("p2", "f", 2012, 2014);
  auto p3 = make_patent("p3", "g", 2012, 2019);
  c.patents = {p1, p2, p3};
  c.reindex();
  std::vector<CitationLink> links = {direct_link(p1, "a"), direct_link(p2, "a"), direct_link(p3, "a"),
                                     direct_link(p3, "b"), direct_link(p1, "d"), direct_link(p1, "e")};
  auto t = trend_counts(2012, c, links);
  CHECK(t.citable_docs == 3);
  CHECK(t.journals_with_docs == 2);
  CHECK(t.docs_cited == 2);
  CHECK(t.journals_cited == 1);
  CHECK(t.patent_citations == 4);
  CHECK(t.citing_families == 3);

  TrendOptions granted;
  granted.granted_before = 2018;
  auto g = trend_counts(2012, c, links, granted);
  CHECK(g.patent_citations == 2);
  CHECK(g.citing_families == 1);

  auto none = derive_trend_row(trend_counts(2012, c, {}));
  CHECK(*none.pct_docs_cited == 0.0);
  CHECK(*none.citations_per_doc == 0.0);
  CHECK(*none.families_per_doc == 0.0);
  CHECK(*none.pct_journals_cited == 0.0);
}

TEST_CASE("journal metrics ratio definitions") {
  Corpus c;
  for (int i = 0; i < 10; ++i) c.records.push_back(make_record(padded("j-", i), "J", 2009));
  c.records.push_back(make_record("old-0", "OLD", 1990));
  c.records.push_back(make_record("citing", "X", 2012));
  std::vector<Patent> ps;
  std::vector<CitationLink> links;
  for (int i = 0; i < 5; ++i) {
    ps.push_back(make_patent(padded("p-", i), "fam", 2012));
    links.push_back(direct_link(ps.back(), padded("j-", i % 2)));
  }
  c.patents = ps;
  c.paper_cites = {{"citing", "j-0000"}, {"citing", "j-0001"}};
  c.reindex();
  auto m = journal_metrics("J", 2012, c, links);
  CHECK(*m.patent_jif_5y == doctest::Approx(0.5));
  CHECK(*m.family_jif_5y == doctest::Approx(0.2));
  CHECK(*m.pct_docs_cited == doctest::Approx(20.0));
  CHECK(*m.paper_jif_3y == doctest::Approx(0.2));
  auto empty = journal_metrics("OLD", 2012, c, links);
  CHECK_FALSE(empty.patent_jif_5y.has_value());
  CHECK_FALSE(empty.pct_docs_cited.has_value());
  CHECK_THROWS_AS(journal_metrics("NOPE", 2012, c, links), std::invalid_argument);
}

TEST_CASE("top journals ordering, threshold and k") {
  auto make = [](std::string id, long long docs, double pct) {
    JournalMetrics m;
    m.source_id = std::move(id);
    m.n_citable_docs = docs;
    m.pct_docs_cited = pct;
    m.patent_jif_5y = pct / 10;
    return m;
  };
  std::vector<JournalMetrics> ms = {make("B", 100, 30), make("A", 100, 40), make("C", 10, 90)};
  auto top = top_journals(ms, 1, RankKey::pct_docs_cited);
  REQUIRE(top.size() == 1);
  CHECK(top[0].source_id == "A");
  CHECK(top_journals(ms, 10, RankKey::patent_jif_5y).size() == 2);
  CHECK(top_journals(ms, 10, RankKey::pct_docs_cited, 0).size() == 3);
  ms.push_back(make("D", 200, 40));
  CHECK(top_journals(ms, 1, RankKey::pct_docs_cited)[0].source_id == "D");
}

TEST_CASE("reconstructed Nature Biotechnology fixture") {
  auto lc = nature_biotech_fixture();
  JournalOptions opts;
  opts.granted_before = 2018;
  auto m = journal_metrics("NBT", 2012, lc.corpus, lc.links, opts);
  CHECK(m.n_citable_docs == 988);
  CHECK(m.patent_citations == 3804);
  CHECK(m.citing_families == 1314);
  CHECK(m.n_docs_cited == 305);
  CHECK(format_fixed(m.patent_jif_5y, 2) == "3.85");
  CHECK(format_fixed(m.family_jif_5y, 2) == "1.33");
  CHECK(format_fixed(m.pct_docs_cited, 1) == "30.9");
  CHECK(format_fixed(m.paper_jif_3y, 1) == "19.1");
}

TEST_CASE("r squared") {
  CHECK(*r_squared({1, 2, 3, 5}, {0.4, 0.8, 1.2, 2.0}) == doctest::Approx(1.0));
  CHECK_FALSE(r_squared({1}, {2}).has_value());
  CHECK_FALSE(r_squared({1, 1, 1}, {1, 2, 3}).has_value());
}

TEST_CASE("category means on the ten-category fixture") {
  auto lc = category_fit_fixture();
  auto fit = category_means(2012, lc.corpus, lc.links);
  REQUIRE(fit.categories.size() == 10);
  REQUIRE(fit.r_squared.has_value());
  CHECK(*fit.r_squared == doctest::Approx(0.9883085855966929).epsilon(1e-12));
  const auto& imm = category_named(fit, "immunology");
  CHECK(imm.n_journals == 2);
  CHECK(*imm.mean_patent_jif == doctest::Approx(0.69));
  CHECK(*imm.mean_family_jif == doctest::Approx(0.43));
  CHECK(*category_named(fit, "pharmacology").mean_patent_jif == doctest::Approx(50.0 / 60));
  CHECK(*category_named(fit, "biotech").mean_family_jif == doctest::Approx(45.0 / 70));
  CHECK(*category_named(fit, "education").mean_patent_jif == doctest::Approx(0.05));
  CHECK(*imm.mean_paper_jif == 0.0);
}

TEST_CASE("category means: exact proportionality and a single category") {
  Corpus c;
  std::vector<CitationLink> links;
  // Family rate 0.4 x patent rate: each doc cited by 5 patents from 2 families.
  for (int cat = 0; cat < 3; ++cat) {
    auto src = "S" + std::to_string(cat);
    int n = 10;
    for (int i = 0; i < n; ++i) c.records.push_back(make_record(padded(src + "-", i), src, 2010, DocType::article, {"c" + std::to_string(cat)}));
    int cited = cat + 1;
    for (int d = 0; d < cited; ++d) {
      for (int m = 0; m < 5; ++m) {
        auto p = make_patent(src + "-p" + std::to_string(d) + "-" + std::to_string(m),
                             src + "-f" + std::to_string(d) + "-" + std::to_string(m % 2), 2012);
        links.push_back(direct_link(p, padded(src + "-", d)));
        c.patents.push_back(p);
      }
    }
  }
  c.reindex();
  auto fit = category_means(2012, c, links);
  CHECK(*fit.r_squared == doctest::Approx(1.0));

  Corpus one;
  one.records = {make_record("r", "S", 2010, DocType::article, {"only"})};
  one.reindex();
  CHECK_FALSE(category_means(2012, one, {}).r_squared.has_value());
}

TEST_CASE("fractional category weights") {
  Corpus c;
  c.records = {make_record("a", "A", 2010, DocType::article, {"x", "y"}), make_record("b", "B", 2010, DocType::article, {"x"})};
  auto p = make_patent("p", "f", 2012);
  c.patents = {p};
  c.reindex();
  std::vector<CitationLink> links = {direct_link(p, "a")};
  CategoryOptions frac;
  frac.fractional = true;
  auto whole = category_means(2012, c, links);
  auto part = category_means(2012, c, links, frac);
  CHECK(*category_named(whole, "x").mean_patent_jif == doctest::Approx(0.5));
  CHECK(*category_named(part, "x").mean_patent_jif == doctest::Approx(1.0 / 3));
}

TEST_CASE("category top cited excludes proceedings from the shortlist only") {
  Corpus c;
  for (int i = 0; i < 10; ++i) c.records.push_back(make_record(padded("j-", i), "J", 2010, DocType::article, {"cat"}));
  for (int i = 0; i < 5; ++i) c.records.push_back(make_record(padded("pr-", i), "PR", 2010, DocType::conference_paper, {"cat"}));
  c.records.push_back(make_record("lonely", "L", 2010, DocType::article, {"empty"}));
  auto p = make_patent("p", "f", 2012);
  c.patents = {p};
  c.reindex();
  std::vector<CitationLink> links;
  for (int i = 0; i < 10; ++i) links.push_back(direct_link(p, padded("j-", i)));
  for (int i = 0; i < 5; ++i) links.push_back(direct_link(p, padded("pr-", i)));
  CHECK(proceedings_sources(c) == std::set<std::string>{"PR"});
  auto rows = category_top_cited(2012, c, links);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].category_id == "cat");
  CHECK(rows[0].total_patent_citations == 15);
  REQUIRE(rows[0].shortlist.size() == 1);
  CHECK(rows[0].shortlist[0].source_id == "J");
  CHECK(rows[1].total_patent_citations == 0);
  CHECK(rows[1].shortlist.empty());
}

TEST_CASE("reconstructed Library and Information Sciences fixture") {
  auto lc = lis_fixture();
  const std::string cat = "library_information_sciences";
  auto rows = category_top_cited(2012, lc.corpus, lc.links, 3, 5, 2018);
  const CategoryTopCited* lis = nullptr;
  for (const auto& r : rows)
    if (r.category_id == cat) lis = &r;
  REQUIRE(lis != nullptr);
  CHECK(lis->total_patent_citations == 613);
  REQUIRE(lis->shortlist.size() == 3);
  CHECK(lis->shortlist[0].source_title == "Journal of Chemical Information and Modeling");
  CHECK(lis->shortlist[0].patent_citations == 223);
  CHECK(lis->shortlist[1].patent_citations == 200);
  CHECK(lis->shortlist[2].source_id == "IPM");
  CHECK(lis->shortlist[2].patent_citations == 39);

  CitationScope scope;
  scope.filing_from = scope.filing_to = 2012;
  scope.window = 5;
  auto assignees = assignee_counts({cat}, lc.corpus, lc.links, scope);
  REQUIRE(assignees.size() >= 4);
  CHECK(assignees[0] == TermCount{"ibm", 13});
  CHECK(assignees[1] == TermCount{"palo alto res center xerox", 7});
  CHECK(assignees[2] == TermCount{"microsoft corporation", 6});
  CHECK(assignees[3] == TermCount{"thomson licensing", 5});
  for (std::size_t i = 4; i < assignees.size(); ++i) CHECK(assignees[i].second <= 4);

  auto titles = category_titles({cat}, lc.corpus, lc.links, scope, TitleSide::citing_patents);
  CHECK(titles.size() == 120);
  auto profile = term_profile(titles, default_stopwords());
  REQUIRE(profile.size() == 50);
  CHECK(profile[0] == TermCount{"method", 63});
  CHECK(profile[1] == TermCount{"system", 49});
  CHECK(profile[2] == TermCount{"techniques", 20});
  CHECK(profile[3] == TermCount{"learning", 19});
  CHECK(profile[4] == TermCount{"machine", 19});
  CHECK(profile[5] == TermCount{"apparatus", 18});
}

TEST_CASE("term profile") {
  auto p = term_profile({"METHOD AND SYSTEM FOR X", "SYSTEM FOR Y"}, {"and", "for"});
  CHECK(p == std::vector<TermCount>{{"system", 2}, {"method", 1}, {"x", 1}, {"y", 1}});
  CHECK(term_profile({}, {}).empty());
}

TEST_CASE("assignee counts are distinct patents") {
  CHECK(normalize_assignee("I.B.M.") == "ibm");
  CHECK(normalize_assignee("THOMSON LICENSING*") == "thomson licensing");
  Corpus c;
  c.records = {make_record("r", "J", 2010, DocType::article, {"cat"})};
  auto p = make_patent("p", "f", 2012, 2014, {"Acme Inc."});
  auto q = make_patent("q", "g", 2012, 2014, {"ACME INC"});
  c.patents = {p, q};
  c.reindex();
  std::vector<CitationLink> links = {direct_link(p, "r"), direct_link(q, "r")};
  CHECK(assignee_counts({"cat"}, c, links) == std::vector<TermCount>{{"acme inc", 2}});
  CHECK(assignee_counts({"cat"}, c, {}).empty());
}

TEST_CASE("csv output names the fields") {
  std::ostringstream out;
  write_csv(out, std::vector<TrendRow>{derive_trend_row({2012, 30094, 10305, 9783094, 197467, 639670, 278183})});
  auto text = out.str();
  CHECK(text.rfind("year,journals_with_docs,journals_cited,pct_journals_cited,", 0) == 0);
  CHECK(text.find("2012,30094,10305,34.2,9783094,197467,2.02,639670,0.065,278183,0.028") != std::string::npos);
  std::ostringstream terms;
  write_csv(terms, {{"a,b", 2}}, "term");
  CHECK(terms.str() == "term,count\n\"a,b\",2\n");
}
