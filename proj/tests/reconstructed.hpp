#pragma once

// Small corpora whose counts are chosen so that the indicator engine must
// return specific published ratios. Shared by unit and acceptance tests.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/family.hpp"
#include "test_support.hpp"

namespace patlink::test {

struct LinkedCorpus {
  Corpus corpus;
  std::vector<CitationLink> links;
};

inline std::string padded(const std::string& prefix, std::size_t i, int width = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return prefix + buf;
}

inline BibRecord make_record(const std::string& id, const std::string& source, int year,
                             DocType type = DocType::article, std::set<std::string> cats = {}) {
  BibRecord r;
  r.record_id = id;
  r.title = "document " + id;
  r.first_author_surname = "author";
  r.authors = {"Author A"};
  r.source_id = source;
  r.source_title = source + " journal";
  r.pub_year = year;
  r.doc_type = type;
  r.category_ids = std::move(cats);
  return r;
}

inline Patent make_patent(const std::string& id, const std::string& family, int filing,
                          std::optional<int> grant = std::nullopt, std::vector<std::string> assignees = {},
                          std::string title = "") {
  Patent p;
  p.patent_id = id;
  p.family_id = family;
  p.filing_year = filing;
  p.grant_year = grant ? grant : std::optional<int>(filing + 2);
  p.title = title.empty() ? "patent " + id : std::move(title);
  p.assignees = std::move(assignees);
  return p;
}

inline CitationLink direct_link(const Patent& p, const std::string& record_id) {
  return {p.patent_id, p.family_id, record_id, LinkOrigin::direct, 1.0, "ref-" + p.patent_id};
}

/// Nature Biotechnology, anchor 2012: 988 citable docs in 2007-2011, 3804
/// patent citations from 461 families (1314 family-doc pairs, 305 docs
/// cited) and 11307 paper citations to its 592 docs of 2009-2011.
inline LinkedCorpus nature_biotech_fixture() {
  LinkedCorpus lc;
  auto& c = lc.corpus;
  const std::string src = "NBT";
  std::vector<std::string> docs, paper_window_docs;
  for (std::size_t i = 0; i < 988; ++i) {
    auto r = make_record(padded("nbt-", i), src, 2007 + static_cast<int>(i % 5), DocType::article, {"biotech"});
    r.source_title = "Nature Biotechnology";
    docs.push_back(r.record_id);
    if (r.pub_year >= 2009) paper_window_docs.push_back(r.record_id);
    c.records.push_back(std::move(r));
  }
  // Non-citable items and an out-of-window article of the same journal.
  for (std::size_t i = 0; i < 40; ++i) {
    auto r = make_record(padded("nbt-x", i), src, 2010, DocType::other, {"biotech"});
    r.source_title = "Nature Biotechnology";
    c.records.push_back(std::move(r));
  }
  auto old = make_record("nbt-old", src, 2006, DocType::article, {"biotech"});
  old.source_title = "Nature Biotechnology";
  c.records.push_back(old);

  std::size_t pair = 0;
  auto add_family = [&](std::size_t fam, std::size_t members, std::size_t n_docs) {
    std::vector<Patent> ps;
    auto fid = padded("fam-", fam);
    for (std::size_t m = 0; m < members; ++m) ps.push_back(make_patent(fid + "-" + std::to_string(m), fid, 2012));
    for (std::size_t k = 0; k < n_docs; ++k) lc.links.push_back(direct_link(ps[0], docs[pair++ % 305]));
    for (auto& p : ps) c.patents.push_back(std::move(p));
  };
  std::size_t fam = 0;
  for (std::size_t i = 0; i < 392; ++i) add_family(fam++, 3, 3);
  for (std::size_t i = 0; i < 69; ++i) add_family(fam++, 2, 2);

  auto p2011 = make_patent("noise-2011", "noise-f1", 2011);
  auto p2012 = make_patent("noise-2012", "noise-f2", 2012);
  lc.links.push_back(direct_link(p2011, docs[500]));
  lc.links.push_back(direct_link(p2012, "nbt-old"));
  lc.links.push_back(direct_link(p2012, "nbt-x0000"));
  c.patents.push_back(p2011);
  c.patents.push_back(p2012);

  for (std::size_t i = 0; i < 300; ++i) c.records.push_back(make_record(padded("cite-", i), "CITING", 2012));
  for (std::size_t k = 0; k < 11307; ++k)
    c.paper_cites.push_back({padded("cite-", k % 300), paper_window_docs[k % paper_window_docs.size()]});

  c.reindex();
  lc.links = propagate(lc.links, c.patents);
  return lc;
}

inline std::vector<std::string> lis_patent_titles() {
  std::ifstream in(fixture("lis_patent_titles.txt"));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

/// Library and Information Sciences, anchor 2012: 613 windowed patent
/// citations (JCIM 223, IEEE TIT 200, proceedings 100, IPM 39, JA 30,
/// JB 21) from 120 patents; IBM holds 13 of them. Science is tagged with
/// the category but excluded by an override.
inline LinkedCorpus lis_fixture() {
  LinkedCorpus lc;
  auto& c = lc.corpus;
  const std::string cat = "library_information_sciences";
  struct Src {
    std::string id, title;
    long long cites;
    DocType type;
  };
  const std::vector<Src> sources = {
      {"JCIM", "Journal of Chemical Information and Modeling", 223, DocType::article},
      {"TIT", "IEEE Transactions on Information Theory", 200, DocType::article},
      {"PROC", "Proceedings of the Conference on Digital Libraries", 100, DocType::conference_paper},
      {"IPM", "Information Processing and Management", 39, DocType::article},
      {"JA", "Journal A of Documentation", 30, DocType::article},
      {"JB", "Journal B of Librarianship", 21, DocType::article},
  };
  const std::size_t n_docs = 101;

  auto titles = lis_patent_titles();
  std::vector<Patent> patents;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    std::vector<std::string> who;
    if (i < 13) {
      who = {i % 3 == 0 ? "IBM" : i % 3 == 1 ? "I.B.M." : "ibm"};
      if (i == 4) who.push_back("Siemens AG");
      if (i == 5) who.push_back("IBM");
    } else if (i < 20) {
      who = {"PALO ALTO RES. CENTER (Xerox)"};
    } else if (i < 26) {
      who = {"MICROSOFT CORPORATION"};
    } else if (i < 31) {
      who = {i % 2 ? "THOMSON LICENSING*" : "Thomson Licensing"};
    } else {
      who = {"Other Co " + std::to_string(i % 30)};
    }
    patents.push_back(make_patent(padded("lis-p", i), padded("lis-f", i), 2012, 2015, who, titles[i]));
  }

  std::size_t k = 0;
  for (const auto& s : sources) {
    for (std::size_t i = 0; i < n_docs; ++i) {
      auto r = make_record(padded(s.id + "-", i), s.id, 2007 + static_cast<int>(i % 5), s.type, {cat});
      r.source_title = s.title;
      c.records.push_back(std::move(r));
    }
    for (long long j = 0; j < s.cites; ++j, ++k)
      lc.links.push_back(direct_link(patents[k % patents.size()], padded(s.id + "-", static_cast<std::size_t>(j) % n_docs)));
  }

  // Science: tagged with the category, excluded by override.
  for (std::size_t i = 0; i < 20; ++i) {
    auto r = make_record(padded("SCI-", i), "SCI", 2010, DocType::article, {cat, "multidisciplinary"});
    r.source_title = "Science";
    c.records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    auto p = make_patent(padded("sci-p", i), padded("sci-f", i), 2012, 2014, {"IBM"}, "SCIENCE METHOD " + std::to_string(i));
    for (std::size_t j = 0; j < 5; ++j) lc.links.push_back(direct_link(p, padded("SCI-", i * 5 + j)));
    c.patents.push_back(std::move(p));
  }

  // Out of scope: an old document and a later filing.
  auto old = make_record("JCIM-old", "JCIM", 2005, DocType::article, {cat});
  old.source_title = "Journal of Chemical Information and Modeling";
  c.records.push_back(old);
  lc.links.push_back(direct_link(patents[0], "JCIM-old"));
  auto late = make_patent("lis-late", "lis-late-f", 2013, 2016, {"IBM"}, "METHOD OF LATE FILING");
  lc.links.push_back(direct_link(late, "TIT-0005"));
  c.patents.push_back(late);

  for (auto& p : patents) c.patents.push_back(std::move(p));
  c.overrides.push_back({"SCI", CategoryOverride::Action::exclude_from_category, cat, std::nullopt});
  c.reindex();
  lc.corpus = apply_category_overrides(c, c.overrides);
  lc.links = propagate(lc.links, lc.corpus.patents);
  return lc;
}

/// One record per (journal, doc) at 2010 and families built so that each
/// journal's windowed 2012 counts equal the fixture row.
inline LinkedCorpus category_fit_fixture() {
  LinkedCorpus lc;
  auto& c = lc.corpus;
  std::size_t fam = 0;
  for (const auto& row : read_tsv(fixture("category_fit.tsv"))) {
    const auto& cat = row[0];
    const auto& src = row[1];
    std::size_t n = std::stoul(row[2]);
    long long p = std::stoll(row[3]);
    long long f = std::stoll(row[4]);
    for (std::size_t i = 0; i < n; ++i) c.records.push_back(make_record(padded(src + "-", i), src, 2010, DocType::article, {cat}));
    long long doubles = p - f;
    for (long long k = 0; k < f; ++k, ++fam) {
      auto fid = padded("cf-", fam, 5);
      std::size_t members = k < doubles ? 2 : 1;
      for (std::size_t m = 0; m < members; ++m) {
        auto pat = make_patent(fid + "-" + std::to_string(m), fid, 2012);
        lc.links.push_back(direct_link(pat, padded(src + "-", static_cast<std::size_t>(k) % n)));
        c.patents.push_back(std::move(pat));
      }
    }
  }
  c.reindex();
  return lc;
}

}  // namespace patlink::test
