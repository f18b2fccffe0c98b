#include "patlink/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "patlink/normalize.hpp"

namespace patlink {

namespace {

const std::vector<std::string> kSyllables = {
    "ka", "lo", "mir", "ta", "ven", "sor", "pel", "dra", "ni", "qua", "bel", "tor", "mu", "fen", "gal",
    "ri", "zo", "cas", "dun", "pha", "lex", "vor", "ani", "stre", "ko", "mel", "tiv", "ur", "ban", "cri",
};

const std::vector<std::string> kPrefixes = {
    "Journal of", "International Journal of", "Annals of", "Transactions on", "Review of", "Letters in",
    "Bulletin of", "Advanced",
};

const std::vector<std::string> kFields = {
    "Biological", "Chemistry",   "Medicine",   "Physics",    "Applied",      "Computer",     "Information",
    "Systems",    "Molecular",   "Materials",  "Engineering", "Research",    "Science",      "Technology",
    "Clinical",   "Experimental", "Structural", "Optics",    "Mathematics",  "Statistics",   "Genetics",
    "Neuroscience", "Immunology", "Polymer",   "Environmental", "Agriculture", "Electronics", "Microbiology",
};

const std::vector<std::string> kDocTypes = {"article", "article", "article", "article", "review", "conference_paper"};

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); }
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  bool chance(double p) { return std::bernoulli_distribution(p)(gen); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
};

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

/// Distinct pseudo-words of 2-4 syllables, none a stopword.
std::vector<std::string> make_words(std::size_t n, Rng& rng, std::set<std::string>& taken) {
  const auto& stop = default_stopwords();
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    int k = rng.between(2, 4);
    for (int i = 0; i < k; ++i) w += rng.pick(kSyllables);
    if (stop.count(w) || !taken.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

/// Shortest abbreviation key per expansion, for abbreviating source words.
std::map<std::string, std::string> abbreviation_of() {
  std::map<std::string, std::string> out;
  for (const auto& [abbr, full] : default_abbreviations()) {
    if (abbr == full) continue;
    auto it = out.find(full);
    if (it == out.end() || abbr.size() < it->second.size()) out[full] = abbr;
  }
  return out;
}

struct Paper {
  std::vector<std::string> authors;  // "Surname I"
  std::vector<std::string> title;
  std::size_t journal = 0;
  int year = 0;
  int volume = 0;
  int first_page = 0;
  std::optional<std::string> doi;
};

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string title_text(const std::vector<std::string>& words) {
  std::vector<std::string> w = words;
  if (!w.empty()) w[0] = capitalize(w[0]);
  return join(w, " ");
}

std::string abbreviate(const std::string& source, const std::map<std::string, std::string>& abbr) {
  std::vector<std::string> out;
  std::string word;
  std::istringstream in(source);
  while (in >> word) {
    auto norm = normalize_text(word);
    if (norm == "of" || norm == "on" || norm == "in") continue;
    auto it = abbr.find(norm);
    if (it == abbr.end()) {
      // Expansion side of the table: "biological" is stored as "biology".
      auto alias = default_abbreviations().find(norm);
      if (alias != default_abbreviations().end()) it = abbr.find(alias->second);
    }
    out.push_back(it == abbr.end() ? word : capitalize(it->second) + ".");
  }
  return join(out, " ");
}

std::string ocr(std::string s, double rate, Rng& rng) {
  static const std::map<char, std::string> subs = {
      {'l', "1"}, {'o', "0"}, {'e', "c"}, {'i', "l"}, {'m', "rn"}, {'a', "o"}, {'n', "h"}, {'u', "v"}};
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (subs.count(s[i])) eligible.push_back(i);
  if (eligible.empty()) return s;
  std::set<std::size_t> chosen;
  for (auto i : eligible)
    if (rng.chance(rate)) chosen.insert(i);
  if (chosen.empty()) chosen.insert(rng.pick(eligible));
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += chosen.count(i) ? subs.at(s[i]) : std::string(1, s[i]);
  return out;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthParams& p) {
  if (p.n_records == 0 || p.n_journals == 0 || p.vocabulary == 0) throw std::invalid_argument("empty synthetic corpus");
  if (p.n_planted > p.n_records) throw std::invalid_argument("more planted pairs than records");
  if (p.title_min < 1 || p.title_max < p.title_min || p.year_to < p.year_from)
    throw std::invalid_argument("bad synthetic ranges");

  Rng rng(p.seed);
  std::set<std::string> taken;
  auto vocab = make_words(p.vocabulary, rng, taken);
  auto surnames = make_words(std::max<std::size_t>(50, p.n_records / 4), rng, taken);
  auto journal_words = make_words(p.n_journals, rng, taken);
  auto abbr = abbreviation_of();

  std::vector<double> weights(vocab.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / std::pow(double(i + 1), p.zipf_exponent);
  std::discrete_distribution<std::size_t> zipf(weights.begin(), weights.end());

  std::vector<std::string> journals;
  for (std::size_t j = 0; j < p.n_journals; ++j) {
    // A distinct name word keeps journals apart under abbreviation.
    std::string name = rng.pick(kPrefixes) + " " + rng.pick(kFields) + " " + capitalize(journal_words[j]);
    if (rng.chance(0.5)) name += " " + rng.pick(kFields);
    journals.push_back(name);
  }

  auto new_paper = [&](std::size_t serial) {
    Paper paper;
    int n_auth = rng.between(1, 4);
    for (int a = 0; a < n_auth; ++a)
      paper.authors.push_back(capitalize(rng.pick(surnames)) + " " + std::string(1, char('A' + rng.below(26))));
    int len = rng.between(p.title_min, p.title_max);
    std::set<std::size_t> used;
    while (static_cast<int>(paper.title.size()) < len) {
      auto w = zipf(rng.gen);
      if (used.insert(w).second) paper.title.push_back(vocab[w]);
    }
    paper.journal = rng.below(journals.size());
    paper.year = rng.between(p.year_from, p.year_to);
    paper.volume = rng.between(1, 180);
    paper.first_page = rng.between(1, 2400);
    if (rng.chance(p.record_doi_rate)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "10.%d/j%zu.%d.%zu", 1000 + static_cast<int>(paper.journal % 9000),
                    paper.journal, paper.year, serial);
      paper.doi = buf;
    }
    return paper;
  };

  SynthCorpus out;
  auto& corpus = out.corpus;
  std::vector<Paper> papers;
  for (std::size_t i = 0; i < p.n_records; ++i) {
    auto paper = new_paper(i);
    BibRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "rec-%05zu", i);
    r.record_id = id;
    r.title = title_text(paper.title);
    for (const auto& a : paper.authors) r.authors.push_back(a);
    r.first_author_surname = normalize_text(paper.authors[0].substr(0, paper.authors[0].find(' ')));
    r.source_id = "src-" + std::to_string(paper.journal);
    r.source_title = journals[paper.journal];
    r.pub_year = paper.year;
    r.doc_type = parse_doc_type(rng.pick(kDocTypes));
    r.doi = paper.doi;
    r.category_ids = {normalize_text(kFields[paper.journal % kFields.size()])};
    corpus.records.push_back(std::move(r));
    papers.push_back(std::move(paper));
  }

  struct RefDraft {
    std::string raw;
    SynthTruth truth;
  };
  std::vector<RefDraft> drafts;

  auto render = [&](const Paper& paper, bool abbreviated, bool with_doi, bool with_year,
                    const std::vector<std::string>& title_words, bool ocr_title) {
    std::string source = journals[paper.journal];
    if (abbreviated) source = abbreviate(source, abbr);
    std::string title = title_text(title_words);
    if (ocr_title) title = ocr(title, p.ocr_char_rate, rng);
    std::vector<std::string> authors;
    for (const auto& a : paper.authors) authors.push_back(a + ".");
    std::string pages = std::to_string(paper.first_page) + "-" + std::to_string(paper.first_page + rng.between(3, 20));
    std::string s;
    if (rng.chance(0.5)) {
      s = join(authors, ", ") + ", " + title + ", " + source + ", " + std::to_string(paper.volume) + ", " + pages;
      if (with_year) s += ", " + std::to_string(paper.year);
    } else {
      s = join(authors, ", ") + " " + title + ". " + source + ". ";
      if (with_year) s += std::to_string(paper.year) + ";";
      s += std::to_string(paper.volume) + ":" + pages + ".";
    }
    if (with_doi && paper.doi) s += " doi:" + *paper.doi;
    return s;
  };

  std::vector<std::size_t> order(p.n_records);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng.gen);
  for (std::size_t k = 0; k < p.n_planted; ++k) {
    const auto& paper = papers[order[k]];
    SynthTruth t;
    t.record_id = corpus.records[order[k]].record_id;
    bool abbreviated = rng.chance(p.abbreviate_source_rate);
    bool drop = rng.chance(p.token_drop_rate) && paper.title.size() > 1;
    bool ocr_title = rng.chance(p.ocr_rate);
    bool no_doi = paper.doi && rng.chance(p.missing_doi_rate);
    bool no_year = rng.chance(p.missing_year_rate);
    auto words = paper.title;
    if (drop) words.erase(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size())));
    if (abbreviated) t.corruptions.push_back("abbreviated_source");
    if (drop) t.corruptions.push_back("token_drop");
    if (ocr_title) t.corruptions.push_back("ocr");
    if (no_doi) t.corruptions.push_back("missing_doi");
    if (no_year) t.corruptions.push_back("missing_year");
    drafts.push_back({render(paper, abbreviated, !no_doi, !no_year, words, ocr_title), std::move(t)});
  }

  for (std::size_t k = 0; k < p.n_distractors; ++k) {
    auto paper = new_paper(p.n_records + k);
    SynthTruth t;
    if (rng.chance(p.near_miss_rate)) {
      const auto& twin = papers[rng.below(papers.size())];
      paper.authors = twin.authors;
      paper.journal = twin.journal;
      paper.year = twin.year;
      t.corruptions.push_back("near_miss");
    }
    t.corruptions.push_back("distractor");
    bool abbreviated = rng.chance(p.abbreviate_source_rate);
    drafts.push_back({render(paper, abbreviated, true, true, paper.title, false), std::move(t)});
  }
  std::shuffle(drafts.begin(), drafts.end(), rng.gen);

  // Three references per patent, patents grouped into families of 1-3.
  std::size_t n_patents = std::max<std::size_t>(1, (drafts.size() + 2) / 3);
  std::size_t family = 0;
  for (std::size_t i = 0; i < n_patents;) {
    std::size_t members = std::min<std::size_t>(n_patents - i, static_cast<std::size_t>(rng.between(1, 3)));
    char fid[32];
    std::snprintf(fid, sizeof fid, "fam-%05zu", family++);
    int filing = rng.between(p.year_to + 1, p.year_to + 3);
    for (std::size_t m = 0; m < members; ++m, ++i) {
      Patent pat;
      char pid[32];
      std::snprintf(pid, sizeof pid, "pat-%05zu", i);
      pat.patent_id = pid;
      pat.family_id = fid;
      pat.filing_year = filing;
      pat.grant_year = filing + rng.between(1, 4);
      pat.title = "METHOD FOR " + title_text({rng.pick(vocab), rng.pick(vocab)});
      pat.assignees = {capitalize(rng.pick(surnames)) + " Corporation"};
      corpus.patents.push_back(std::move(pat));
    }
  }
  for (std::size_t k = 0; k < drafts.size(); ++k) {
    NplReference ref;
    char rid[32];
    std::snprintf(rid, sizeof rid, "ref-%05zu", k);
    ref.ref_id = rid;
    ref.patent_id = corpus.patents[k / 3].patent_id;
    ref.raw_text = drafts[k].raw;
    drafts[k].truth.ref_id = rid;
    corpus.refs.push_back(std::move(ref));
    out.truth.push_back(std::move(drafts[k].truth));
  }
  corpus.reindex();
  return out;
}

void to_json(Json& j, const SynthTruth& t) {
  j = Json{{"ref_id", t.ref_id}, {"corruptions", t.corruptions}};
  j["record_id"] = t.record_id ? Json(*t.record_id) : Json(nullptr);
}

void from_json(const Json& j, SynthTruth& t) {
  t.ref_id = j.at("ref_id").get<std::string>();
  t.record_id.reset();
  if (j.contains("record_id") && !j.at("record_id").is_null()) t.record_id = j.at("record_id").get<std::string>();
  t.corruptions = j.value("corruptions", std::vector<std::string>{});
}

}  // namespace patlink
