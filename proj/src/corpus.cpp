#include "patlink/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <sstream>

#include "patlink/ndrec.hpp"
#include "patlink/normalize.hpp"

namespace patlink {

namespace {

template <class T>
std::optional<T> opt_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <class T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? Json(*v) : Json(nullptr);
}

std::string first_n(const std::vector<std::string>& items, std::size_t n = 10) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size() && i < n; ++i) os << (i ? ", " : "") << items[i];
  if (items.size() > n) os << " (+" << items.size() - n << " more)";
  return os.str();
}

template <class T, class Key>
void sort_by(std::vector<T>& v, Key key) {
  std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
}

std::string where(const std::filesystem::path& p, std::size_t line) {
  return p.string() + ":" + std::to_string(line);
}

}  // namespace

// ---- enums -----------------------------------------------------------------

std::string_view to_string(DocType t) {
  switch (t) {
    case DocType::article: return "article";
    case DocType::review: return "review";
    case DocType::mini_review: return "mini_review";
    case DocType::conference_paper: return "conference_paper";
    case DocType::other: return "other";
  }
  return "other";
}

DocType parse_doc_type(std::string_view s, bool* known) {
  static const std::map<std::string_view, DocType> kTypes{
      {"article", DocType::article},
      {"review", DocType::review},
      {"mini_review", DocType::mini_review},
      {"conference_paper", DocType::conference_paper},
      {"other", DocType::other}};
  auto it = kTypes.find(s);
  if (known) *known = it != kTypes.end();
  return it == kTypes.end() ? DocType::other : it->second;
}

bool is_citable(DocType t) { return t != DocType::other; }

int current_year() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  return tm.tm_year + 1900;
}

// ---- JSON ------------------------------------------------------------------

void to_json(Json& j, const BibRecord& r) {
  j = Json{{"record_id", r.record_id},
           {"title", r.title},
           {"authors", r.authors},
           {"first_author_surname", r.first_author_surname},
           {"source_id", r.source_id},
           {"source_title", r.source_title},
           {"pub_year", r.pub_year},
           {"doc_type", to_string(r.doc_type)},
           {"category_ids", r.category_ids},
           {"sector_ids", r.sector_ids}};
  put_opt(j, "doi", r.doi);
}

void from_json(const Json& j, BibRecord& r) {
  r.record_id = j.at("record_id").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.authors = j.value("authors", std::vector<std::string>{});
  r.first_author_surname = j.value("first_author_surname", std::string{});
  r.source_id = j.at("source_id").get<std::string>();
  r.source_title = j.value("source_title", std::string{});
  r.pub_year = j.at("pub_year").get<int>();
  r.doc_type = parse_doc_type(j.at("doc_type").get<std::string>());
  r.doi = opt_field<std::string>(j, "doi");
  r.category_ids = j.value("category_ids", std::set<std::string>{});
  r.sector_ids = j.value("sector_ids", std::set<std::string>{});
}

void to_json(Json& j, const Patent& p) {
  j = Json{{"patent_id", p.patent_id},
           {"family_id", p.family_id},
           {"filing_year", p.filing_year},
           {"title", p.title},
           {"assignees", p.assignees}};
  put_opt(j, "grant_year", p.grant_year);
}

void from_json(const Json& j, Patent& p) {
  p.patent_id = j.at("patent_id").get<std::string>();
  p.family_id = j.at("family_id").get<std::string>();
  p.filing_year = j.at("filing_year").get<int>();
  p.grant_year = opt_field<int>(j, "grant_year");
  p.title = j.value("title", std::string{});
  p.assignees = j.value("assignees", std::vector<std::string>{});
}

void to_json(Json& j, const RefElements& e) {
  j = Json{{"title_tokens", e.title_tokens}, {"source_tokens", e.source_tokens}};
  put_opt(j, "doi", e.doi);
  put_opt(j, "year", e.year);
  put_opt(j, "first_author_surname", e.first_author_surname);
}

void from_json(const Json& j, RefElements& e) {
  e.doi = opt_field<std::string>(j, "doi");
  e.year = opt_field<int>(j, "year");
  e.first_author_surname = opt_field<std::string>(j, "first_author_surname");
  e.title_tokens = j.value("title_tokens", std::vector<std::string>{});
  e.source_tokens = j.value("source_tokens", std::vector<std::string>{});
}

void to_json(Json& j, const NplReference& r) {
  j = Json{{"ref_id", r.ref_id}, {"patent_id", r.patent_id}, {"raw_text", r.raw_text}};
  j["elements"] = r.elements ? Json(*r.elements) : Json(nullptr);
}

void from_json(const Json& j, NplReference& r) {
  r.ref_id = j.at("ref_id").get<std::string>();
  r.patent_id = j.at("patent_id").get<std::string>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.elements = opt_field<RefElements>(j, "elements");
}

void to_json(Json& j, const PaperCitationEdge& e) {
  j = Json{{"citing_record_id", e.citing_record_id}, {"cited_record_id", e.cited_record_id}};
}

void from_json(const Json& j, PaperCitationEdge& e) {
  e.citing_record_id = j.at("citing_record_id").get<std::string>();
  e.cited_record_id = j.at("cited_record_id").get<std::string>();
}

void to_json(Json& j, const CategoryOverride& o) {
  j = Json{{"source_id", o.source_id},
           {"action", o.action == CategoryOverride::Action::reassign ? "reassign"
                                                                     : "exclude_from_category"},
           {"category_id", o.category_id}};
  put_opt(j, "replacement_category_id", o.replacement_category_id);
}

void from_json(const Json& j, CategoryOverride& o) {
  o.source_id = j.at("source_id").get<std::string>();
  auto action = j.at("action").get<std::string>();
  if (action == "reassign") {
    o.action = CategoryOverride::Action::reassign;
  } else if (action == "exclude_from_category") {
    o.action = CategoryOverride::Action::exclude_from_category;
  } else {
    throw std::invalid_argument("unknown override action '" + action + "'");
  }
  o.category_id = j.at("category_id").get<std::string>();
  o.replacement_category_id = opt_field<std::string>(j, "replacement_category_id");
  if (o.action == CategoryOverride::Action::reassign && !o.replacement_category_id)
    throw std::invalid_argument("reassign override requires replacement_category_id");
}

// ---- Corpus ----------------------------------------------------------------

void Corpus::reindex() {
  sort_by(records, [](const BibRecord& r) -> const std::string& { return r.record_id; });
  sort_by(patents, [](const Patent& p) -> const std::string& { return p.patent_id; });
  sort_by(refs, [](const NplReference& r) -> const std::string& { return r.ref_id; });
  record_pos_.clear();
  patent_pos_.clear();
  ref_pos_.clear();
  for (std::size_t i = 0; i < records.size(); ++i) record_pos_.emplace(records[i].record_id, i);
  for (std::size_t i = 0; i < patents.size(); ++i) patent_pos_.emplace(patents[i].patent_id, i);
  for (std::size_t i = 0; i < refs.size(); ++i) ref_pos_.emplace(refs[i].ref_id, i);
}

const BibRecord* Corpus::find_record(std::string_view id) const {
  auto it = record_pos_.find(std::string(id));
  return it == record_pos_.end() ? nullptr : &records[it->second];
}

const Patent* Corpus::find_patent(std::string_view id) const {
  auto it = patent_pos_.find(std::string(id));
  return it == patent_pos_.end() ? nullptr : &patents[it->second];
}

const NplReference* Corpus::find_ref(std::string_view id) const {
  auto it = ref_pos_.find(std::string(id));
  return it == ref_pos_.end() ? nullptr : &refs[it->second];
}

std::optional<std::size_t> Corpus::record_index(std::string_view id) const {
  auto it = record_pos_.find(std::string(id));
  if (it == record_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Corpus::patent_index(std::string_view id) const {
  auto it = patent_pos_.find(std::string(id));
  if (it == patent_pos_.end()) return std::nullopt;
  return it->second;
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  CorpusPaths p;
  p.bib = dir / "bib_records.ndrec";
  p.patents = dir / "patents.ndrec";
  p.refs = dir / "npl_refs.ndrec";
  if (std::filesystem::exists(dir / "paper_cites.ndrec")) p.paper_cites = dir / "paper_cites.ndrec";
  if (std::filesystem::exists(dir / "category_overrides.ndrec"))
    p.overrides = dir / "category_overrides.ndrec";
  return p;
}

namespace {

// Rejects (lenient) or throws (strict) on a per-line invariant violation.
struct LineGate {
  const LoadOptions& opts;
  Corpus& corpus;

  bool admit(const std::optional<std::string>& problem, const std::filesystem::path& file,
             std::size_t line) {
    if (!problem) return true;
    auto msg = where(file, line) + ": " + *problem;
    if (opts.strict) throw FormatError(msg);
    corpus.warnings.push_back("rejected " + msg);
    ++corpus.rejected_lines;
    return false;
  }
};

std::optional<std::string> check_record(BibRecord& r, int max_year) {
  if (r.record_id.empty()) return "empty record_id";
  if (r.pub_year < 1800 || r.pub_year > max_year)
    return "pub_year " + std::to_string(r.pub_year) + " outside [1800, " +
           std::to_string(max_year) + "]";
  if (r.doi) {
    std::string d = *r.doi;
    std::transform(d.begin(), d.end(), d.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!is_doi(d)) return "malformed doi '" + *r.doi + "'";
    r.doi = d;
  }
  r.first_author_surname = normalize_text(r.first_author_surname);
  return std::nullopt;
}

std::optional<std::string> check_patent(const Patent& p) {
  if (p.patent_id.empty()) return "empty patent_id";
  if (p.family_id.empty()) return "empty family_id";
  if (p.grant_year && *p.grant_year < p.filing_year) return "grant_year before filing_year";
  return std::nullopt;
}

}  // namespace

Corpus load_corpus(const CorpusPaths& paths, const LoadOptions& opts) {
  Corpus c;
  int max_year = opts.current_year ? opts.current_year : current_year();
  LineGate gate{opts, c};

  for_each_ndrec(paths.bib, [&](const Json& j, std::size_t line) {
    auto r = j.get<BibRecord>();
    bool known = true;
    parse_doc_type(j.at("doc_type").get<std::string>(), &known);
    if (!known)
      c.warnings.push_back(where(paths.bib, line) + ": unknown doc_type '" +
                           j.at("doc_type").get<std::string>() + "' mapped to other");
    if (gate.admit(check_record(r, max_year), paths.bib, line)) c.records.push_back(std::move(r));
  });
  for_each_ndrec(paths.patents, [&](const Json& j, std::size_t line) {
    auto p = j.get<Patent>();
    if (gate.admit(check_patent(p), paths.patents, line)) c.patents.push_back(std::move(p));
  });
  for_each_ndrec(paths.refs, [&](const Json& j, std::size_t line) {
    auto r = j.get<NplReference>();
    std::optional<std::string> problem;
    if (r.ref_id.empty()) problem = "empty ref_id";
    if (gate.admit(problem, paths.refs, line)) c.refs.push_back(std::move(r));
  });
  if (paths.paper_cites) {
    for_each_ndrec(*paths.paper_cites, [&](const Json& j, std::size_t line) {
      auto e = j.get<PaperCitationEdge>();
      std::optional<std::string> problem;
      if (e.citing_record_id == e.cited_record_id) problem = "self-citation " + e.cited_record_id;
      if (gate.admit(problem, *paths.paper_cites, line)) c.paper_cites.push_back(std::move(e));
    });
  }
  if (paths.overrides) c.overrides = read_ndrec<CategoryOverride>(*paths.overrides);

  validate_corpus(c);
  if (!c.overrides.empty()) {
    auto curated = apply_category_overrides(c, c.overrides);
    curated.rejected_lines = c.rejected_lines;
    return curated;
  }
  return c;
}

void validate_corpus(Corpus& c) {
  auto dupes = [](auto& items, auto key) {
    std::vector<std::string> ids;
    for (const auto& x : items) ids.push_back(key(x));
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> out;
    for (std::size_t i = 1; i < ids.size(); ++i)
      if (ids[i] == ids[i - 1] && (out.empty() || out.back() != ids[i])) out.push_back(ids[i]);
    return out;
  };
  auto d1 = dupes(c.records, [](const BibRecord& r) { return r.record_id; });
  if (!d1.empty()) throw IntegrityError("duplicate record_id: " + first_n(d1));
  auto d2 = dupes(c.patents, [](const Patent& p) { return p.patent_id; });
  if (!d2.empty()) throw IntegrityError("duplicate patent_id: " + first_n(d2));
  auto d3 = dupes(c.refs, [](const NplReference& r) { return r.ref_id; });
  if (!d3.empty()) throw IntegrityError("duplicate ref_id: " + first_n(d3));

  c.reindex();

  std::vector<std::string> dangling;
  for (const auto& r : c.refs)
    if (!c.find_patent(r.patent_id)) dangling.push_back(r.ref_id + " -> patent " + r.patent_id);
  if (!dangling.empty())
    throw IntegrityError("dangling patent_id in npl refs: " + first_n(dangling));

  for (const auto& e : c.paper_cites) {
    if (e.citing_record_id == e.cited_record_id)
      dangling.push_back("self-citation " + e.cited_record_id);
    else if (!c.find_record(e.citing_record_id))
      dangling.push_back("citing " + e.citing_record_id);
    else if (!c.find_record(e.cited_record_id))
      dangling.push_back("cited " + e.cited_record_id);
  }
  if (!dangling.empty())
    throw IntegrityError("dangling record_id in paper cites: " + first_n(dangling));
}

Corpus apply_category_overrides(const Corpus& corpus,
                                const std::vector<CategoryOverride>& overrides) {
  Corpus out = corpus;
  std::set<std::string> sources;
  for (const auto& r : corpus.records) sources.insert(r.source_id);

  struct Rules {
    std::set<std::string> excluded;
    std::map<std::string, std::string> reassign;
  };
  std::map<std::string, Rules> by_source;
  for (const auto& o : overrides) {
    if (!sources.count(o.source_id)) {
      out.warnings.push_back("category override for unknown source_id '" + o.source_id +
                             "' skipped");
      continue;
    }
    auto& rules = by_source[o.source_id];
    if (o.action == CategoryOverride::Action::exclude_from_category) {
      rules.excluded.insert(o.category_id);
    } else {
      rules.reassign[o.category_id] = *o.replacement_category_id;
    }
  }

  for (auto& [source, rules] : by_source) {
    // Resolve chains a->b->c to their final target so a second application
    // is a no-op.
    std::map<std::string, std::string> final_target;
    for (const auto& [from, _] : rules.reassign) {
      std::string cur = from;
      std::set<std::string> seen{cur};
      while (true) {
        auto it = rules.reassign.find(cur);
        if (it == rules.reassign.end()) break;
        cur = it->second;
        if (!seen.insert(cur).second)
          throw IntegrityError("cyclic category reassignment for source " + source);
      }
      final_target[from] = cur;
    }
    rules.reassign = std::move(final_target);
  }

  for (auto& r : out.records) {
    auto it = by_source.find(r.source_id);
    if (it == by_source.end()) continue;
    const auto& rules = it->second;
    std::set<std::string> cats;
    for (const auto& cat : r.category_ids) {
      if (rules.excluded.count(cat)) continue;
      auto re = rules.reassign.find(cat);
      std::string target = re == rules.reassign.end() ? cat : re->second;
      if (rules.excluded.count(target)) continue;
      cats.insert(target);
    }
    r.category_ids = std::move(cats);
  }
  return out;
}

void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  write_ndrec(paths.bib, corpus.records);
  write_ndrec(paths.patents, corpus.patents);
  write_ndrec(paths.refs, corpus.refs);
  if (paths.paper_cites) write_ndrec(*paths.paper_cites, corpus.paper_cites);
  if (paths.overrides) write_ndrec(*paths.overrides, corpus.overrides);
}

}  // namespace patlink
