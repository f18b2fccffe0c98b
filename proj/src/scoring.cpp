#include "patlink/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "patlink/normalize.hpp"
#include "patlink/parallel.hpp"

namespace patlink {

std::string_view to_string(MatchStatus s) {
  switch (s) {
    case MatchStatus::auto_accepted: return "auto_accepted";
    case MatchStatus::needs_review: return "needs_review";
    case MatchStatus::rejected: return "rejected";
  }
  return "rejected";
}

MatchStatus parse_match_status(std::string_view s) {
  if (s == "auto_accepted") return MatchStatus::auto_accepted;
  if (s == "needs_review") return MatchStatus::needs_review;
  if (s == "rejected") return MatchStatus::rejected;
  throw std::invalid_argument("unknown match status '" + std::string(s) + "'");
}

double combine_scores(const ElementScores& es) {
  if (!es.doi && !es.title) return 0.0;
  double p = 1.0;
  for (const auto& s : {es.doi, es.year, es.author, es.title, es.source})
    if (s) p *= *s;
  return p;
}

MatchStatus triage(double score, const ScoringParams& params) {
  if (score >= params.tau_auto) return MatchStatus::auto_accepted;
  if (score >= params.tau_review) return MatchStatus::needs_review;
  return MatchStatus::rejected;
}

std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t cap) {
  std::size_t gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (gap > cap) return cap + 1;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > cap) return cap + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[b.size()], cap + 1);
}

namespace {

std::optional<double> doi_score(const std::optional<std::string>& ref, const std::optional<std::string>& rec) {
  if (!ref || !rec) return std::nullopt;
  return *ref == *rec ? 1.0 : 0.0;
}

std::optional<double> year_score(const std::optional<int>& ref, int rec, const ScoringParams& p) {
  if (!ref || rec == 0) return std::nullopt;
  int d = std::abs(*ref - rec);
  return d == 0 ? 1.0 : d == 1 ? p.year_adjacent : p.year_mismatch;
}

std::optional<double> author_score(const std::optional<std::string>& ref, const std::string& rec,
                                   const ScoringParams& p) {
  if (!ref || ref->empty() || rec.empty()) return std::nullopt;
  auto d = edit_distance(*ref, rec, 1);
  return d == 0 ? 1.0 : d == 1 ? p.author_edit1 : p.author_mismatch;
}

// Rarity-weighted share of the record's terms found in the reference.
std::optional<double> overlap_score(const std::vector<TermId>& ref_ids, const WeightedTerms& rec,
                                    bool ref_empty, double scale) {
  if (ref_empty || rec.empty()) return std::nullopt;
  double shared = 0.0;
  std::size_t shared_n = 0;
  auto it = ref_ids.begin();
  for (std::size_t k = 0; k < rec.ids.size() && it != ref_ids.end(); ++k) {
    it = std::lower_bound(it, ref_ids.end(), rec.ids[k]);
    if (it != ref_ids.end() && *it == rec.ids[k]) {
      shared += rec.weights[k];
      ++shared_n;
    }
  }
  if (rec.total <= 0.0)
    return static_cast<double>(shared_n) / static_cast<double>(rec.ids.size());
  return (scale * shared) / (scale * rec.total);
}

struct Better {
  // True when candidate a ranks above candidate b.
  const RefElements& e;
  const Corpus& corpus;
  bool operator()(const std::pair<double, RecordPos>& a, const std::pair<double, RecordPos>& b) const {
    if (a.first != b.first) return a.first > b.first;
    const auto& ra = corpus.records[a.second];
    const auto& rb = corpus.records[b.second];
    bool da = e.doi && ra.doi == e.doi, db = e.doi && rb.doi == e.doi;
    if (da != db) return da;
    bool ya = e.year && ra.pub_year == *e.year, yb = e.year && rb.pub_year == *e.year;
    if (ya != yb) return ya;
    return a.second < b.second;
  }
};

}  // namespace

RefScorer::RefScorer(const RefElements& elements, const Corpus& corpus, const InvertedIndex& index,
                     const ScoringParams& params)
    : e_(elements),
      corpus_(corpus),
      index_(index),
      params_(params),
      title_ids_(index.lookup(elements.title_tokens)),
      source_ids_(index.lookup(elements.source_tokens)) {}

ElementScores RefScorer::elements(RecordPos p) const {
  const auto& r = corpus_.records[p];
  ElementScores es;
  es.doi = doi_score(e_.doi, r.doi);
  es.year = year_score(e_.year, r.pub_year, params_);
  es.author = author_score(e_.first_author_surname, r.first_author_surname, params_);
  es.title = overlap_score(title_ids_, index_.title_terms(p), e_.title_tokens.empty(), params_.idf_scale);
  es.source =
      overlap_score(source_ids_, index_.source_terms(p), e_.source_tokens.empty(), params_.idf_scale);
  return es;
}

ElementScores score_elements(const RefElements& e, const BibRecord& record, const Corpus& corpus,
                             const InvertedIndex& index, const ScoringParams& params) {
  if (auto p = index.record_pos(record.record_id);
      p && *p < corpus.records.size() && corpus.records[*p] == record)
    return RefScorer(e, corpus, index, params).elements(*p);

  // Record outside the index: build its weighted terms ad hoc.
  const auto& cfg = index.text_config();
  double fallback = std::log(std::max<double>(1.0, static_cast<double>(index.n_records())));
  auto weigh = [&](std::vector<std::string> terms, const std::vector<std::string>& ref_terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    std::vector<std::string> ref_sorted = ref_terms;
    std::sort(ref_sorted.begin(), ref_sorted.end());
    // Local ids: position in the record's term list.
    WeightedTerms w;
    std::vector<TermId> ref_ids;
    for (TermId k = 0; k < terms.size(); ++k) {
      auto id = index.term_id(terms[k]);
      double weight = id ? index.idf(*id) : fallback;
      w.ids.push_back(k);
      w.weights.push_back(weight);
      w.total += weight;
      if (std::binary_search(ref_sorted.begin(), ref_sorted.end(), terms[k])) ref_ids.push_back(k);
    }
    return std::pair{w, ref_ids};
  };
  ElementScores es;
  es.doi = doi_score(e.doi, record.doi);
  es.year = year_score(e.year, record.pub_year, params);
  es.author = author_score(e.first_author_surname, normalize_text(record.first_author_surname), params);
  auto [tw, tref] = weigh(tokenize_terms(normalize_text(record.title), cfg.stopwords), e.title_tokens);
  es.title = overlap_score(tref, tw, e.title_tokens.empty(), params.idf_scale);
  auto [sw, sref] = weigh(source_terms(record.source_title, cfg), e.source_tokens);
  es.source = overlap_score(sref, sw, e.source_tokens.empty(), params.idf_scale);
  return es;
}

MatchResult resolve_reference(const std::string& ref_id, const RefElements& e,
                              const std::vector<RecordPos>& candidates, const Corpus& corpus,
                              const InvertedIndex& index, const ScoringParams& params) {
  MatchResult m;
  m.ref_id = ref_id;
  if (candidates.empty()) return m;
  RefScorer scorer(e, corpus, index, params);
  std::vector<std::pair<double, RecordPos>> scored;
  scored.reserve(candidates.size());
  for (auto p : candidates) scored.emplace_back(scorer.score(p), p);
  Better better{e, corpus};
  std::size_t top = std::min<std::size_t>(6, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top), scored.end(), better);
  m.best_record_id = index.record_id(scored[0].second);
  m.score = scored[0].first;
  m.status = triage(m.score, params);
  for (std::size_t i = 1; i < top; ++i)
    if (scored[i].first > 0.0) m.runner_ups.push_back({index.record_id(scored[i].second), scored[i].first});
  return m;
}

MatchResult resolve_reference(const std::string& ref_id, const RefElements& e,
                              const std::vector<std::string>& candidate_ids, const Corpus& corpus,
                              const InvertedIndex& index, const ScoringParams& params) {
  std::vector<RecordPos> pos;
  for (const auto& id : candidate_ids) {
    auto p = index.record_pos(id);
    if (!p) throw IntegrityError("candidate record '" + id + "' is not in the corpus");
    pos.push_back(*p);
  }
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return resolve_reference(ref_id, e, pos, corpus, index, params);
}

std::vector<MatchResult> match_all(const std::vector<NplReference>& refs, const Corpus& corpus,
                                   const InvertedIndex& index, const BlockingParams& blocking,
                                   const ScoringParams& scoring, unsigned threads) {
  std::vector<MatchResult> out(refs.size());
  parallel_for(
      refs.size(),
      [&](std::size_t i) {
        const auto& r = refs[i];
        if (!r.elements) throw std::invalid_argument("ref " + r.ref_id + " has no elements");
        auto cands = generate_candidate_positions(*r.elements, index, blocking);
        out[i] = resolve_reference(r.ref_id, *r.elements, cands, corpus, index, scoring);
      },
      threads ? threads : default_threads());
  return out;
}

void to_json(Json& j, const ScoredCandidate& c) {
  j = Json{{"record_id", c.record_id}, {"score", c.score}};
}

void from_json(const Json& j, ScoredCandidate& c) {
  c.record_id = j.at("record_id").get<std::string>();
  c.score = j.at("score").get<double>();
}

void to_json(Json& j, const MatchResult& m) {
  j = Json{{"ref_id", m.ref_id},
           {"best_record_id", m.best_record_id ? Json(*m.best_record_id) : Json(nullptr)},
           {"score", m.score},
           {"status", to_string(m.status)},
           {"runner_up_ids", m.runner_ups}};
}

void from_json(const Json& j, MatchResult& m) {
  m.ref_id = j.at("ref_id").get<std::string>();
  auto b = j.find("best_record_id");
  m.best_record_id = (b == j.end() || b->is_null()) ? std::nullopt
                                                     : std::optional<std::string>(b->get<std::string>());
  m.score = j.at("score").get<double>();
  m.status = parse_match_status(j.at("status").get<std::string>());
  m.runner_ups = j.value("runner_up_ids", std::vector<ScoredCandidate>{});
}

}  // namespace patlink
