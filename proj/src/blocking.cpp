#include "patlink/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace patlink {

namespace {

std::vector<std::string> unique_sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<std::string> trigrams(const std::vector<std::string>& tokens) {
  std::string s = " ";
  for (const auto& t : tokens) {
    s += t;
    s += ' ';
  }
  std::vector<std::string> out;
  if (s.size() < 3 || tokens.empty()) return out;
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) out.push_back(s.substr(i, 3));
  return unique_sorted(std::move(out));
}

InvertedIndex InvertedIndex::build(const Corpus& corpus, const TextConfig& cfg) {
  InvertedIndex ix;
  ix.cfg_ = cfg;
  const auto& records = corpus.records;
  if (!std::is_sorted(records.begin(), records.end(),
                      [](const BibRecord& a, const BibRecord& b) { return a.record_id < b.record_id; }))
    throw std::invalid_argument("build_index: corpus records must be sorted by record_id");

  auto intern = [&](const std::string& t) {
    auto [it, inserted] = ix.term_ids_.emplace(t, static_cast<TermId>(ix.terms_.size()));
    if (inserted) {
      ix.terms_.push_back(t);
      ix.postings_.emplace_back();
      ix.title_postings_.emplace_back();
    }
    return it->second;
  };

  std::vector<std::vector<TermId>> title_ids(records.size()), source_ids(records.size());
  std::unordered_map<std::string, std::uint32_t> source_ordinal;
  std::vector<std::string> doi_collisions;

  for (RecordPos p = 0; p < records.size(); ++p) {
    const auto& r = records[p];
    ix.record_ids_.push_back(r.record_id);
    ix.record_pos_.emplace(r.record_id, p);

    auto title = unique_sorted(tokenize_terms(normalize_text(r.title), cfg.stopwords));
    auto source = patlink::source_terms(r.source_title, cfg);
    auto surname = normalize_text(r.first_author_surname);
    auto author = unique_sorted(tokenize_terms(surname, {}));

    std::vector<TermId> all;
    for (const auto& t : title) {
      auto id = intern(t);
      title_ids[p].push_back(id);
      ix.title_postings_[id].push_back(p);
      all.push_back(id);
    }
    for (const auto& t : unique_sorted(source)) {
      auto id = intern(t);
      source_ids[p].push_back(id);
      all.push_back(id);
    }
    for (const auto& t : author) all.push_back(intern(t));
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (auto id : all) ix.postings_[id].push_back(p);

    if (r.doi) {
      auto [it, inserted] = ix.doi_key_.emplace(*r.doi, p);
      if (!inserted)
        doi_collisions.push_back(*r.doi + " (" + records[it->second].record_id + ", " +
                                 r.record_id + ")");
    }
    if (!surname.empty()) ix.author_year_key_[{surname, r.pub_year}].push_back(p);

    auto [sit, fresh] = source_ordinal.emplace(r.source_id, static_cast<std::uint32_t>(source_ordinal.size()));
    if (fresh) {
      for (const auto& g : trigrams(source)) ix.source_trigram_key_[g].push_back(sit->second);
    }
    ix.source_year_key_[{sit->second, r.pub_year}].push_back(p);
  }
  if (!doi_collisions.empty()) {
    std::string msg = "duplicate doi across records:";
    for (std::size_t i = 0; i < doi_collisions.size() && i < 10; ++i) msg += " " + doi_collisions[i];
    throw IntegrityError(msg);
  }

  const double n = static_cast<double>(records.size());
  ix.idf_.resize(ix.terms_.size());
  for (TermId t = 0; t < ix.terms_.size(); ++t)
    ix.idf_[t] = std::log(n / static_cast<double>(ix.postings_[t].size()));

  auto weigh = [&](std::vector<TermId> ids) {
    std::sort(ids.begin(), ids.end());
    WeightedTerms w;
    w.ids = std::move(ids);
    for (auto id : w.ids) {
      w.weights.push_back(ix.idf_[id]);
      w.total += ix.idf_[id];
    }
    return w;
  };
  ix.title_terms_.reserve(records.size());
  ix.source_terms_.reserve(records.size());
  for (RecordPos p = 0; p < records.size(); ++p) {
    ix.title_terms_.push_back(weigh(std::move(title_ids[p])));
    ix.source_terms_.push_back(weigh(std::move(source_ids[p])));
  }
  return ix;
}

std::optional<RecordPos> InvertedIndex::record_pos(std::string_view record_id) const {
  auto it = record_pos_.find(std::string(record_id));
  if (it == record_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<TermId> InvertedIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RecordPos> InvertedIndex::by_doi(std::string_view doi) const {
  auto it = doi_key_.find(std::string(doi));
  if (it == doi_key_.end()) return std::nullopt;
  return it->second;
}

const std::vector<RecordPos>* InvertedIndex::by_author_year(std::string_view surname, int year) const {
  auto it = author_year_key_.find(std::pair<std::string, int>(std::string(surname), year));
  return it == author_year_key_.end() ? nullptr : &it->second;
}

std::vector<TermId> InvertedIndex::lookup(const std::vector<std::string>& terms) const {
  std::vector<TermId> out;
  for (const auto& t : terms)
    if (auto id = term_id(t)) out.push_back(*id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RecordPos> InvertedIndex::by_source_year(const std::vector<std::string>& source_tokens,
                                                     int year, double min_overlap) const {
  std::vector<RecordPos> out;
  auto grams = trigrams(source_tokens);
  if (grams.empty()) return out;
  std::unordered_map<std::uint32_t, std::size_t> hits;
  for (const auto& g : grams) {
    auto it = source_trigram_key_.find(g);
    if (it == source_trigram_key_.end()) continue;
    for (auto s : it->second) ++hits[s];
  }
  const double need = min_overlap * static_cast<double>(grams.size());
  for (const auto& [source, count] : hits) {
    if (static_cast<double>(count) < need) continue;
    auto it = source_year_key_.find({source, year});
    if (it != source_year_key_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RecordPos> generate_candidate_positions(const RefElements& e, const InvertedIndex& index,
                                                    const BlockingParams& params) {
  std::vector<RecordPos> out;
  std::optional<RecordPos> doi_hit;

  // R1
  if (e.doi) {
    doi_hit = index.by_doi(*e.doi);
    if (doi_hit) out.push_back(*doi_hit);
  }

  // R2
  const std::size_t rare_max = params.rare_df_limit(index.n_records());
  std::vector<TermId> rare;
  for (auto t : index.lookup(e.title_tokens))
    if (index.doc_freq(t) <= rare_max && !index.title_postings(t).empty()) rare.push_back(t);
  if (rare.size() >= params.min_rare_terms) {
    std::unordered_map<RecordPos, std::size_t> shared;
    for (auto t : rare)
      for (auto p : index.title_postings(t)) ++shared[p];
    for (const auto& [p, n] : shared)
      if (n >= params.min_rare_terms) out.push_back(p);
  }

  // R3
  if (e.first_author_surname && e.year) {
    for (int y = *e.year - params.year_tolerance; y <= *e.year + params.year_tolerance; ++y)
      if (const auto* hits = index.by_author_year(*e.first_author_surname, y))
        out.insert(out.end(), hits->begin(), hits->end());
  }

  // R4
  if (e.year && !e.source_tokens.empty()) {
    auto hits = index.by_source_year(e.source_tokens, *e.year, params.trigram_min_overlap);
    out.insert(out.end(), hits.begin(), hits.end());
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());

  if (params.max_candidates && out.size() > params.max_candidates) {
    std::vector<std::pair<std::size_t, RecordPos>> ranked;
    ranked.reserve(out.size());
    for (auto p : out) {
      if (doi_hit && p == *doi_hit) continue;
      const auto& ids = index.title_terms(p).ids;
      std::size_t n = 0;
      for (auto t : rare) n += std::binary_search(ids.begin(), ids.end(), t);
      ranked.emplace_back(n, p);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::size_t keep = params.max_candidates - (doi_hit ? 1 : 0);
    out.clear();
    if (doi_hit) out.push_back(*doi_hit);
    for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) out.push_back(ranked[i].second);
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::vector<std::string> generate_candidates(const RefElements& elements, const InvertedIndex& index,
                                             const BlockingParams& params) {
  std::vector<std::string> ids;
  for (auto p : generate_candidate_positions(elements, index, params)) ids.push_back(index.record_id(p));
  return ids;
}

void to_json(Json& j, const Candidates& c) {
  j = Json{{"ref_id", c.ref_id}, {"record_ids", c.record_ids}};
}

void from_json(const Json& j, Candidates& c) {
  c.ref_id = j.at("ref_id").get<std::string>();
  c.record_ids = j.at("record_ids").get<std::vector<std::string>>();
}

}  // namespace patlink
