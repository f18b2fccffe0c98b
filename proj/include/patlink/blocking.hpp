#pragma once

// Candidate pre-selection. The index holds, per record, the sorted term ids
// and idf weights that the scorer reuses, so terms are tokenized once.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/ndrec.hpp"
#include "patlink/normalize.hpp"
#include "patlink/params.hpp"

namespace patlink {

using TermId = std::uint32_t;
using RecordPos = std::uint32_t;  // position in Corpus::records (== id order)

/// Sorted unique term ids with their idf weights and the weight total.
struct WeightedTerms {
  std::vector<TermId> ids;
  std::vector<double> weights;
  double total = 0.0;

  bool empty() const { return ids.empty(); }
};

struct Candidates {
  std::string ref_id;
  std::vector<std::string> record_ids;

  bool operator==(const Candidates&) const = default;
};

class InvertedIndex {
 public:
  /// Throws IntegrityError when two records share a DOI.
  static InvertedIndex build(const Corpus& corpus, const TextConfig& cfg = default_text_config());

  std::size_t n_records() const { return record_ids_.size(); }
  std::size_t n_terms() const { return terms_.size(); }
  const std::string& record_id(RecordPos p) const { return record_ids_[p]; }
  std::optional<RecordPos> record_pos(std::string_view record_id) const;

  std::optional<TermId> term_id(std::string_view term) const;
  const std::string& term(TermId t) const { return terms_[t]; }
  /// Records holding the term in title, source or author fields (id order).
  const std::vector<RecordPos>& postings(TermId t) const { return postings_[t]; }
  const std::vector<RecordPos>& title_postings(TermId t) const { return title_postings_[t]; }
  std::size_t doc_freq(TermId t) const { return postings_[t].size(); }
  /// log(N / df).
  double idf(TermId t) const { return idf_[t]; }

  const WeightedTerms& title_terms(RecordPos p) const { return title_terms_[p]; }
  const WeightedTerms& source_terms(RecordPos p) const { return source_terms_[p]; }

  std::optional<RecordPos> by_doi(std::string_view doi) const;
  const std::vector<RecordPos>* by_author_year(std::string_view surname, int year) const;

  /// Sorted unique term ids for known terms; unknown terms are dropped.
  std::vector<TermId> lookup(const std::vector<std::string>& terms) const;
  /// Record positions whose source trigram set covers at least `min_overlap`
  /// of the trigrams of `source_tokens`, restricted to `year`.
  std::vector<RecordPos> by_source_year(const std::vector<std::string>& source_tokens, int year,
                                        double min_overlap) const;

  const TextConfig& text_config() const { return cfg_; }

 private:
  TextConfig cfg_;
  std::vector<std::string> record_ids_;
  std::unordered_map<std::string, RecordPos> record_pos_;

  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_ids_;
  std::vector<std::vector<RecordPos>> postings_;
  std::vector<std::vector<RecordPos>> title_postings_;
  std::vector<double> idf_;

  std::vector<WeightedTerms> title_terms_;
  std::vector<WeightedTerms> source_terms_;

  std::unordered_map<std::string, RecordPos> doi_key_;
  std::map<std::pair<std::string, int>, std::vector<RecordPos>, std::less<>> author_year_key_;

  // trigram -> source ordinals; (source ordinal, year) -> records.
  std::unordered_map<std::string, std::vector<std::uint32_t>> source_trigram_key_;
  std::map<std::pair<std::uint32_t, int>, std::vector<RecordPos>> source_year_key_;
};

/// Distinct character trigrams of the space-joined tokens (padded with
/// spaces at both ends).
std::vector<std::string> trigrams(const std::vector<std::string>& tokens);

/// Candidate record positions for one reference, sorted by position.
std::vector<RecordPos> generate_candidate_positions(const RefElements& elements,
                                                    const InvertedIndex& index,
                                                    const BlockingParams& params);

/// Same, as record ids in id order.
std::vector<std::string> generate_candidates(const RefElements& elements,
                                             const InvertedIndex& index,
                                             const BlockingParams& params = {});

void to_json(Json& j, const Candidates& c);
void from_json(const Json& j, Candidates& c);

}  // namespace patlink
