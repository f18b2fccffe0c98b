#pragma once

#include <optional>
#include <string>
#include <vector>

#include "patlink/blocking.hpp"
#include "patlink/corpus.hpp"
#include "patlink/ndrec.hpp"
#include "patlink/params.hpp"

namespace patlink {

/// Per-element scores; std::nullopt means neutral (no evidence either way).
struct ElementScores {
  std::optional<double> doi;
  std::optional<double> year;
  std::optional<double> author;
  std::optional<double> title;
  std::optional<double> source;

  bool operator==(const ElementScores&) const = default;
};

enum class MatchStatus { auto_accepted, needs_review, rejected };

std::string_view to_string(MatchStatus s);
MatchStatus parse_match_status(std::string_view s);

struct ScoredCandidate {
  std::string record_id;
  double score = 0.0;

  bool operator==(const ScoredCandidate&) const = default;
};

struct MatchResult {
  std::string ref_id;
  std::optional<std::string> best_record_id;
  double score = 0.0;
  MatchStatus status = MatchStatus::rejected;
  std::vector<ScoredCandidate> runner_ups;  // at most 5, descending

  bool operator==(const MatchResult&) const = default;
};

/// Product of the non-neutral scores; 0 when neither doi nor title is
/// non-neutral.
double combine_scores(const ElementScores& es);

MatchStatus triage(double score, const ScoringParams& params);

/// Levenshtein distance, capped: returns cap + 1 once it is exceeded.
std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t cap = 2);

/// A reference prepared against an index: term ids are looked up once and
/// every candidate is scored against the index's per-record weights.
class RefScorer {
 public:
  RefScorer(const RefElements& elements, const Corpus& corpus, const InvertedIndex& index,
            const ScoringParams& params = {});

  ElementScores elements(RecordPos p) const;
  double score(RecordPos p) const { return combine_scores(elements(p)); }
  const RefElements& ref() const { return e_; }

 private:
  const RefElements& e_;
  const Corpus& corpus_;
  const InvertedIndex& index_;
  ScoringParams params_;
  std::vector<TermId> title_ids_;
  std::vector<TermId> source_ids_;
};

/// Element scores of one pair. Uses the index's precomputed record terms
/// when the record is indexed, otherwise tokenizes the record on the fly
/// (unknown terms weigh as if their df were 1).
ElementScores score_elements(const RefElements& elements, const BibRecord& record,
                             const Corpus& corpus, const InvertedIndex& index,
                             const ScoringParams& params = {});

/// Scores every candidate and picks the best (ties: exact DOI, exact year,
/// lower record id).
MatchResult resolve_reference(const std::string& ref_id, const RefElements& elements,
                              const std::vector<RecordPos>& candidates, const Corpus& corpus,
                              const InvertedIndex& index, const ScoringParams& params = {});

MatchResult resolve_reference(const std::string& ref_id, const RefElements& elements,
                              const std::vector<std::string>& candidate_ids,
                              const Corpus& corpus, const InvertedIndex& index,
                              const ScoringParams& params = {});

/// Blocks and resolves every ref (refs must carry elements), in parallel.
/// Output is in ref order.
std::vector<MatchResult> match_all(const std::vector<NplReference>& refs, const Corpus& corpus,
                                   const InvertedIndex& index, const BlockingParams& blocking,
                                   const ScoringParams& scoring,
                                   unsigned threads = 0);

void to_json(Json& j, const ScoredCandidate& c);
void from_json(const Json& j, ScoredCandidate& c);
void to_json(Json& j, const MatchResult& m);
void from_json(const Json& j, MatchResult& m);

}  // namespace patlink
