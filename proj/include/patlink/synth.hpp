#pragma once

// Synthetic corpus with planted ground truth: bibliographic records, patent
// references citing some of them through corrupted strings, and distractor
// references whose target is absent from the corpus.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/ndrec.hpp"

namespace patlink {

struct SynthParams {
  std::uint64_t seed = 20190101;
  std::size_t n_records = 2000;
  std::size_t n_planted = 1000;
  std::size_t n_distractors = 1000;
  std::size_t n_journals = 100;
  std::size_t vocabulary = 5000;
  double zipf_exponent = 1.0;
  int title_min = 8;
  int title_max = 14;
  int year_from = 1996;
  int year_to = 2016;
  double record_doi_rate = 0.7;

  // Per planted reference.
  double abbreviate_source_rate = 0.5;
  double token_drop_rate = 0.1;
  double ocr_rate = 0.05;
  double ocr_char_rate = 0.03;  // per title character, at least one
  double missing_doi_rate = 0.5;
  double missing_year_rate = 0.05;
  /// Distractors sharing author, journal and year with a corpus record.
  double near_miss_rate = 0.3;
};

struct SynthTruth {
  std::string ref_id;
  std::optional<std::string> record_id;  // absent for distractors
  std::vector<std::string> corruptions;

  bool operator==(const SynthTruth&) const = default;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<SynthTruth> truth;  // sorted by ref_id
};

SynthCorpus generate_synthetic(const SynthParams& params = {});

void to_json(Json& j, const SynthTruth& t);
void from_json(const Json& j, SynthTruth& t);

}  // namespace patlink
