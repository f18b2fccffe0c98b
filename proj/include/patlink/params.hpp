#pragma once

#include <cstddef>
#include <filesystem>

#include "patlink/normalize.hpp"

namespace patlink {

struct BlockingParams {
  std::size_t min_rare_terms = 2;
  /// rare_df_max = max(1, ceil(rare_df_fraction * N)) unless set explicitly.
  double rare_df_fraction = 0.01;
  std::size_t rare_df_max = 0;
  /// 0 disables the cap.
  std::size_t max_candidates = 200;
  int year_tolerance = 1;
  double trigram_min_overlap = 0.5;

  std::size_t rare_df_limit(std::size_t n_records) const;
};

struct ScoringParams {
  double tau_auto = 0.90;
  double tau_review = 0.50;
  double year_adjacent = 0.5;
  double year_mismatch = 0.05;
  double author_edit1 = 0.8;
  double author_mismatch = 0.1;
  /// Uniform multiplier on idf weights. Ratios are scale free, so this only
  /// exists to let tests check that.
  double idf_scale = 1.0;
};

struct ValidationParams {
  long long lease_seconds = 300;
  int agreement_quorum = 1;
  int max_verdicts = 3;
};

struct PipelineParams {
  BlockingParams blocking;
  ScoringParams scoring;
  ValidationParams validation;
  TextConfig text = default_text_config();
};

/// Reads `key = value` lines ('#' comments). `abbrev.<short> = <long>`
/// entries extend the abbreviation table; `text.stopwords = <file>` replaces
/// the stopword list (relative paths resolve against the params file).
/// Unknown keys and unparsable values throw FormatError.
PipelineParams load_params(const std::filesystem::path& path);

}  // namespace patlink
