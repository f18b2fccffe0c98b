#pragma once

// Reference-string preprocessing: text folding, DOI/year location, element
// segmentation and term tokenization. Every function here is pure.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "patlink/corpus.hpp"

namespace patlink {

using StopwordSet = std::unordered_set<std::string>;
/// Abbreviated source word -> expansion, both already normalized
/// (e.g. "j" -> "journal", "biol" -> "biological").
using AbbreviationTable = std::map<std::string, std::string, std::less<>>;

struct TextConfig {
  StopwordSet stopwords;
  AbbreviationTable abbreviations;
};

/// Built-in minimal English stopword list (mirrors config/stopwords.txt).
const StopwordSet& default_stopwords();
/// Built-in source-title abbreviation table (mirrors config/scoring.params).
const AbbreviationTable& default_abbreviations();
const TextConfig& default_text_config();

/// Lowercases, folds diacritics, turns punctuation/controls into single
/// spaces and trims. Idempotent.
std::string normalize_text(std::string_view raw);

/// First DOI-shaped substring, lowercased, trailing punctuation stripped.
std::optional<std::string> extract_doi(std::string_view raw);
/// Full-string DOI grammar check: "10." registrant "/" suffix, no spaces.
bool is_doi(std::string_view s);

/// Parenthesized 4-digit year first, else the rightmost standalone 4-digit
/// year within [1800, max_year]. Digits inside a DOI or a numeric range
/// (e.g. page spans) are not candidates.
std::optional<int> extract_year(std::string_view raw, int max_year = 0);

/// Splits on whitespace, drops tokens shorter than 2 bytes and stopwords.
/// Order and duplicates are preserved.
std::vector<std::string> tokenize_terms(std::string_view normalized,
                                        const StopwordSet& stopwords);

/// Normalized, abbreviation-expanded, tokenized source title.
std::vector<std::string> source_terms(std::string_view source_text, const TextConfig& cfg);

/// Segmentation result with a partition of the normalized input tokens:
/// `element_tokens` are the tokens the author/title/source elements were
/// built from (before stopword filtering and abbreviation expansion),
/// `unassigned` holds everything else (initials, co-authors, volume/page
/// markers, stopwords, DOI pieces, extra middle segments).
struct Segmentation {
  RefElements elements;
  std::vector<std::string> element_tokens;
  std::vector<std::string> unassigned;
};

Segmentation segment_reference_traced(std::string_view raw, const TextConfig& cfg,
                                      int max_year = 0);

RefElements segment_reference(std::string_view raw,
                              const TextConfig& cfg = default_text_config(),
                              int max_year = 0);

/// Segments every reference, unifying identical normalized strings: the
/// first ref (in ref_id order) of each group is segmented and the result is
/// fanned out to the others.
std::vector<NplReference> normalize_references(std::vector<NplReference> refs,
                                               const TextConfig& cfg = default_text_config());

/// Loads a stopword file (one word per line, '#' comments).
StopwordSet load_stopwords(const std::string& path);

}  // namespace patlink
