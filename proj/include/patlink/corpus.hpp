#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patlink {

/// Bibliographic document types. Only the first four are citable.
enum class DocType { article, review, mini_review, conference_paper, other };

std::string_view to_string(DocType t);
/// Unknown strings map to `other`; `known` (if given) reports whether the
/// string was recognised.
DocType parse_doc_type(std::string_view s, bool* known = nullptr);
bool is_citable(DocType t);

struct BibRecord {
  std::string record_id;
  std::string title;
  std::vector<std::string> authors;
  std::string first_author_surname;
  std::string source_id;
  std::string source_title;
  int pub_year = 0;
  DocType doc_type = DocType::article;
  std::optional<std::string> doi;
  std::set<std::string> category_ids;
  std::set<std::string> sector_ids;

  bool operator==(const BibRecord&) const = default;
};

struct Patent {
  std::string patent_id;
  std::string family_id;
  int filing_year = 0;
  std::optional<int> grant_year;
  std::string title;
  std::vector<std::string> assignees;

  bool operator==(const Patent&) const = default;
};

/// Elements located in a raw reference string.
struct RefElements {
  std::optional<std::string> doi;
  std::optional<int> year;
  std::optional<std::string> first_author_surname;
  std::vector<std::string> title_tokens;
  std::vector<std::string> source_tokens;

  bool empty() const {
    return !doi && !year && !first_author_surname && title_tokens.empty() &&
           source_tokens.empty();
  }
  bool operator==(const RefElements&) const = default;
};

struct NplReference {
  std::string ref_id;
  std::string patent_id;
  std::string raw_text;
  std::optional<RefElements> elements;

  bool operator==(const NplReference&) const = default;
};

struct PaperCitationEdge {
  std::string citing_record_id;
  std::string cited_record_id;

  bool operator==(const PaperCitationEdge&) const = default;
};

struct CategoryOverride {
  enum class Action { exclude_from_category, reassign };
  std::string source_id;
  Action action = Action::exclude_from_category;
  std::string category_id;
  std::optional<std::string> replacement_category_id;

  bool operator==(const CategoryOverride&) const = default;
};

/// Thrown for malformed input lines; the message names file and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for cross-reference and uniqueness violations.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// In-memory corpus. Records, patents and refs are kept sorted by id, so
/// positional indices are a stable total order matching id order.
struct Corpus {
  std::vector<BibRecord> records;
  std::vector<Patent> patents;
  std::vector<NplReference> refs;
  std::vector<PaperCitationEdge> paper_cites;
  std::vector<CategoryOverride> overrides;

  /// Non-fatal notes collected while loading or curating.
  std::vector<std::string> warnings;
  std::size_t rejected_lines = 0;

  const BibRecord* find_record(std::string_view id) const;
  const Patent* find_patent(std::string_view id) const;
  const NplReference* find_ref(std::string_view id) const;
  std::optional<std::size_t> record_index(std::string_view id) const;
  std::optional<std::size_t> patent_index(std::string_view id) const;

  /// Sorts the tables and rebuilds id lookups. Call after mutating vectors.
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> record_pos_;
  std::unordered_map<std::string, std::size_t> patent_pos_;
  std::unordered_map<std::string, std::size_t> ref_pos_;
};

struct CorpusPaths {
  std::filesystem::path bib;
  std::filesystem::path patents;
  std::filesystem::path refs;
  std::optional<std::filesystem::path> paper_cites;
  std::optional<std::filesystem::path> overrides;

  /// Standard file names inside one directory; optional files are only set
  /// when they exist.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

struct LoadOptions {
  /// Strict mode throws on invariant violations; lenient mode rejects the
  /// offending line with a warning and keeps loading.
  bool strict = true;
  int current_year = 0;  // 0 = take from the system clock
};

int current_year();

Corpus load_corpus(const CorpusPaths& paths, const LoadOptions& opts = {});

/// Checks cross references (dangling ids, duplicate ids, self citations) on
/// an assembled corpus and reindexes it. Throws IntegrityError listing at
/// most the first 10 offenders.
void validate_corpus(Corpus& corpus);

/// Returns a copy with exclusions and reassignments applied to every record
/// of each named source. Unknown sources produce a warning and are skipped.
Corpus apply_category_overrides(const Corpus& corpus,
                                const std::vector<CategoryOverride>& overrides);

void save_corpus(const Corpus& corpus, const CorpusPaths& paths);

}  // namespace patlink
