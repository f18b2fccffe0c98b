#include "patlink/normalize.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>
#include <unicode/utf8.h>

namespace patlink {

namespace {

bool ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool ascii_lower(char c) { return c >= 'a' && c <= 'z'; }
bool ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
char lower(char c) { return ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

const icu::Normalizer2& nfkd() {
  static const icu::Normalizer2* n = [] {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* p = icu::Normalizer2::getNFKDInstance(ec);
    if (U_FAILURE(ec)) throw std::runtime_error("ICU NFKD normalizer unavailable");
    return p;
  }();
  return *n;
}

// Latin letters that carry no canonical decomposition.
std::string_view latin_fold(UChar32 c) {
  switch (c) {
    case 0x00F8: return "o";   // ø
    case 0x00E6: return "ae";  // æ
    case 0x0153: return "oe";  // œ
    case 0x0142: return "l";   // ł
    case 0x0111: return "d";   // đ
    case 0x00F0: return "d";   // ð
    case 0x00FE: return "th";  // þ
    case 0x00DF: return "ss";  // ß
    case 0x0131: return "i";   // dotless i
    default: return {};
  }
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[4];
  int32_t len = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, c, err);
  if (!err) out.append(buf, static_cast<std::size_t>(len));
}

std::string normalize_ascii(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool gap = false;
  for (char c : raw) {
    if (ascii_alnum(c)) {
      if (gap && !out.empty()) out.push_back(' ');
      gap = false;
      out.push_back(lower(c));
    } else {
      gap = true;
    }
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && ascii_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !ascii_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> norm_tokens(std::string_view raw) {
  return split_ws(normalize_text(raw));
}

void append_all(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

// ---- DOI scanning ---------------------------------------------------------

struct Span {
  std::size_t pos = 0;
  std::size_t len = 0;
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view strip_doi_tail(std::string_view s) {
  static constexpr std::array<std::string_view, 6> kQuotes{
      "\xE2\x80\x9D", "\xE2\x80\x9C", "\xE2\x80\x99", "\xE2\x80\x98", "\xC2\xBB", "\xC2\xAB"};
  for (;;) {
    if (s.empty()) return s;
    char c = s.back();
    if (c == '.' || c == ',' || c == ';' || c == ':' || c == '\'' || c == '"' || c == '!' ||
        c == '?') {
      s.remove_suffix(1);
      continue;
    }
    auto unbalanced = [&](char open, char close) {
      return std::count(s.begin(), s.end(), close) > std::count(s.begin(), s.end(), open);
    };
    if ((c == ')' && unbalanced('(', ')')) || (c == ']' && unbalanced('[', ']')) ||
        (c == '}' && unbalanced('{', '}')) || (c == '>' && unbalanced('<', '>'))) {
      s.remove_suffix(1);
      continue;
    }
    bool stripped = false;
    for (auto q : kQuotes) {
      if (ends_with(s, q)) {
        s.remove_suffix(q.size());
        stripped = true;
        break;
      }
    }
    if (!stripped) return s;
  }
}

// Registrant "10." + >=4 digits + optional ".digits" groups, then "/".
// Returns the index just past "/" or npos.
std::size_t match_prefix(std::string_view s, std::size_t pos) {
  if (s.substr(pos, 3) != "10.") return std::string_view::npos;
  std::size_t i = pos + 3, d0 = i;
  while (i < s.size() && ascii_digit(s[i])) ++i;
  if (i - d0 < 4) return std::string_view::npos;
  while (i + 1 < s.size() && s[i] == '.' && ascii_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && ascii_digit(s[i])) ++i;
  }
  if (i >= s.size() || s[i] != '/') return std::string_view::npos;
  return i + 1;
}

std::optional<Span> find_doi_span(std::string_view raw) {
  for (std::size_t pos = raw.find("10."); pos != std::string_view::npos;
       pos = raw.find("10.", pos + 1)) {
    if (pos > 0) {
      char prev = raw[pos - 1];
      if (ascii_alnum(prev) || static_cast<unsigned char>(prev) >= 0x80) continue;
    }
    std::size_t s0 = match_prefix(raw, pos);
    if (s0 == std::string_view::npos) continue;
    std::size_t i = s0;
    while (i < raw.size() && !ascii_space(raw[i])) ++i;
    auto suffix = strip_doi_tail(raw.substr(s0, i - s0));
    if (std::none_of(suffix.begin(), suffix.end(), ascii_alnum)) continue;
    return Span{pos, s0 - pos + suffix.size()};
  }
  return std::nullopt;
}

std::string ascii_lower_copy(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

// ---- segmentation helpers --------------------------------------------------

const std::unordered_set<std::string>& name_particles() {
  static const std::unordered_set<std::string> p{"van", "von", "de",  "der", "den", "da",
                                                 "del", "della", "di", "du",  "la",  "le",
                                                 "dos", "das", "ten", "ter", "bin", "al"};
  return p;
}

const std::unordered_set<std::string>& marker_words() {
  static const std::unordered_set<std::string> m{
      "vol",   "volume", "no",    "nr",     "num",      "pp",      "p",      "pg",  "pages",
      "page",  "issue",  "iss",   "suppl",  "supplement", "part",  "pt",     "ed",  "eds",
      "edition", "doi",  "http",  "https",  "dx",       "org",     "www",    "accessed",
      "available", "online", "epub", "sec", "fig",      "et",      "al",     "in",  "jan",
      "feb",   "mar",    "apr",   "may",    "jun",      "jul",     "aug",    "sep", "sept",
      "oct",   "nov",    "dec",   "january", "february", "march",  "april",  "june", "july",
      "august", "september", "october", "november", "december", "article", "e"};
  return m;
}

bool has_digit(std::string_view s) { return std::any_of(s.begin(), s.end(), ascii_digit); }

bool is_marker_token(const std::string& tok) {
  return has_digit(tok) || marker_words().count(tok) > 0 ||
         (tok.size() <= 4 && std::all_of(tok.begin(), tok.end(), [](char c) {
            return c == 'i' || c == 'v' || c == 'x';
          }));  // roman volume numbers
}

std::string strip_edge_punct(std::string_view w) {
  while (!w.empty() && (w.back() == ',' || w.back() == ';' || w.back() == ':')) w.remove_suffix(1);
  while (!w.empty() && (w.front() == '(' || w.front() == '[')) w.remove_prefix(1);
  return std::string(w);
}

// "F.", "K.S.", "J.-P.", "JP", "D.J" -- up to three capital letters joined by
// '.' or '-'.
bool is_initials(std::string_view w) {
  if (w.empty()) return false;
  int letters = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    char c = w[i];
    if (ascii_upper(c)) {
      ++letters;
    } else if (c == '.' || c == '-') {
      if (i == 0) return false;
    } else {
      return false;
    }
  }
  return letters >= 1 && letters <= 3;
}

bool is_surname_word(std::string_view w) {
  if (w.size() < 2) return false;
  if (name_particles().count(std::string(w))) return true;
  unsigned char first = static_cast<unsigned char>(w[0]);
  if (!(ascii_upper(w[0]) || first >= 0x80)) return false;
  bool lower_seen = false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    char c = w[i];
    unsigned char u = static_cast<unsigned char>(c);
    if (ascii_lower(c) || u >= 0x80) {
      lower_seen = true;
    } else if (ascii_upper(c) || c == '-' || c == '\'') {
      continue;
    } else {
      return false;
    }
  }
  return lower_seen;
}

bool is_particle(std::string_view w) { return name_particles().count(std::string(w)) > 0; }

enum class NameShape { none, full, initials_only, surname_only };

struct NameParse {
  NameShape shape = NameShape::none;
  std::vector<std::string> surname_words;
  std::vector<std::string> other_words;  // initials, connectives
};

NameParse parse_name(const std::vector<std::string>& words_in) {
  NameParse np;
  std::vector<std::string> words;
  for (const auto& w : words_in) {
    auto s = strip_edge_punct(w);
    if (!s.empty()) words.push_back(std::move(s));
  }
  std::size_t start = 0;
  while (start < words.size() &&
         (words[start] == "and" || words[start] == "&" || words[start] == "by")) {
    np.other_words.push_back(words[start]);
    ++start;
  }
  std::size_t initials = 0, surnames = 0, proper = 0;
  for (std::size_t i = start; i < words.size(); ++i) {
    const auto& w = words[i];
    if (is_initials(w)) {
      ++initials;
      np.other_words.push_back(w);
    } else if (is_surname_word(w)) {
      ++surnames;
      if (!is_particle(w)) ++proper;
      np.surname_words.push_back(w);
    } else {
      np.shape = NameShape::none;
      return np;
    }
  }
  std::size_t n = words.size() - start;
  if (n == 0) return np;
  if (surnames == 0 && initials > 0 && initials <= 3) {
    np.shape = NameShape::initials_only;
  } else if (proper >= 1 && surnames <= 3 && initials >= 1 && initials <= 3) {
    np.shape = NameShape::full;
  } else if (proper >= 1 && surnames <= 3 && initials == 0) {
    np.shape = NameShape::surname_only;
  }
  return np;
}

bool abbreviation_like(std::string_view core, const TextConfig& cfg) {
  if (core.size() <= 1) return true;
  if (core.find('.') != std::string_view::npos) return true;
  bool letters = std::all_of(core.begin(), core.end(), [](char c) {
    return ascii_upper(c) || ascii_lower(c) || static_cast<unsigned char>(c) >= 0x80;
  });
  if (ascii_upper(core[0]) && letters && core.size() <= 5) return true;
  auto key = normalize_text(core);
  return cfg.abbreviations.find(key) != cfg.abbreviations.end();
}

bool starts_upper_or_digit(std::string_view w) {
  if (w.empty()) return false;
  unsigned char c = static_cast<unsigned char>(w[0]);
  return ascii_upper(w[0]) || ascii_digit(w[0]) || c >= 0x80;
}

struct Segment {
  std::string text;
  bool quoted = false;
};

// Splits at ". " boundaries that look like element separators.
std::vector<Segment> split_periods(const std::string& chunk, const TextConfig& cfg) {
  std::vector<Segment> out;
  auto words = split_ws(chunk);
  std::vector<std::string> cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string s;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (i) s.push_back(' ');
      s += cur[i];
    }
    out.push_back({s, false});
    cur.clear();
  };
  for (std::size_t k = 0; k < words.size(); ++k) {
    const auto& w = words[k];
    cur.push_back(w);
    if (w.size() < 2 || w.back() != '.' || k + 1 >= words.size()) continue;
    if (!starts_upper_or_digit(words[k + 1])) continue;
    std::string_view core(w.data(), w.size() - 1);
    bool split;
    if (is_initials(w)) {
      split = parse_name(cur).shape == NameShape::full;
    } else {
      split = !abbreviation_like(core, cfg);
    }
    if (split) flush();
  }
  flush();

  // "W. Deep residual learning ..." -> "W." | "Deep residual learning ..."
  std::vector<Segment> fixed;
  for (auto& seg : out) {
    auto ws = split_ws(seg.text);
    std::size_t lead = 0;
    while (lead < ws.size() && is_initials(ws[lead]) && ws[lead].back() == '.') ++lead;
    // "J. Agric. ..." is an abbreviated source, not an initial and a title.
    bool abbreviated_source = false;
    if (lead > 0 && lead < ws.size() && ws[lead].size() > 1 && ws[lead].back() == '.') {
      auto next = normalize_text(std::string_view(ws[lead]).substr(0, ws[lead].size() - 1));
      abbreviated_source = cfg.abbreviations.count(next) > 0;
    }
    if (lead > 0 && ws.size() - lead >= 3 && !abbreviated_source) {
      std::string a, b;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        auto& dst = i < lead ? a : b;
        if (!dst.empty()) dst.push_back(' ');
        dst += ws[i];
      }
      fixed.push_back({a, false});
      fixed.push_back({b, false});
    } else {
      fixed.push_back(std::move(seg));
    }
  }
  return fixed;
}

bool is_open_quote(std::string_view s, std::size_t i, std::size_t& len) {
  if (s[i] == '"') {
    len = 1;
    return true;
  }
  if (s.substr(i, 3) == "\xE2\x80\x9C" || s.substr(i, 3) == "\xE2\x80\x9D") {
    len = 3;
    return true;
  }
  return false;
}

bool is_paren_year(std::string_view s, std::size_t i) {
  return i + 5 < s.size() && s[i] == '(' && ascii_digit(s[i + 1]) && ascii_digit(s[i + 2]) &&
         ascii_digit(s[i + 3]) && ascii_digit(s[i + 4]) && s[i + 5] == ')';
}

// Replaces "et al" (word bounded, optional period) by a comma and records the
// removed tokens.
std::string cut_et_al(std::string_view s, std::vector<std::string>& removed) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    bool boundary = i == 0 || !ascii_alnum(s[i - 1]);
    if (boundary && i + 5 <= s.size() && lower(s[i]) == 'e' && lower(s[i + 1]) == 't' &&
        s[i + 2] == ' ' && lower(s[i + 3]) == 'a' && lower(s[i + 4]) == 'l' &&
        (i + 5 == s.size() || !ascii_alnum(s[i + 5]))) {
      removed.push_back("et");
      removed.push_back("al");
      out += " , ";
      i += 5;
      if (i < s.size() && s[i] == '.') ++i;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::vector<Segment> split_segments(std::string_view text, const TextConfig& cfg,
                                    std::vector<std::string>& removed) {
  std::vector<Segment> segs;
  std::string cur;
  auto flush = [&] {
    for (auto& s : split_periods(cur, cfg)) segs.push_back(std::move(s));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    std::size_t qlen = 0;
    if (c == ',' || c == ';') {
      flush();
      ++i;
    } else if (is_paren_year(text, i)) {
      flush();
      append_all(removed, norm_tokens(text.substr(i, 6)));
      i += 6;
    } else if (is_open_quote(text, i, qlen)) {
      // Quoted span is one segment; an unmatched quote is just punctuation.
      std::size_t j = i + qlen;
      std::size_t close = std::string_view::npos, clen = 0;
      for (std::size_t k = j; k < text.size(); ++k) {
        std::size_t l = 0;
        if (is_open_quote(text, k, l)) {
          close = k;
          clen = l;
          break;
        }
      }
      if (close == std::string_view::npos) {
        cur.push_back(' ');
        i += qlen;
        continue;
      }
      flush();
      segs.push_back({std::string(text.substr(j, close - j)), true});
      i = close + clen;
    } else {
      cur.push_back(c);
      ++i;
    }
  }
  flush();
  return segs;
}

// Trailing volume/page/year words of a source segment.
std::size_t source_content_end(const std::vector<std::string>& words) {
  std::size_t end = words.size();
  while (end > 0) {
    auto toks = norm_tokens(words[end - 1]);
    bool marker = std::all_of(toks.begin(), toks.end(), is_marker_token);
    if (!marker) break;
    --end;
  }
  return end;
}

}  // namespace

// ---------------------------------------------------------------------------

const StopwordSet& default_stopwords() {
  static const StopwordSet s{
      "a",     "an",    "and",  "are",  "as",    "at",      "be",     "been",  "but",  "by",
      "can",   "for",   "from", "has",  "have",  "in",      "into",   "is",    "it",   "its",
      "not",   "of",    "on",   "or",   "over",  "such",    "than",   "that",  "the",  "their",
      "these", "this",  "those", "to",  "under", "upon",    "via",    "was",   "were", "which",
      "with",  "within", "without", "et", "al",   "vs",      "also",   "we",    "our",  "using"};
  return s;
}

const AbbreviationTable& default_abbreviations() {
  static const AbbreviationTable t{
      {"j", "journal"},          {"jour", "journal"},         {"int", "international"},
      {"intl", "international"}, {"natl", "national"},        {"nat", "nature"},
      {"proc", "proceedings"},   {"conf", "conference"},      {"symp", "symposium"},
      {"trans", "transactions"}, {"res", "research"},         {"rev", "review"},
      {"reviews", "review"},     {"annu", "annual"},          {"biol", "biology"},
      {"biological", "biology"}, {"chem", "chemistry"},       {"chemical", "chemistry"},
      {"biochem", "biochemistry"}, {"med", "medicine"},       {"medical", "medicine"},
      {"sci", "science"},        {"sciences", "science"},     {"scientific", "science"},
      {"eng", "engineering"},    {"technol", "technology"},   {"biotechnol", "biotechnology"},
      {"phys", "physics"},       {"physical", "physics"},     {"appl", "applied"},
      {"comput", "computer"},    {"computers", "computer"},   {"computing", "computer"},
      {"lett", "letters"},       {"inf", "information"},      {"inform", "information"},
      {"informetr", "informetrics"}, {"syst", "systems"},     {"system", "systems"},
      {"mol", "molecular"},      {"acad", "academy"},         {"soc", "society"},
      {"am", "america"},         {"american", "america"},     {"assoc", "association"},
      {"polym", "polymer"},      {"pharmacol", "pharmacological"}, {"immunol", "immunology"},
      {"ther", "therapy"},       {"mater", "materials"},      {"electron", "electronics"},
      {"commun", "communications"}, {"communication", "communications"},
      {"manag", "management"},   {"anal", "analytical"},      {"environ", "environmental"},
      {"lib", "library"},        {"bull", "bulletin"},        {"adv", "advanced"},
      {"deliv", "delivery"},     {"prog", "progress"},        {"microbiol", "microbiology"},
      {"genet", "genetics"},     {"neurosci", "neuroscience"}, {"mech", "mechanics"},
      {"stat", "statistics"},    {"electr", "electrical"},    {"acoust", "acoustical"},
      {"metab", "metabolic"},    {"educ", "education"},       {"secur", "security"},
      {"agric", "agriculture"},  {"biophys", "biophysical"},  {"mach", "machine"},
      {"intell", "intelligence"}, {"ann", "annals"},          {"eur", "european"},
      {"clin", "clinical"},      {"exp", "experimental"},     {"pharm", "pharmaceutical"},
      {"struct", "structural"},  {"opt", "optics"},           {"math", "mathematics"},
      {"mathematical", "mathematics"}, {"ieee", "ieee"}};
  return t;
}

const TextConfig& default_text_config() {
  static const TextConfig cfg{default_stopwords(), default_abbreviations()};
  return cfg;
}

std::string normalize_text(std::string_view raw) {
  if (std::all_of(raw.begin(), raw.end(),
                  [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
    return normalize_ascii(raw);
  }
  UErrorCode ec = U_ZERO_ERROR;
  icu::UnicodeString s =
      icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString d = nfkd().normalize(s, ec);
  d.toLower(icu::Locale::getRoot());
  icu::UnicodeString d2 = nfkd().normalize(d, ec);
  if (U_FAILURE(ec)) d2 = d;

  std::string out;
  out.reserve(raw.size());
  bool gap = false;
  for (int32_t i = 0; i < d2.length();) {
    UChar32 c = d2.char32At(i);
    i += U16_LENGTH(c);
    auto cat = u_charType(c);
    if (cat == U_NON_SPACING_MARK || cat == U_ENCLOSING_MARK || cat == U_COMBINING_SPACING_MARK)
      continue;
    auto folded = latin_fold(c);
    if (!folded.empty() || u_isalnum(c)) {
      if (gap && !out.empty()) out.push_back(' ');
      gap = false;
      if (!folded.empty()) {
        out += folded;
      } else {
        append_utf8(out, c);
      }
    } else {
      gap = true;
    }
  }
  return out;
}

std::optional<std::string> extract_doi(std::string_view raw) {
  auto span = find_doi_span(raw);
  if (!span) return std::nullopt;
  return ascii_lower_copy(raw.substr(span->pos, span->len));
}

bool is_doi(std::string_view s) {
  std::size_t s0 = match_prefix(s, 0);
  if (s0 == std::string_view::npos || s0 >= s.size()) return false;
  auto suffix = s.substr(s0);
  if (std::any_of(suffix.begin(), suffix.end(), ascii_space)) return false;
  return std::any_of(suffix.begin(), suffix.end(), ascii_alnum);
}

std::optional<int> extract_year(std::string_view raw, int max_year) {
  if (max_year == 0) max_year = current_year();
  std::string text(raw);
  if (auto span = find_doi_span(raw)) {
    std::fill(text.begin() + static_cast<std::ptrdiff_t>(span->pos),
              text.begin() + static_cast<std::ptrdiff_t>(span->pos + span->len), ' ');
  }
  auto is_dash_at = [&](std::size_t p, std::size_t& len) {
    if (p < text.size() && text[p] == '-') {
      len = 1;
      return true;
    }
    if (p + 3 <= text.size() && (text.compare(p, 3, "\xE2\x80\x93") == 0 ||
                                 text.compare(p, 3, "\xE2\x80\x94") == 0)) {
      len = 3;
      return true;
    }
    return false;
  };
  auto dash_before = [&](std::size_t b) {
    // digits, dash, then our run
    if (b >= 2 && text[b - 1] == '-' && ascii_digit(text[b - 2])) return true;
    if (b >= 4 && (text.compare(b - 3, 3, "\xE2\x80\x93") == 0 ||
                   text.compare(b - 3, 3, "\xE2\x80\x94") == 0) &&
        ascii_digit(text[b - 4]))
      return true;
    return false;
  };

  std::optional<int> paren, plain;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!ascii_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < text.size() && ascii_digit(text[i])) ++i;
    std::size_t e = i;
    if (e - b != 4) continue;
    int value = std::stoi(text.substr(b, 4));
    if (value < 1800 || value > max_year) continue;
    std::size_t dl = 0;
    bool range = dash_before(b) || (is_dash_at(e, dl) && e + dl < text.size() &&
                                    ascii_digit(text[e + dl]));
    if (b > 0 && text[b - 1] == '(' && e < text.size() && text[e] == ')') {
      paren = value;
      continue;
    }
    if (!range) plain = value;
  }
  return paren ? paren : plain;
}

std::vector<std::string> tokenize_terms(std::string_view normalized, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  for (auto& t : split_ws(normalized)) {
    if (t.size() < 2 || stopwords.count(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> source_terms(std::string_view source_text, const TextConfig& cfg) {
  std::vector<std::string> expanded;
  for (auto& t : norm_tokens(source_text)) {
    auto it = cfg.abbreviations.find(t);
    if (it == cfg.abbreviations.end()) {
      expanded.push_back(std::move(t));
    } else {
      append_all(expanded, split_ws(it->second));
    }
  }
  std::vector<std::string> out;
  for (auto& t : expanded) {
    if (t.size() < 2 || cfg.stopwords.count(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

Segmentation segment_reference_traced(std::string_view raw, const TextConfig& cfg, int max_year) {
  Segmentation out;
  RefElements& el = out.elements;
  auto& unassigned = out.unassigned;

  std::string text(raw);
  if (auto span = find_doi_span(raw)) {
    el.doi = ascii_lower_copy(raw.substr(span->pos, span->len));
    append_all(unassigned, norm_tokens(raw.substr(span->pos, span->len)));
    text.replace(span->pos, span->len, " , ");
  }
  el.year = extract_year(raw, max_year);
  text = cut_et_al(text, unassigned);

  auto segs = split_segments(text, cfg, unassigned);

  // Leading author run.
  std::size_t k = 0;
  while (k < segs.size()) {
    if (segs[k].quoted) break;
    auto words = split_ws(segs[k].text);
    if (words.empty()) {
      ++k;
      continue;
    }
    auto np = parse_name(words);
    bool take = np.shape == NameShape::full || np.shape == NameShape::initials_only;
    if (np.shape == NameShape::surname_only && k + 1 < segs.size() && !segs[k + 1].quoted &&
        parse_name(split_ws(segs[k + 1].text)).shape == NameShape::initials_only) {
      take = true;
    }
    if (!take) break;
    if (!el.first_author_surname && !np.surname_words.empty()) {
      std::string joined;
      for (const auto& w : np.surname_words) joined += w + " ";
      auto surname = normalize_text(joined);
      if (!surname.empty()) {
        el.first_author_surname = surname;
        append_all(out.element_tokens, split_ws(surname));
      }
      for (const auto& w : np.other_words) append_all(unassigned, norm_tokens(w));
    } else {
      append_all(unassigned, norm_tokens(segs[k].text));
    }
    ++k;
  }

  // Content vs. marker segments.
  std::vector<std::size_t> content;
  for (std::size_t i = k; i < segs.size(); ++i) {
    auto toks = norm_tokens(segs[i].text);
    if (toks.empty()) continue;
    if (!segs[i].quoted && std::all_of(toks.begin(), toks.end(), is_marker_token)) {
      append_all(unassigned, toks);
      continue;
    }
    content.push_back(i);
  }

  std::optional<std::size_t> title_seg, source_seg;
  if (content.size() == 1) {
    title_seg = content[0];
  } else if (content.size() >= 2) {
    source_seg = content.back();
    std::size_t best = 0;
    for (std::size_t c = 0; c + 1 < content.size(); ++c) {
      auto n = tokenize_terms(normalize_text(segs[content[c]].text), cfg.stopwords).size();
      if (!title_seg || n > best) {
        title_seg = content[c];
        best = n;
      }
    }
  }

  for (std::size_t c : content) {
    const auto& seg = segs[c];
    if (title_seg && c == *title_seg) {
      for (auto& t : norm_tokens(seg.text)) {
        if (t.size() < 2 || cfg.stopwords.count(t)) {
          unassigned.push_back(t);
        } else {
          out.element_tokens.push_back(t);
          el.title_tokens.push_back(t);
        }
      }
    } else if (source_seg && c == *source_seg) {
      auto words = split_ws(seg.text);
      std::size_t begin = 0;
      while (begin < words.size() && (normalize_text(words[begin]) == "in")) ++begin;
      std::size_t end = seg.quoted ? words.size() : source_content_end(words);
      if (end < begin) end = begin;
      std::string body;
      for (std::size_t w = 0; w < words.size(); ++w) {
        auto toks = norm_tokens(words[w]);
        if (w >= begin && w < end) {
          append_all(out.element_tokens, toks);
          body += words[w] + " ";
        } else {
          append_all(unassigned, toks);
        }
      }
      el.source_tokens = source_terms(body, cfg);
    } else {
      append_all(unassigned, norm_tokens(seg.text));
    }
  }
  return out;
}

RefElements segment_reference(std::string_view raw, const TextConfig& cfg, int max_year) {
  return segment_reference_traced(raw, cfg, max_year).elements;
}

std::vector<NplReference> normalize_references(std::vector<NplReference> refs,
                                               const TextConfig& cfg) {
  std::sort(refs.begin(), refs.end(),
            [](const NplReference& a, const NplReference& b) { return a.ref_id < b.ref_id; });
  std::unordered_map<std::string, std::size_t> representative;
  int year = current_year();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto key = normalize_text(refs[i].raw_text);
    auto [it, inserted] = representative.emplace(key, i);
    if (inserted) {
      refs[i].elements = segment_reference(refs[i].raw_text, cfg, year);
    } else {
      refs[i].elements = refs[it->second].elements;
    }
  }
  return refs;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file " + path);
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (auto& t : split_ws(normalize_text(line))) out.insert(std::move(t));
  }
  return out;
}

}  // namespace patlink
