#include "patlink/params.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace patlink {

std::size_t BlockingParams::rare_df_limit(std::size_t n_records) const {
  if (rare_df_max) return rare_df_max;
  auto v = static_cast<std::size_t>(std::ceil(rare_df_fraction * static_cast<double>(n_records)));
  return std::max<std::size_t>(1, v);
}

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v) {
  std::size_t used = 0;
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    out = static_cast<T>(std::stod(v, &used));
  } else {
    long long x = std::stoll(v, &used);
    if (x < 0 && std::is_unsigned_v<T>) throw std::invalid_argument("negative");
    out = static_cast<T>(x);
  }
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return out;
}

}  // namespace

PipelineParams load_params(const std::filesystem::path& path) {
  PipelineParams p;
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());

  using Setter = std::function<void(const std::string&)>;
  auto num = [](auto& field) -> Setter {
    return [&field](const std::string& v) {
      field = parse_number<std::decay_t<decltype(field)>>(v);
    };
  };
  std::map<std::string, Setter> keys{
      {"blocking.min_rare_terms", num(p.blocking.min_rare_terms)},
      {"blocking.rare_df_fraction", num(p.blocking.rare_df_fraction)},
      {"blocking.rare_df_max", num(p.blocking.rare_df_max)},
      {"blocking.max_candidates", num(p.blocking.max_candidates)},
      {"blocking.year_tolerance", num(p.blocking.year_tolerance)},
      {"blocking.trigram_min_overlap", num(p.blocking.trigram_min_overlap)},
      {"scoring.tau_auto", num(p.scoring.tau_auto)},
      {"scoring.tau_review", num(p.scoring.tau_review)},
      {"scoring.year_adjacent", num(p.scoring.year_adjacent)},
      {"scoring.year_mismatch", num(p.scoring.year_mismatch)},
      {"scoring.author_edit1", num(p.scoring.author_edit1)},
      {"scoring.author_mismatch", num(p.scoring.author_mismatch)},
      {"validation.lease_seconds", num(p.validation.lease_seconds)},
      {"validation.agreement_quorum", num(p.validation.agreement_quorum)},
      {"validation.max_verdicts", num(p.validation.max_verdicts)},
      {"text.stopwords",
       [&](const std::string& v) {
         std::filesystem::path sw = v;
         if (sw.is_relative()) sw = path.parent_path() / sw;
         p.text.stopwords = load_stopwords(sw.string());
       }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + "expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.rfind("abbrev.", 0) == 0) {
      auto shortform = normalize_text(key.substr(7));
      auto longform = normalize_text(value);
      if (shortform.empty() || longform.empty()) throw FormatError(where + "empty abbreviation");
      p.text.abbreviations[shortform] = longform;
      continue;
    }
    auto it = keys.find(key);
    if (it == keys.end()) throw FormatError(where + "unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError(where + "bad value '" + value + "' for " + key);
    }
  }
  if (!(p.scoring.tau_review <= p.scoring.tau_auto))
    throw FormatError(path.string() + ": scoring.tau_review must not exceed scoring.tau_auto");
  if (p.validation.agreement_quorum < 1 || p.validation.max_verdicts < p.validation.agreement_quorum)
    throw FormatError(path.string() + ": need 1 <= agreement_quorum <= max_verdicts");
  return p;
}

}  // namespace patlink
