#include "patlink/family.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "patlink/parallel.hpp"

namespace patlink {

std::string_view to_string(LinkOrigin o) {
  return o == LinkOrigin::direct ? "direct" : "family_propagated";
}

void sort_links(std::vector<CitationLink>& links) {
  std::sort(links.begin(), links.end(), [](const CitationLink& a, const CitationLink& b) {
    return std::tie(a.family_id, a.patent_id, a.record_id) <
           std::tie(b.family_id, b.patent_id, b.record_id);
  });
}

namespace {

// a is a better source for a record than b.
bool stronger(const CitationLink& a, const CitationLink& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.provenance_ref_id < b.provenance_ref_id;
}

// For the same (patent, record): direct beats propagated, then stronger.
bool preferred(const CitationLink& a, const CitationLink& b) {
  if (a.origin != b.origin) return a.origin == LinkOrigin::direct;
  return stronger(a, b);
}

}  // namespace

std::vector<CitationLink> propagate(const std::vector<CitationLink>& links,
                                    const std::vector<Patent>& patents) {
  std::unordered_map<std::string, const Patent*> by_id;
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& p : patents) {
    by_id.emplace(p.patent_id, &p);
    members[p.family_id].push_back(p.patent_id);
  }
  for (auto& [_, m] : members) std::sort(m.begin(), m.end());

  std::map<std::string, std::vector<const CitationLink*>> by_family;
  std::vector<std::string> unknown;
  for (const auto& l : links) {
    auto it = by_id.find(l.patent_id);
    if (it == by_id.end()) {
      unknown.push_back(l.patent_id);
      continue;
    }
    if (it->second->family_id != l.family_id)
      throw IntegrityError("link " + l.patent_id + " -> " + l.record_id + " has family " + l.family_id +
                           " but the patent belongs to " + it->second->family_id);
    by_family[l.family_id].push_back(&l);
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
    std::string msg = "links reference unknown patents:";
    for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) msg += " " + unknown[i];
    throw IntegrityError(msg);
  }

  std::vector<std::pair<const std::string*, const std::vector<const CitationLink*>*>> work;
  for (const auto& [fam, ls] : by_family) work.emplace_back(&fam, &ls);
  std::vector<std::vector<CitationLink>> per_family(work.size());

  parallel_for(work.size(), [&](std::size_t w) {
    const auto& fam = *work[w].first;
    const auto& ls = *work[w].second;
    std::map<std::string, const CitationLink*> best_source;  // record -> link
    std::map<std::pair<std::string, std::string>, const CitationLink*> existing;
    for (const auto* l : ls) {
      auto& b = best_source[l->record_id];
      if (!b || stronger(*l, *b)) b = l;
      auto& e = existing[{l->patent_id, l->record_id}];
      if (!e || preferred(*l, *e)) e = l;
    }
    auto& out = per_family[w];
    for (const auto& patent : members.at(fam)) {
      for (const auto& [record, src] : best_source) {
        auto it = existing.find({patent, record});
        if (it != existing.end()) {
          out.push_back(*it->second);
        } else {
          CitationLink l = *src;
          l.patent_id = patent;
          l.origin = LinkOrigin::family_propagated;
          out.push_back(std::move(l));
        }
      }
    }
  });

  std::vector<CitationLink> out;
  for (auto& v : per_family) out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  sort_links(out);
  return out;
}

void to_json(Json& j, const CitationLink& l) {
  j = Json{{"patent_id", l.patent_id},         {"family_id", l.family_id},
           {"record_id", l.record_id},         {"origin", to_string(l.origin)},
           {"score", l.score},                 {"provenance_ref_id", l.provenance_ref_id}};
}

void from_json(const Json& j, CitationLink& l) {
  l.patent_id = j.at("patent_id").get<std::string>();
  l.family_id = j.at("family_id").get<std::string>();
  l.record_id = j.at("record_id").get<std::string>();
  auto origin = j.value("origin", std::string("direct"));
  if (origin == "direct") {
    l.origin = LinkOrigin::direct;
  } else if (origin == "family_propagated") {
    l.origin = LinkOrigin::family_propagated;
  } else {
    throw std::invalid_argument("unknown link origin '" + origin + "'");
  }
  l.score = j.value("score", 0.0);
  l.provenance_ref_id = j.value("provenance_ref_id", std::string{});
}

}  // namespace patlink
