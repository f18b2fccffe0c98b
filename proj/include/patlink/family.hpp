#pragma once

#include <string>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/ndrec.hpp"

namespace patlink {

enum class LinkOrigin { direct, family_propagated };

std::string_view to_string(LinkOrigin o);

struct CitationLink {
  std::string patent_id;
  std::string family_id;
  std::string record_id;
  LinkOrigin origin = LinkOrigin::direct;
  double score = 0.0;
  std::string provenance_ref_id;

  bool operator==(const CitationLink&) const = default;
};

/// (family_id, patent_id, record_id) order.
void sort_links(std::vector<CitationLink>& links);

/// Gives every member of a family a link to every record cited anywhere in
/// the family. Existing links (direct or already propagated) are kept; new
/// ones copy score and provenance from the best-scoring link to that record
/// in the family (ties: lower provenance ref id). Throws IntegrityError for
/// links to unknown patents or with a family id that disagrees with the
/// patent's.
std::vector<CitationLink> propagate(const std::vector<CitationLink>& links,
                                    const std::vector<Patent>& patents);

void to_json(Json& j, const CitationLink& l);
void from_json(const Json& j, CitationLink& l);

}  // namespace patlink
