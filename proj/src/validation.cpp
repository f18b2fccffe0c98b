#include "patlink/validation.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>
#include <sstream>

#include "patlink/normalize.hpp"

namespace patlink {

Millis system_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string_view to_string(TaskState s) {
  switch (s) {
    case TaskState::open: return "open";
    case TaskState::accepted: return "accepted";
    case TaskState::rejected: return "rejected";
    case TaskState::disputed: return "disputed";
  }
  return "open";
}

TaskState VerdictTally::add(const std::optional<std::string>& choice, const ValidationParams& params) {
  if (state != TaskState::open) return state;
  ++n;
  auto key = choice.value_or("");
  if (++counts[key] >= params.agreement_quorum) {
    state = choice ? TaskState::accepted : TaskState::rejected;
    chosen = choice;
  } else if (n >= params.max_verdicts) {
    state = TaskState::disputed;
  }
  return state;
}

namespace {

// Best first, then runner-ups; at most five, descending by score.
std::vector<ScoredCandidate> ranked_candidates(const MatchResult& m) {
  std::vector<ScoredCandidate> out;
  if (m.best_record_id) out.push_back({*m.best_record_id, m.score});
  for (const auto& r : m.runner_ups) {
    if (out.size() == 5) break;
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; });
  return out;
}

std::string render_citation(const BibRecord& r) {
  std::ostringstream os;
  if (!r.authors.empty()) {
    os << r.authors.front();
    if (r.authors.size() > 1) os << " et al.";
  } else if (!r.first_author_surname.empty()) {
    os << r.first_author_surname;
  }
  os << " (" << r.pub_year << "). " << r.title << ". " << r.source_title;
  if (r.doi) os << ". doi:" << *r.doi;
  return os.str();
}

std::vector<std::string> display_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in(normalize_text(text));
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::optional<CitationLink> link_for(const std::string& ref_id, const std::string& record_id, double score,
                                     const Corpus& corpus) {
  const auto* ref = corpus.find_ref(ref_id);
  if (!ref) throw IntegrityError("match for unknown ref_id " + ref_id);
  const auto* pat = corpus.find_patent(ref->patent_id);
  if (!pat) throw IntegrityError("ref " + ref_id + " points to unknown patent " + ref->patent_id);
  return CitationLink{pat->patent_id, pat->family_id, record_id, LinkOrigin::direct, score, ref_id};
}

}  // namespace

ValidationQueue::ValidationQueue(const Corpus& corpus, ValidationParams params, Clock clock)
    : corpus_(corpus), params_(params), clock_(std::move(clock)) {}

ValidationQueue::~ValidationQueue() = default;

ValidationQueue::Entry* ValidationQueue::find(const std::string& ref_id) {
  auto it = pos_.find(ref_id);
  return it == pos_.end() ? nullptr : &entries_[it->second];
}

std::size_t ValidationQueue::enqueue(const std::vector<MatchResult>& matches) {
  for (const auto& m : matches)
    if (m.status != MatchStatus::needs_review)
      throw std::invalid_argument("enqueue: match for " + m.ref_id + " has status " +
                                  std::string(to_string(m.status)) + ", expected needs_review");
  std::unique_lock lock(mu_);
  std::size_t created = 0;
  for (const auto& m : matches) {
    if (pos_.count(m.ref_id)) continue;
    Entry e;
    e.task.ref_id = m.ref_id;
    if (const auto* ref = corpus_.find_ref(m.ref_id)) e.task.raw_text = ref->raw_text;
    e.task.raw_tokens = display_tokens(e.task.raw_text);
    for (const auto& c : ranked_candidates(m)) {
      TaskCandidate tc{c.record_id, c.score, c.record_id, {}};
      if (const auto* r = corpus_.find_record(c.record_id)) {
        tc.citation = render_citation(*r);
        tc.tokens = display_tokens(r->title + " " + r->source_title);
      }
      e.task.candidates.push_back(std::move(tc));
    }
    pos_.emplace(m.ref_id, entries_.size());
    entries_.push_back(std::move(e));
    ++created;
  }
  return created;
}

void ValidationQueue::attach_log(const std::filesystem::path& path) {
  std::unique_lock lock(mu_);
  if (std::filesystem::exists(path)) {
    for_each_ndrec(path, [&](const Json& j, std::size_t line) {
      auto d = j.get<Decision>();
      Entry* e = find(d.ref_id);
      if (!e) throw FormatError(path.string() + ":" + std::to_string(line) + ": unknown ref_id " + d.ref_id);
      apply(*e, d);
    });
  }
  writer_ = std::make_unique<NdrecWriter>(path, true);
}

TaskState ValidationQueue::apply(Entry& e, const Decision& d) {
  e.deciders.push_back(d.validator_id);
  e.task.lease.reset();
  ++e.task.verdict_count;
  e.task.state = e.tally.add(d.chosen_record_id, params_);
  e.task.chosen_record_id = e.tally.chosen;
  if (d.request_id) request_ids_.emplace(*d.request_id, log_.size());
  log_.push_back(d);
  return e.task.state;
}

std::optional<ReviewTask> ValidationQueue::lease_task(const std::string& validator_id,
                                                      std::optional<long long> lease_seconds) {
  if (validator_id.empty()) throw DecisionError(DecisionError::Kind::bad_request, "validator_id is empty");
  const Millis now = clock_();
  const Millis expiry = now + 1000 * lease_seconds.value_or(params_.lease_seconds);
  std::unique_lock lock(mu_);
  Entry* pick = nullptr;
  for (auto& e : entries_) {
    if (e.task.state != TaskState::open) continue;
    if (e.task.lease && e.task.lease->expires_at > now) {
      if (e.task.lease->validator_id == validator_id) {
        pick = &e;
        break;
      }
      continue;
    }
    if (!pick && std::find(e.deciders.begin(), e.deciders.end(), validator_id) == e.deciders.end()) pick = &e;
  }
  if (!pick) return std::nullopt;
  pick->task.lease = Lease{validator_id, expiry};
  return pick->task;
}

TaskState ValidationQueue::submit_decision(Decision d) {
  using K = DecisionError::Kind;
  if (d.validator_id.empty()) throw DecisionError(K::bad_request, "validator_id is empty");
  const Millis now = clock_();
  if (d.timestamp == 0) d.timestamp = now;
  std::unique_lock lock(mu_);
  Entry* e = find(d.ref_id);
  if (!e) throw DecisionError(K::not_found, "no task for ref_id " + d.ref_id);
  if (d.request_id) {
    auto it = request_ids_.find(*d.request_id);
    if (it != request_ids_.end()) {
      const auto& prior = log_[it->second];
      if (prior.ref_id != d.ref_id || prior.validator_id != d.validator_id ||
          prior.chosen_record_id != d.chosen_record_id)
        throw DecisionError(K::conflict, "request_id " + *d.request_id + " already used for another decision");
      return e->task.state;
    }
  }
  if (e->task.state != TaskState::open)
    throw DecisionError(K::conflict, "task " + d.ref_id + " is already " + std::string(to_string(e->task.state)));
  if (std::find(e->deciders.begin(), e->deciders.end(), d.validator_id) != e->deciders.end())
    throw DecisionError(K::conflict, "validator " + d.validator_id + " already decided " + d.ref_id);
  if (e->task.lease && e->task.lease->expires_at > now && e->task.lease->validator_id != d.validator_id)
    throw DecisionError(K::conflict, "task " + d.ref_id + " is leased to another validator");
  if (d.chosen_record_id) {
    const auto& cs = e->task.candidates;
    if (std::none_of(cs.begin(), cs.end(),
                     [&](const TaskCandidate& c) { return c.record_id == *d.chosen_record_id; }))
      throw DecisionError(K::bad_request, "record " + *d.chosen_record_id + " is not a candidate of " + d.ref_id);
  }
  if (writer_) {
    writer_->write(d);
    writer_->flush();
  }
  return apply(*e, d);
}

std::optional<ReviewTask> ValidationQueue::task(const std::string& ref_id) const {
  std::shared_lock lock(mu_);
  auto it = pos_.find(ref_id);
  if (it == pos_.end()) return std::nullopt;
  return entries_[it->second].task;
}

QueueStats ValidationQueue::stats() const {
  const Millis now = clock_();
  std::shared_lock lock(mu_);
  QueueStats s;
  s.total = entries_.size();
  s.decisions = log_.size();
  for (const auto& e : entries_) {
    switch (e.task.state) {
      case TaskState::open:
        ++s.open;
        if (e.task.lease && e.task.lease->expires_at > now) ++s.leased;
        break;
      case TaskState::accepted: ++s.accepted; break;
      case TaskState::rejected: ++s.rejected; break;
      case TaskState::disputed: ++s.disputed; break;
    }
  }
  return s;
}

std::vector<Decision> ValidationQueue::decisions() const {
  std::shared_lock lock(mu_);
  return log_;
}

ExportResult export_links(const std::vector<MatchResult>& matches, const std::vector<Decision>& decisions,
                          const ValidationParams& params, const Corpus& corpus) {
  struct Review {
    const MatchResult* match;
    VerdictTally tally;
    std::set<std::string> deciders;
  };
  std::map<std::string, Review> reviews;
  std::vector<const MatchResult*> accepted;
  for (const auto& m : matches) {
    if (m.status == MatchStatus::auto_accepted && m.best_record_id) accepted.push_back(&m);
    if (m.status == MatchStatus::needs_review) reviews.emplace(m.ref_id, Review{&m, {}, {}});
  }
  std::set<std::string> seen_tokens;
  for (const auto& d : decisions) {
    auto it = reviews.find(d.ref_id);
    if (it == reviews.end()) continue;
    if (d.request_id && !seen_tokens.insert(*d.request_id).second) continue;
    auto& r = it->second;
    if (!r.deciders.insert(d.validator_id).second) continue;
    if (d.chosen_record_id) {
      auto cands = ranked_candidates(*r.match);
      if (std::none_of(cands.begin(), cands.end(),
                       [&](const ScoredCandidate& c) { return c.record_id == *d.chosen_record_id; }))
        continue;
    }
    r.tally.add(d.chosen_record_id, params);
  }

  ExportResult out;
  std::map<std::pair<std::string, std::string>, CitationLink> best;
  auto keep = [&](CitationLink l) {
    auto key = std::make_pair(l.patent_id, l.record_id);
    auto it = best.find(key);
    if (it == best.end() || l.score > it->second.score ||
        (l.score == it->second.score && l.provenance_ref_id < it->second.provenance_ref_id))
      best[key] = std::move(l);
  };
  for (const auto* m : accepted) keep(*link_for(m->ref_id, *m->best_record_id, m->score, corpus));
  for (const auto& [ref_id, r] : reviews) {
    switch (r.tally.state) {
      case TaskState::accepted: {
        double score = 0.0;
        for (const auto& c : ranked_candidates(*r.match))
          if (c.record_id == *r.tally.chosen) score = c.score;
        keep(*link_for(ref_id, *r.tally.chosen, score, corpus));
        break;
      }
      case TaskState::rejected: out.rejected.push_back(ref_id); break;
      case TaskState::disputed: out.disputed.push_back(ref_id); break;
      case TaskState::open: out.pending.push_back(ref_id); break;
    }
  }
  for (auto& [_, l] : best) out.links.push_back(std::move(l));
  sort_links(out.links);
  return out;
}

void to_json(Json& j, const Decision& d) {
  j = Json{{"ref_id", d.ref_id},
           {"chosen_record_id", d.chosen_record_id ? Json(*d.chosen_record_id) : Json(nullptr)},
           {"validator_id", d.validator_id},
           {"timestamp", d.timestamp}};
  if (d.request_id) j["request_id"] = *d.request_id;
}

void from_json(const Json& j, Decision& d) {
  d.ref_id = j.at("ref_id").get<std::string>();
  auto c = j.find("chosen_record_id");
  d.chosen_record_id =
      (c == j.end() || c->is_null()) ? std::nullopt : std::optional<std::string>(c->get<std::string>());
  d.validator_id = j.at("validator_id").get<std::string>();
  d.timestamp = j.value("timestamp", Millis{0});
  auto r = j.find("request_id");
  d.request_id = (r == j.end() || r->is_null()) ? std::nullopt : std::optional<std::string>(r->get<std::string>());
}

void to_json(Json& j, const ReviewTask& t) {
  Json cands = Json::array();
  for (std::size_t i = 0; i < t.candidates.size(); ++i) {
    const auto& c = t.candidates[i];
    cands.push_back({{"key", i + 1},
                     {"record_id", c.record_id},
                     {"score", c.score},
                     {"citation", c.citation},
                     {"tokens", c.tokens}});
  }
  j = Json{{"ref_id", t.ref_id},
           {"raw_text", t.raw_text},
           {"raw_tokens", t.raw_tokens},
           {"candidates", cands},
           {"verdict_count", t.verdict_count},
           {"state", to_string(t.state)}};
  if (t.lease) j["lease"] = {{"validator_id", t.lease->validator_id}, {"expires_at", t.lease->expires_at}};
}

void to_json(Json& j, const QueueStats& s) {
  j = Json{{"total", s.total},       {"open", s.open},         {"leased", s.leased},
           {"accepted", s.accepted}, {"rejected", s.rejected}, {"disputed", s.disputed},
           {"closed", s.closed()},   {"decisions", s.decisions}};
}

void to_json(Json& j, const ExportResult& r) {
  j = Json{{"links", r.links}, {"disputed", r.disputed}, {"rejected", r.rejected}, {"pending", r.pending}};
}

}  // namespace patlink
