#pragma once

// Human validation queue: tasks are leased to validators, verdicts are
// appended to a decision log, and the accepted link set is a pure function
// of (matches, decision log).

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "patlink/corpus.hpp"
#include "patlink/family.hpp"
#include "patlink/ndrec.hpp"
#include "patlink/params.hpp"
#include "patlink/scoring.hpp"

namespace patlink {

using Millis = long long;
using Clock = std::function<Millis()>;

Millis system_millis();

struct Decision {
  std::string ref_id;
  std::optional<std::string> chosen_record_id;  // nullopt = none of these
  std::string validator_id;
  Millis timestamp = 0;
  /// Client idempotency token; a resubmission with a token already in the
  /// log is acknowledged without a second entry.
  std::optional<std::string> request_id;

  bool operator==(const Decision&) const = default;
};

enum class TaskState { open, accepted, rejected, disputed };

std::string_view to_string(TaskState s);

struct TaskCandidate {
  std::string record_id;
  double score = 0.0;
  std::string citation;             // rendered for display
  std::vector<std::string> tokens;  // normalized title + source tokens
};

struct Lease {
  std::string validator_id;
  Millis expires_at = 0;
};

struct ReviewTask {
  std::string ref_id;
  std::string raw_text;
  std::vector<std::string> raw_tokens;
  std::vector<TaskCandidate> candidates;  // descending score, at most 5
  std::optional<Lease> lease;
  int verdict_count = 0;
  TaskState state = TaskState::open;
  std::optional<std::string> chosen_record_id;
};

struct QueueStats {
  std::size_t total = 0;
  std::size_t open = 0;
  std::size_t leased = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t disputed = 0;
  std::size_t decisions = 0;

  std::size_t closed() const { return accepted + rejected + disputed; }
};

/// Verdict accumulation for one task. Closes when one choice (a record or
/// "none") reaches the quorum; after max_verdicts without agreement the
/// task is disputed.
struct VerdictTally {
  std::map<std::string, int> counts;  // "" stands for none-of-these
  int n = 0;
  TaskState state = TaskState::open;
  std::optional<std::string> chosen;

  TaskState add(const std::optional<std::string>& choice, const ValidationParams& params);
};

class DecisionError : public std::runtime_error {
 public:
  enum class Kind { bad_request, not_found, conflict };
  DecisionError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

class ValidationQueue {
 public:
  explicit ValidationQueue(const Corpus& corpus, ValidationParams params = {},
                           Clock clock = system_millis);
  ~ValidationQueue();

  /// Creates one task per new ref_id; existing ref_ids are left alone.
  /// Throws std::invalid_argument (before changing anything) if a match is
  /// not needs_review. Returns the number of tasks created.
  std::size_t enqueue(const std::vector<MatchResult>& matches);

  /// Replays an existing decision log, then appends future decisions to it.
  void attach_log(const std::filesystem::path& path);

  /// Oldest open task that is not actively leased and not already decided
  /// by this validator. A validator that still holds a live lease gets the
  /// same task back with the lease renewed.
  std::optional<ReviewTask> lease_task(const std::string& validator_id,
                                       std::optional<long long> lease_seconds = std::nullopt);

  /// Validates and records a verdict. Returns the task state afterwards.
  TaskState submit_decision(Decision d);

  std::optional<ReviewTask> task(const std::string& ref_id) const;
  QueueStats stats() const;
  std::vector<Decision> decisions() const;
  const ValidationParams& params() const { return params_; }

 private:
  struct Entry {
    ReviewTask task;
    VerdictTally tally;
    std::vector<std::string> deciders;
  };
  TaskState apply(Entry& e, const Decision& d);
  Entry* find(const std::string& ref_id);

  const Corpus& corpus_;
  ValidationParams params_;
  Clock clock_;
  mutable std::shared_mutex mu_;
  std::vector<Entry> entries_;  // enqueue order
  std::unordered_map<std::string, std::size_t> pos_;
  std::vector<Decision> log_;
  std::unordered_map<std::string, std::size_t> request_ids_;  // token -> log position
  std::unique_ptr<NdrecWriter> writer_;
};

struct ExportResult {
  std::vector<CitationLink> links;      // sorted, one per (patent, record)
  std::vector<std::string> disputed;    // ref ids
  std::vector<std::string> rejected;    // none-of-these ref ids
  std::vector<std::string> pending;     // still open
};

/// Auto-accepted matches plus human-accepted tasks, as direct links.
/// Replays decisions in log order; deterministic.
ExportResult export_links(const std::vector<MatchResult>& matches,
                          const std::vector<Decision>& decisions,
                          const ValidationParams& params, const Corpus& corpus);

void to_json(Json& j, const Decision& d);
void from_json(const Json& j, Decision& d);
void to_json(Json& j, const ReviewTask& t);
void to_json(Json& j, const QueueStats& s);
void to_json(Json& j, const ExportResult& r);

}  // namespace patlink
