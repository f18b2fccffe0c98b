#pragma once

// HTTP interface of the validation queue:
//   GET  /tasks/next?validator=ID   200 task | 204 drained
//   POST /decisions                 {ref_id, chosen_record_id|null, validator_id, request_id?}
//   GET  /stats
//   GET  /export

#include <memory>
#include <string>
#include <vector>

#include "patlink/validation.hpp"

namespace patlink {

class ReviewServer {
 public:
  ReviewServer(ValidationQueue& queue, std::vector<MatchResult> matches, const Corpus& corpus);
  ~ReviewServer();

  /// Binds to host:port (port 0 picks a free port) and returns the port, or
  /// -1 on failure.
  int bind(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves until stop(); blocks.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace patlink
