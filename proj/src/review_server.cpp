#include "patlink/review_server.hpp"

#include <httplib.h>

namespace patlink {

struct ReviewServer::Impl {
  ValidationQueue& queue;
  std::vector<MatchResult> matches;
  const Corpus& corpus;
  httplib::Server http;

  Impl(ValidationQueue& q, std::vector<MatchResult> m, const Corpus& c)
      : queue(q), matches(std::move(m)), corpus(c) {
    http.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      auto validator = req.get_param_value("validator");
      if (validator.empty()) return error(res, 400, "missing validator parameter");
      std::optional<long long> lease;
      if (req.has_param("lease_seconds")) {
        try {
          lease = std::stoll(req.get_param_value("lease_seconds"));
        } catch (const std::exception&) {
          return error(res, 400, "bad lease_seconds");
        }
      }
      auto task = queue.lease_task(validator, lease);
      if (!task) {
        res.status = 204;
        return;
      }
      auto stats = queue.stats();
      Json body = *task;
      body["progress"] = {{"done", stats.closed()}, {"total", stats.total}};
      reply(res, 200, body);
    });

    http.Post("/decisions", [this](const httplib::Request& req, httplib::Response& res) {
      Decision d;
      try {
        d = Json::parse(req.body).get<Decision>();
      } catch (const std::exception& e) {
        return error(res, 400, std::string("malformed decision: ") + e.what());
      }
      try {
        auto state = queue.submit_decision(d);
        reply(res, 200, Json{{"ref_id", d.ref_id}, {"state", to_string(state)}});
      } catch (const DecisionError& e) {
        int code = e.kind == DecisionError::Kind::not_found ? 404
                   : e.kind == DecisionError::Kind::conflict ? 409
                                                              : 400;
        error(res, code, e.what());
      }
    });

    http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, Json(queue.stats()));
    });

    http.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
      auto result = export_links(matches, queue.decisions(), queue.params(), corpus);
      reply(res, 200, Json(result));
    });
  }

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }
  static void error(httplib::Response& res, int status, const std::string& msg) {
    reply(res, status, Json{{"error", msg}});
  }
};

ReviewServer::ReviewServer(ValidationQueue& queue, std::vector<MatchResult> matches, const Corpus& corpus)
    : impl_(std::make_unique<Impl>(queue, std::move(matches), corpus)) {}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

void ReviewServer::serve() { impl_->http.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace patlink
