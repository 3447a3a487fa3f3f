// HTTP/JSON facade over the engine.
//
//   POST /users                      {user_id}
//   POST /feedbacks                  {author_id, product_id, appreciation, text,
//                                     feedback_id?, trustworthiness?}
//   POST /reviews                    {user_id, product_id, appreciation, text, k?}
//   GET  /sessions/{id}
//   POST /sessions/{id}/votes        {feedback_id, choice}
//   POST /sessions/{id}/finalize     {}
//   GET  /products/{id}/score
//   GET  /products/{id}/feedbacks?category=...
//   GET  /users/{id}/trust
//
// Failures carry {"error": {"code", "message", "retry_after_seconds"?}}.
// No authentication: user ids are trusted input.

#pragma once

#include <memory>
#include <string>

#include "engine.hpp"

namespace trs {

struct ServiceOptions {
  /// Honour an `X-Now: <unix seconds>` request header instead of the clock.
  bool test_mode = false;
};

inline constexpr const char* kNowHeader = "X-Now";

class Service {
 public:
  explicit Service(Engine& engine, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trs
