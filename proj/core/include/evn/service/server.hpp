#pragma once

#include <memory>
#include <string>

#include "evn/core/error.hpp"
#include "evn/evalkit/experiment.hpp"
#include "evn/service/config.hpp"
#include "evn/service/store.hpp"

namespace evn::service {

/// HTTP status for a library error code.
int http_status(ErrorCode code);

/// JSON/HTTP front end over sessions and experiments.
///
///   POST /sessions                        {input, domain_hint?, operators?, ablation?}
///   POST /sessions/{id}/answer            {text, revision?}
///   POST /sessions/{id}/advance           {revision?, abstracts?}
///   POST /sessions/{id}/select_direction  {direction_id, revision?}
///   POST /sessions/{id}/cancel            {revision?}
///   GET  /sessions, /sessions/{id}, /sessions/{id}/proposal
///   POST /experiments                     {variant, bench_path, n_runs, parallelism?, skip_failures?}
///   GET  /experiments/{id}
///
/// Mutations are serialized per session: a request that arrives while
/// another is in flight, or whose `revision` is stale, gets 409. Errors are
/// {code, message, details}.
class Service {
public:
    Service(ServiceConfig config, evalkit::BackendFactory backends);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Serves on the configured address and port until stop(). Returns false
    /// when the address cannot be bound.
    bool listen();
    /// Binds an ephemeral port and serves on a background thread. Returns
    /// the port.
    int start_background();
    void stop();

    [[nodiscard]] SessionStore& store();
    [[nodiscard]] const ServiceConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace evn::service
