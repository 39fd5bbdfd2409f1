#pragma once

#include "coinflip/service.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace coinflip::service {

/*
 * HTTP routes over a SessionService:
 *
 *   POST /api/sessions                 create_session
 *   GET  /api/sessions/{id}            get_state
 *   POST /api/sessions/{id}/bets       post_bet
 *   POST /api/sessions/{id}/finish     finish_session
 *   POST /api/sessions/{id}/answers    record_answer
 *   GET  /api/sessions/{id}/events     list_events
 *   GET  /api/questionnaire            questionnaire config
 *   GET  /healthz
 *
 * Bodies are JSON. Errors are {"error", "message", "fields"?} with the
 * ServiceError status.
 */
class HttpServer {
public:
    HttpServer(SessionService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();

    /// Binds (port 0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    SessionService& service_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace coinflip::service
