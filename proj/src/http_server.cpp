#include "coinflip/http_server.hpp"

#include <httplib.h>

namespace coinflip::service {

namespace {

void send_json(httplib::Response& res, int status, const Json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req)
{
    if (req.body.empty()) {
        return Json::object();
    }
    try {
        return Json::parse(req.body);
    }
    catch (const Json::parse_error&) {
        throw ServiceError(400, "invalid_json", "request body is not valid JSON");
    }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler)
{
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        }
        catch (const ServiceError& err) {
            send_json(res, err.status(), err.to_json());
        }
        catch (const std::exception& ex) {
            send_json(res, 500, Json{{"error", "internal"}, {"message", ex.what()}});
        }
    };
}

} // namespace

HttpServer::HttpServer(SessionService& service, std::optional<std::filesystem::path> static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>())
{
    auto& s = *server_;
    const char* id_route = R"(/api/sessions/([A-Za-z0-9_-]+))";

    s.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, Json{{"ok", true}});
    }));
    s.Get("/api/questionnaire", guarded([this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, to_json(service_.questionnaire()));
    }));
    s.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 201, service_.create_session(parse_body(req)));
    }));
    s.Get(id_route, guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.get_state(req.matches[1]));
    }));
    s.Post(std::string(id_route) + "/bets", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.post_bet(req.matches[1], parse_body(req)));
    }));
    s.Post(std::string(id_route) + "/finish", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.finish_session(req.matches[1]));
    }));
    s.Post(std::string(id_route) + "/answers", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_.record_answer(req.matches[1], parse_body(req)));
    }));
    s.Get(std::string(id_route) + "/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
        Json events = Json::array();
        for (const auto& e : service_.list_events(req.matches[1])) {
            events.push_back(to_json(e));
        }
        send_json(res, 200, events);
    }));

    if (static_dir) {
        s.set_mount_point("/", static_dir->string());
    }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        return server_->bind_to_any_port(host);
    }
    return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve()
{
    return server_->listen_after_bind();
}

void HttpServer::stop()
{
    server_->stop();
}

void HttpServer::wait_until_ready() const
{
    server_->wait_until_ready();
}

} // namespace coinflip::service
