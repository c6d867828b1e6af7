#include "erkit/service.hpp"

#include <thread>

#include <httplib.h>

#include "erkit/canonical.hpp"

namespace erkit {

namespace {

Json profiles_payload(const std::vector<EntityProfile>& profiles) {
    Json arr = Json::array();
    for (const auto& profile : profiles) arr.push_back(to_json(profile));
    Json out = Json::object();
    out["profiles"] = std::move(arr);
    return out;
}

void reply_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    Json body = Json::object();
    body["error"] = message;
    reply_json(res, status, body);
}

}  // namespace

struct IngestService::Impl {
    httplib::Server server;
    std::thread worker;
};

IngestService::IngestService(RuntimeConfig cfg)
    : pipeline_(std::make_unique<IncrementalPipeline>(std::move(cfg))),
      impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;

    server.Post("/records", [this](const httplib::Request& req, httplib::Response& res) {
        Json body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            reply_error(res, 400, "body must be a JSON object");
            return;
        }
        InformationRecord record;
        try {
            if (!body.contains("record_ordinal")) body["record_ordinal"] = -1;
            record = record_from_json(body);
        } catch (const ParseError& e) {
            reply_error(res, 400, e.what());
            return;
        }
        try {
            auto result = pipeline_->ingest(std::move(record));
            Json out = profiles_payload(result.profiles);
            out["ref_id"] = result.ref_id;
            out["dropped"] = result.dropped;
            out["already_known"] = result.already_known;
            reply_json(res, 200, out);
        } catch (const ConflictError& e) {
            reply_error(res, 409, e.what());
        } catch (const InvalidArgumentError& e) {
            reply_error(res, 400, e.what());
        } catch (const Error& e) {
            reply_error(res, 500, e.what());
        }
    });

    server.Get("/profiles", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            if (req.has_param("ref_id")) {
                reply_json(res, 200,
                           profiles_payload(pipeline_->query_by_ref(req.get_param_value("ref_id"))));
            } else if (req.has_param("attr") && req.has_param("value")) {
                reply_json(res, 200,
                           profiles_payload(pipeline_->query_by_attribute(
                               req.get_param_value("attr"), req.get_param_value("value"))));
            } else {
                reply_error(res, 400, "expected ref_id=... or attr=...&value=...");
            }
        } catch (const NotFoundError& e) {
            reply_error(res, 404, e.what());
        } catch (const Error& e) {
            reply_error(res, 500, e.what());
        }
    });

    server.Get("/report", [this](const httplib::Request&, httplib::Response& res) {
        Json report = pipeline_->report();
        report["store_version"] = pipeline_->store_version();
        reply_json(res, 200, report);
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        Json body = Json::object();
        body["status"] = "ok";
        body["store_version"] = pipeline_->store_version();
        reply_json(res, 200, body);
    });
}

IngestService::~IngestService() { stop(); }

bool IngestService::serve(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int IngestService::start_background(const std::string& host) {
    int port = impl_->server.bind_to_any_port(host);
    if (port < 0) return -1;
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void IngestService::stop() {
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

std::pair<std::string, int> parse_listen_address(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= address.size()) {
        throw ConfigError("listen address must look like host:port, got '" + address + "'");
    }
    std::string host = address.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("invalid port in listen address '" + address + "'");
    }
    if (port < 0 || port > 65535) {
        throw ConfigError("port out of range in listen address '" + address + "'");
    }
    return {host, port};
}

}  // namespace erkit
