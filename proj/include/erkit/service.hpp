#pragma once

#include <memory>
#include <string>

#include "erkit/pipeline.hpp"

namespace erkit {

// HTTP/1.1 + JSON wire API over an incremental pipeline:
//   POST /records                      ingest one InformationRecord
//   GET  /profiles?ref_id=...          profiles containing a reference
//   GET  /profiles?attr=...&value=...  profiles matching an attribute value
//   GET  /report                       cumulative stage counts
//   GET  /health
// 200 success, 400 malformed, 404 unknown ref, 409 ref_id conflict,
// 500 internal.
class IngestService {
public:
    explicit IngestService(RuntimeConfig cfg);
    ~IngestService();

    IngestService(const IngestService&) = delete;
    IngestService& operator=(const IngestService&) = delete;

    // Blocks serving until stop() is called. Returns false when the address
    // cannot be bound.
    bool serve(const std::string& host, int port);

    // Binds to an ephemeral port and serves on a background thread; returns
    // the port. For tests.
    int start_background(const std::string& host);
    void stop();

    IncrementalPipeline& pipeline() { return *pipeline_; }

private:
    struct Impl;
    std::unique_ptr<IncrementalPipeline> pipeline_;
    std::unique_ptr<Impl> impl_;
};

// Splits "host:port"; throws ConfigError on malformed input.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace erkit
