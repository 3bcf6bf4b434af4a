#pragma once

#include <memory>
#include <string>

namespace tonelut_tools {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks an ephemeral port
    std::string checkpoint;
    std::string embedding_store;  // empty selects the toy embedder
    int max_dimension = 2048;
    std::string static_dir;
};

/// HTTP front end over a loaded checkpoint. The model snapshot is immutable
/// after construction, so handlers run concurrently without locking.
class Service {
public:
    /// Loads the checkpoint and embeddings; throws ApiError on failure.
    explicit Service(const ServiceConfig& config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the socket and returns the bound port.
    int bind();
    /// Blocks serving requests until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tonelut_tools
