#include "service.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "api.hpp"
#include "base64.hpp"
#include "httplib.h"
#include "json.hpp"

namespace tonelut_tools {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxBody = 64 * 1024 * 1024;
constexpr int kReferenceSize = 16;

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

int http_status(tl_status s) {
    switch (s) {
        case TL_ERR_UNKNOWN_TEXT:
        case TL_ERR_NOT_FOUND: return 404;
        case TL_ERR_INTERNAL: return 500;
        default: return 400;
    }
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw HttpError{400, "bad_request", "body must be a JSON object"};
    return body;
}

std::string required_string(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) {
        throw HttpError{400, "bad_request", std::string("field '") + key + "' must be a string"};
    }
    return body[key].get<std::string>();
}

double optional_number(const json& body, const char* key, double fallback) {
    if (!body.contains(key) || body[key].is_null()) return fallback;
    if (!body[key].is_number()) throw HttpError{400, "bad_request", std::string("field '") + key + "' must be a number"};
    const double v = body[key].get<double>();
    if (!std::isfinite(v)) throw HttpError{400, "bad_request", std::string("field '") + key + "' must be finite"};
    return v;
}

std::vector<double> read_series(const std::function<tl_status(double*, std::size_t, std::size_t*)>& get) {
    std::size_t n = 0;
    check(get(nullptr, 0, &n));
    std::vector<double> out(n);
    check(get(out.data(), out.size(), &n));
    return out;
}

}  // namespace

struct Service::Impl {
    ServiceConfig config;
    Model model;
    Provider provider;
    std::string hash;
    std::string source_prompt;
    httplib::Server server;

    Image decode_image(const json& body, const char* key) const {
        const std::string encoded = required_string(body, key);
        const auto bytes = base64_decode(encoded);
        if (!bytes) throw HttpError{400, "bad_request", std::string("field '") + key + "' is not valid base64"};
        int w = 0;
        int h = 0;
        if (tl_image_probe_png(bytes->data(), bytes->size(), &w, &h) != TL_OK) {
            throw HttpError{400, "format", std::string("field '") + key + "' is not a PNG image: " + tl_last_error()};
        }
        if (w > config.max_dimension || h > config.max_dimension) {
            throw HttpError{413, "image_too_large",
                            "image is " + std::to_string(w) + "x" + std::to_string(h) + "; the limit is " +
                                std::to_string(config.max_dimension) + " per side"};
        }
        tl_image* image = nullptr;
        check(tl_image_decode(bytes->data(), bytes->size(), &image));
        return Image(image);
    }

    Image reference_image() const {
        const std::vector<double> gray(3 * kReferenceSize * kReferenceSize, 0.5);
        tl_image* image = nullptr;
        check(tl_image_create(kReferenceSize, kReferenceSize, gray.data(), &image));
        return Image(image);
    }

    Adjustment adjust(const tl_image* image, const std::string& text, double s) const {
        tl_adjustment* adj = nullptr;
        check(tl_model_adjust(model.get(), provider.get(), image, text.c_str(), s, &adj));
        return Adjustment(adj);
    }

    void handle(const httplib::Request& req, httplib::Response& res,
                const std::function<void(const httplib::Request&, httplib::Response&)>& body) const {
        try {
            body(req, res);
        } catch (const HttpError& e) {
            send_error(res, e.status, e.code, e.message);
        } catch (const ApiError& e) {
            send_error(res, http_status(e.status()), e.code(), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    }

    void health(const httplib::Request&, httplib::Response& res) const {
        send_json(res, 200,
                  {{"status", "ok"},
                   {"checkpoint_hash", hash},
                   {"embedding_mode", tl_provider_mode(provider.get()) == TL_EMBEDDING_TOY ? "toy" : "store"},
                   {"source_prompt", source_prompt},
                   {"grid_size", tl_model_grid_size(model.get())},
                   {"max_dimension", config.max_dimension}});
    }

    void texts(const httplib::Request&, httplib::Response& res) const {
        tl_buffer buf{};
        check(tl_provider_texts(provider.get(), &buf));
        send_json(res, 200, {{"texts", split_lines(take(buf))}});
    }

    void adjust_endpoint(const httplib::Request& req, httplib::Response& res) const {
        const json body = parse_body(req);
        const Image image = decode_image(body, "image");
        const std::string text = required_string(body, "text");
        const double s = optional_number(body, "s", 1.0);
        const Adjustment adj = adjust(image.get(), text, s);

        tl_buffer png{};
        check(tl_image_encode_png(tl_adjustment_image(adj.get()), &png));
        const auto weights = read_series([&](double* out, std::size_t cap, std::size_t* n) {
            return tl_adjustment_weights(adj.get(), out, cap, n);
        });
        json coords = json::object();
        json intervals = json::object();
        const char* names[3] = {"r", "g", "b"};
        for (int c = 0; c < 3; ++c) {
            const auto axis = read_series([&](double* out, std::size_t cap, std::size_t* n) {
                return tl_adjustment_coords(adj.get(), c, out, cap, n);
            });
            double lo = 1.0;
            double hi = 0.0;
            for (std::size_t i = 1; i < axis.size(); ++i) {
                lo = std::min(lo, axis[i] - axis[i - 1]);
                hi = std::max(hi, axis[i] - axis[i - 1]);
            }
            coords[names[c]] = axis;
            intervals[names[c]] = {{"min", lo}, {"max", hi}};
        }
        send_json(res, 200,
                  {{"image", base64_encode(take(png))},
                   {"text", text},
                   {"s", s},
                   {"diagnostics", {{"weights", weights}, {"coords", coords}, {"intervals", intervals}}}});
    }

    void lut_endpoint(const httplib::Request& req, httplib::Response& res) const {
        const json body = parse_body(req);
        const std::string text = required_string(body, "text");
        const double s = optional_number(body, "s", 1.0);
        const Image image = body.contains("image") && !body["image"].is_null() ? decode_image(body, "image")
                                                                                : reference_image();
        const Adjustment adj = adjust(image.get(), text, s);
        tl_buffer cube{};
        const std::string title = text + " s=" + json(s).dump();
        check(tl_adjustment_cube(adj.get(), title.c_str(), &cube));
        res.status = 200;
        res.set_header("Content-Disposition", "attachment; filename=\"adjustment.cube\"");
        res.set_content(take(cube), "text/plain");
    }

    void similarity_endpoint(const httplib::Request& req, httplib::Response& res) const {
        const json body = parse_body(req);
        const std::string text = required_string(body, "text");
        const bool has_image = body.contains("image") && !body["image"].is_null();
        const bool has_key = body.contains("image_key") && !body["image_key"].is_null();
        if (has_image == has_key) throw HttpError{400, "bad_request", "give exactly one of 'image' or 'image_key'"};
        Image image;
        std::string key;
        if (has_image) {
            if (tl_provider_mode(provider.get()) != TL_EMBEDDING_TOY) {
                throw HttpError{400, "config", "the embedding store cannot embed images; send 'image_key' instead"};
            }
            image = decode_image(body, "image");
        } else {
            key = required_string(body, "image_key");
        }
        double score = 0.0;
        check(tl_provider_relative_similarity(provider.get(), image.get(), has_key ? key.c_str() : nullptr,
                                              text.c_str(), source_prompt.c_str(), &score));
        send_json(res, 200, {{"relative_similarity", score}, {"text", text}, {"anchor", source_prompt}});
    }

    void routes() {
        using H = void (Impl::*)(const httplib::Request&, httplib::Response&) const;
        auto wrap = [this](H h) {
            return [this, h](const httplib::Request& req, httplib::Response& res) {
                handle(req, res, [this, h](const httplib::Request& q, httplib::Response& r) { (this->*h)(q, r); });
            };
        };
        server.Get("/health", wrap(&Impl::health));
        server.Get("/texts", wrap(&Impl::texts));
        server.Post("/adjust", wrap(&Impl::adjust_endpoint));
        server.Post("/lut", wrap(&Impl::lut_endpoint));
        server.Post("/similarity", wrap(&Impl::similarity_endpoint));
        server.set_payload_max_length(kMaxBody);
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            const int status = res.status;
            const std::string code = status == 404 ? "not_found" : status == 413 ? "payload_too_large" : "http_error";
            send_error(res, status, code, "HTTP " + std::to_string(status));
        });
        if (!config.static_dir.empty() && !server.set_mount_point("/", config.static_dir)) {
            throw ApiError(TL_ERR_IO, "static asset directory " + config.static_dir + " does not exist");
        }
    }
};

Service::Service(const ServiceConfig& config) : impl_(std::make_unique<Impl>()) {
    if (config.max_dimension < 1) throw ApiError(TL_ERR_CONFIG, "max image dimension must be positive");
    if (config.port < 0 || config.port > 65535) throw ApiError(TL_ERR_CONFIG, "port must be in [0, 65535]");
    impl_->config = config;
    impl_->model = open_model(config.checkpoint);
    impl_->provider = open_provider(config.embedding_store);
    char hash[17];
    check(tl_model_hash(impl_->model.get(), hash));
    impl_->hash = hash;
    impl_->source_prompt = tl_model_source_prompt(impl_->model.get());
    if (!tl_provider_has_text(impl_->provider.get(), impl_->source_prompt.c_str())) {
        throw ApiError(TL_ERR_CONFIG, "embeddings have no entry for the anchor '" + impl_->source_prompt + "'");
    }
    impl_->routes();
}

Service::~Service() = default;

int Service::bind() {
    auto& s = impl_->server;
    if (impl_->config.port == 0) {
        const int port = s.bind_to_any_port(impl_->config.host);
        if (port < 0) throw ApiError(TL_ERR_IO, "cannot bind " + impl_->config.host);
        return port;
    }
    if (!s.bind_to_port(impl_->config.host, impl_->config.port)) {
        throw ApiError(TL_ERR_IO, "cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
    }
    return impl_->config.port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace tonelut_tools
