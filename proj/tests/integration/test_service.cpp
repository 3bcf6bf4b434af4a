#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "api.hpp"
#include "base64.hpp"
#include "httplib.h"
#include "json.hpp"
#include "service.hpp"
#include "tonelut/tonelut.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tonelut_tools;

namespace {

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "tonelut_service_tests";
    fs::create_directories(dir);
    return dir;
}

std::string checkpoint_path() {
    static const std::string path = [] {
        tl_model_config cfg;
        tl_model_config_default(&cfg);
        cfg.grid_size = 9;
        cfg.hidden = 8;
        tl_model* model = nullptr;
        check(tl_model_create(&cfg, 11, &model));
        const auto p = (scratch() / "service.ckpt").string();
        check(tl_model_save(model, p.c_str()));
        tl_model_free(model);
        return p;
    }();
    return path;
}

std::string png_b64(int w, int h, double shade = 0.3) {
    std::vector<double> rgb;
    for (int i = 0; i < w * h; ++i) {
        const double t = static_cast<double>(i) / (w * h);
        rgb.insert(rgb.end(), {shade + 0.5 * t, 0.6 - 0.4 * t, shade});
    }
    tl_image* image = nullptr;
    check(tl_image_create(w, h, rgb.data(), &image));
    tl_buffer png{};
    check(tl_image_encode_png(image, &png));
    tl_image_free(image);
    return base64_encode(take(png));
}

// Runs a service on an ephemeral port for the lifetime of the object.
struct Running {
    Service service;
    int port;
    std::thread worker;

    explicit Running(ServiceConfig cfg) : service((cfg.port = 0, cfg)), port(service.bind()) {
        worker = std::thread([this] { service.listen(); });
    }
    ~Running() {
        service.stop();
        worker.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(60, 0);
        return c;
    }
};

ServiceConfig toy_config() {
    ServiceConfig cfg;
    cfg.checkpoint = checkpoint_path();
    cfg.max_dimension = 64;
    return cfg;
}

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
    auto res = c.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == expect);
    return json::parse(res->body, nullptr, false);
}

void check_error(const json& body, const std::string& code) {
    REQUIRE(body.is_object());
    CHECK(body.value("code", "") == code);
    CHECK(!body.value("message", "").empty());
}

}  // namespace

TEST_CASE("base64 edge cases") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_decode("Zm9v\nYmFy") == std::optional<std::string>("foobar"));
    CHECK(base64_decode("Zg==") == std::optional<std::string>("f"));
    CHECK(!base64_decode("Zg="));
    CHECK(!base64_decode("Zg"));
    CHECK(!base64_decode("Z$=="));
    CHECK(!base64_decode("Zg==Zg=="));
    std::string all;
    for (int i = 0; i < 256; ++i) all.push_back(static_cast<char>(i));
    CHECK(base64_decode(base64_encode(all)) == std::optional<std::string>(all));
}

TEST_CASE("construction failures") {
    ServiceConfig cfg = toy_config();
    cfg.checkpoint = "/nonexistent.ckpt";
    CHECK_THROWS_AS(Service{cfg}, ApiError);
    cfg = toy_config();
    cfg.max_dimension = 0;
    CHECK_THROWS_AS(Service{cfg}, ApiError);
    cfg = toy_config();
    cfg.static_dir = "/nonexistent-dir";
    CHECK_THROWS_AS(Service{cfg}, ApiError);
}

TEST_CASE("toy-mode endpoints") {
    Running run(toy_config());
    auto c = run.client();

    auto health = c.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    const json h = json::parse(health->body);
    CHECK(h["status"] == "ok");
    CHECK(h["embedding_mode"] == "toy");
    CHECK(h["grid_size"] == 9);
    CHECK(h["source_prompt"] == "normal photo");
    CHECK(h["checkpoint_hash"].get<std::string>().size() == 16);

    auto texts = c.Get("/texts");
    REQUIRE(texts);
    const auto list = json::parse(texts->body)["texts"];
    CHECK(std::find(list.begin(), list.end(), "red") != list.end());

    const std::string image = png_b64(12, 10);
    const json adj = post(c, "/adjust", {{"image", image}, {"text", "red photo"}, {"s", 0.5}}, 200);
    CHECK(adj["s"] == 0.5);
    CHECK(adj["diagnostics"]["weights"].size() == 3);
    for (const char* ch : {"r", "g", "b"}) {
        const auto axis = adj["diagnostics"]["coords"][ch];
        CHECK(axis.size() == 9);
        CHECK(axis.front() == 0.0);
        CHECK(axis.back() == 1.0);
        CHECK(adj["diagnostics"]["intervals"][ch]["min"] > 0.0);
    }
    const auto out = base64_decode(adj["image"].get<std::string>());
    REQUIRE(out);
    int w = 0;
    int hgt = 0;
    CHECK(tl_image_probe_png(out->data(), out->size(), &w, &hgt) == TL_OK);
    CHECK(w == 12);
    CHECK(hgt == 10);

    // Default strength is 1.
    const json a1 = post(c, "/adjust", {{"image", image}, {"text", "red photo"}}, 200);
    CHECK(a1["s"] == 1.0);

    auto lut = c.Post("/lut", json{{"text", "warm photo"}, {"s", 1.0}}.dump(), "application/json");
    REQUIRE(lut);
    CHECK(lut->status == 200);
    CHECK(lut->body.find("LUT_3D_SIZE 9") != std::string::npos);
    tl_lut* parsed = nullptr;
    CHECK(tl_lut_parse(lut->body.data(), lut->body.size(), &parsed) == TL_OK);
    tl_lut_free(parsed);
    auto lut_img = c.Post("/lut", json{{"text", "warm photo"}, {"image", image}}.dump(), "application/json");
    REQUIRE(lut_img);
    CHECK(lut_img->status == 200);

    const json sim = post(c, "/similarity", {{"text", "normal photo"}, {"image", image}}, 200);
    CHECK(sim["relative_similarity"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sim["anchor"] == "normal photo");
    const json sim2 = post(c, "/similarity", {{"text", "red photo"}, {"image", image}}, 200);
    CHECK(sim2["relative_similarity"].get<double>() > 0.0);
    CHECK(sim2["relative_similarity"].get<double>() < 1.0);
}

TEST_CASE("toy-mode errors") {
    Running run(toy_config());
    auto c = run.client();
    const std::string image = png_b64(8, 8);

    auto raw = c.Post("/adjust", "not json", "application/json");
    REQUIRE(raw);
    CHECK(raw->status == 400);
    check_error(json::parse(raw->body), "bad_request");

    check_error(post(c, "/adjust", {{"text", "red photo"}}, 400), "bad_request");
    check_error(post(c, "/adjust", {{"image", image}}, 400), "bad_request");
    check_error(post(c, "/adjust", {{"image", image}, {"text", "red photo"}, {"s", "x"}}, 400), "bad_request");
    check_error(post(c, "/adjust", {{"image", "@@@"}, {"text", "red photo"}}, 400), "bad_request");
    check_error(post(c, "/adjust", {{"image", base64_encode("GIF89a....")}, {"text", "red photo"}}, 400), "format");
    check_error(post(c, "/adjust", {{"image", image}, {"text", "plaid photo"}}, 404), "unknown_text");
    check_error(post(c, "/adjust", {{"image", png_b64(65, 8)}, {"text", "red photo"}}, 413), "image_too_large");
    check_error(post(c, "/lut", {{"text", "plaid photo"}}, 404), "unknown_text");
    check_error(post(c, "/similarity", {{"text", "red photo"}}, 400), "bad_request");
    check_error(post(c, "/similarity", {{"text", "red photo"}, {"image", image}, {"image_key", "k"}}, 400),
                "bad_request");

    auto missing = c.Get("/nowhere");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    check_error(json::parse(missing->body), "not_found");
}

TEST_CASE("concurrent requests match sequential ones") {
    Running run(toy_config());
    const std::vector<std::string> texts = {"red photo", "cold photo", "warm photo", "bright photo"};
    std::vector<std::string> images;
    for (int i = 0; i < 4; ++i) images.push_back(png_b64(16, 16, 0.1 + 0.1 * i));

    auto request = [&](int i) {
        auto c = run.client();
        auto res = c.Post("/adjust", json{{"image", images[i % 4]}, {"text", texts[i % 4]}}.dump(), "application/json");
        return res && res->status == 200 ? json::parse(res->body)["image"].get<std::string>() : std::string();
    };
    std::vector<std::string> sequential;
    for (int i = 0; i < 4; ++i) sequential.push_back(request(i));
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 16; ++i) futures.push_back(std::async(std::launch::async, request, i));
    for (int i = 0; i < 16; ++i) CHECK(futures[i].get() == sequential[i % 4]);
}

TEST_CASE("store mode") {
    const auto path = scratch() / "store.jsonl";
    {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n(0.0, 1.0);
        std::ofstream f(path);
        f << json{{"model", "synthetic"}, {"dim", 1024}}.dump() << "\n";
        for (const char* key : {"normal photo", "red photo", "img:a"}) {
            std::vector<double> v(1024);
            for (auto& x : v) x = n(rng);
            f << json{{"key", key}, {"dim", 1024}, {"values", v}}.dump() << "\n";
        }
    }
    ServiceConfig cfg = toy_config();
    cfg.embedding_store = path.string();
    Running run(cfg);
    auto c = run.client();

    const json h = json::parse(c.Get("/health")->body);
    CHECK(h["embedding_mode"] == "store");
    const json sim = post(c, "/similarity", {{"text", "red photo"}, {"image_key", "img:a"}}, 200);
    CHECK(sim["relative_similarity"].get<double>() > 0.0);
    CHECK(sim["relative_similarity"].get<double>() < 1.0);
    const json anchor = post(c, "/similarity", {{"text", "normal photo"}, {"image_key", "img:a"}}, 200);
    CHECK(anchor["relative_similarity"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    check_error(post(c, "/similarity", {{"text", "red photo"}, {"image_key", "img:z"}}, 404), "not_found");
    check_error(post(c, "/similarity", {{"text", "red photo"}, {"image", png_b64(8, 8)}}, 400), "config");
    check_error(post(c, "/adjust", {{"text", "red photo"}, {"image", png_b64(8, 8)}}, 400), "config");
    check_error(post(c, "/lut", {{"text", "red photo"}}, 400), "config");
}

TEST_CASE("store without the source prompt is rejected") {
    const auto path = scratch() / "no_anchor.jsonl";
    {
        std::ofstream f(path);
        f << R"({"model": "m", "dim": 2})" << "\n" << R"({"key": "red photo", "dim": 2, "values": [1, 0]})" << "\n";
    }
    ServiceConfig cfg = toy_config();
    cfg.embedding_store = path.string();
    CHECK_THROWS_AS(Service{cfg}, ApiError);
}

TEST_CASE("static assets") {
    const auto dir = scratch() / "static";
    fs::create_directories(dir);
    std::ofstream(dir / "index.html") << "<html>studio</html>";
    ServiceConfig cfg = toy_config();
    cfg.static_dir = dir.string();
    Running run(cfg);
    auto c = run.client();
    auto res = c.Get("/index.html");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "<html>studio</html>");
    CHECK(c.Get("/health")->status == 200);
}
