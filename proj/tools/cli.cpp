#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "api.hpp"
#include "json.hpp"
#include "service.hpp"

using namespace tonelut_tools;
namespace fs = std::filesystem;

namespace {

struct TrainOptions {
    std::string corpus;
    std::vector<std::string> texts;
    std::string out;
    std::string history;
    std::string resume;
    std::size_t limit = 0;
    int log_every = 10;
    std::string neutral = "settled";
    tl_model_config model{};
    tl_train_config train{};
};

struct AdjustOptions {
    std::string checkpoint;
    std::string image;
    std::string text;
    double s = 1.0;
    std::string out;
    std::string cube;
    std::string embeddings;
};

struct EvalOptions {
    std::string checkpoint;
    std::string images;
    std::vector<std::string> texts;
    double s = 1.0;
    std::string out;
    std::string embeddings;
};

struct SweepOptions {
    std::string checkpoint;
    std::string image;
    std::string text;
    std::vector<double> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::string out_dir;
    std::string out;
};

/// Writes through a sibling temp file so a failure never leaves a partial file.
void write_text(const std::string& path, const std::string& data) {
    const fs::path target(path);
    const fs::path tmp = target.string() + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw ApiError(TL_ERR_IO, "cannot open " + tmp.string() + " for writing");
        f.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!f) throw ApiError(TL_ERR_IO, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ApiError(TL_ERR_IO, "cannot move output into place at " + path);
    }
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text << "\n";
    } else {
        write_text(out, text + "\n");
    }
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
    std::vector<const char*> out;
    for (const auto& s : v) out.push_back(s.c_str());
    return out;
}

void run_train(TrainOptions& o) {
    if (o.neutral == "zero") {
        o.model.neutral = TL_NEUTRAL_ZERO;
    } else if (o.neutral == "modulatable") {
        o.model.neutral = TL_NEUTRAL_MODULATABLE;
    } else {
        o.model.neutral = TL_NEUTRAL_SETTLED;
    }
    ImageList images(o.corpus);
    if (o.limit > 0) images.truncate(o.limit);
    Provider provider = open_provider("");
    Model model;
    if (!o.resume.empty()) {
        model = open_model(o.resume);
    } else {
        o.model.alpha = o.train.alpha;
        tl_model* m = nullptr;
        check(tl_model_create(&o.model, o.train.seed, &m));
        model.reset(m);
    }

    struct Progress {
        std::ostringstream history;
        int every;
    } progress{{}, o.log_every};
    progress.history << "step\ttotal\tcontent\tclip\tweight\tinterval\n";
    auto on_step = [](const tl_loss_report* r, void* user) {
        auto* p = static_cast<Progress*>(user);
        char line[256];
        std::snprintf(line, sizeof line, "%lld\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n", static_cast<long long>(r->step),
                      r->total, r->content, r->clip_directional, r->weight_l2, r->interval);
        p->history << line;
        if (p->every > 0 && r->step % p->every == 0) {
            std::fprintf(stderr, "step=%lld total=%.6g content=%.6g clip=%.6g weight=%.6g interval=%.6g\n",
                         static_cast<long long>(r->step), r->total, r->content, r->clip_directional, r->weight_l2,
                         r->interval);
        }
    };
    const auto texts = c_strings(o.texts);
    check(tl_model_train(model.get(), provider.get(), images.data(), images.size(), texts.data(), texts.size(),
                         &o.train, o.resume.empty() ? 0 : 1, on_step, &progress));
    check(tl_model_save(model.get(), o.out.c_str()));
    write_text(o.history.empty() ? o.out + ".history.tsv" : o.history, progress.history.str());
    char hash[17];
    check(tl_model_hash(model.get(), hash));
    std::cout << "wrote " << o.out << " (" << hash << ")\n";
}

void run_adjust(const AdjustOptions& o) {
    Model model = open_model(o.checkpoint);
    Provider provider = open_provider(o.embeddings);
    Image image = open_image(o.image);
    tl_adjustment* raw = nullptr;
    check(tl_model_adjust(model.get(), provider.get(), image.get(), o.text.c_str(), o.s, &raw));
    Adjustment adj(raw);
    std::string cube;
    if (!o.cube.empty()) {
        tl_buffer buf{};
        const std::string title = o.text + " s=" + nlohmann::json(o.s).dump();
        check(tl_adjustment_cube(adj.get(), title.c_str(), &buf));
        cube = take(buf);
    }
    check(tl_image_write(tl_adjustment_image(adj.get()), o.out.c_str()));
    if (!o.cube.empty()) write_text(o.cube, cube);
}

void run_apply_lut(const std::string& cube, const std::string& image_path, const std::string& out) {
    tl_lut* raw = nullptr;
    check(tl_lut_read(cube.c_str(), &raw));
    Lut lut(raw);
    Image image = open_image(image_path);
    tl_image* result = nullptr;
    check(tl_lut_apply(lut.get(), image.get(), &result));
    Image adjusted(result);
    check(tl_image_write(adjusted.get(), out.c_str()));
}

void run_eval(const EvalOptions& o) {
    Model model = open_model(o.checkpoint);
    Provider provider = open_provider(o.embeddings);
    ImageList images(o.images);
    const auto texts = c_strings(o.texts);
    tl_buffer buf{};
    check(tl_evaluate(model.get(), provider.get(), images.data(), images.size(), texts.data(), texts.size(), o.s,
                      &buf));
    emit(o.out, take(buf));
}

void run_assess(const std::string& corpus, bool as_json) {
    Provider provider = open_provider("");
    ImageList images(corpus);
    tl_buffer buf{};
    check(tl_assess_filters(provider.get(), images.data(), images.size(), &buf));
    const std::string report = take(buf);
    if (as_json) {
        std::cout << report << "\n";
        return;
    }
    const auto table = nlohmann::json::parse(report);
    std::printf("%-12s %12s %12s\n", "filter", "mean_source", "mean_filtered");
    for (const auto& row : table) {
        std::printf("%-12s %12.6f %12.6f\n", row["filter"].get<std::string>().c_str(), row["mean_source"].get<double>(),
                    row["mean_filtered"].get<double>());
    }
}

void run_sweep(const SweepOptions& o) {
    Model model = open_model(o.checkpoint);
    Provider provider = open_provider("");
    Image image = open_image(o.image);
    std::vector<tl_image*> outputs(o.s_values.size(), nullptr);
    tl_buffer buf{};
    check(tl_sweep(model.get(), provider.get(), image.get(), o.text.c_str(), o.s_values.data(), o.s_values.size(),
                   &buf, o.out_dir.empty() ? nullptr : outputs.data()));
    std::vector<Image> owned;
    for (auto* p : outputs) owned.emplace_back(p);
    const std::string report = take(buf);
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        for (std::size_t i = 0; i < owned.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof name, "s_%02zu.png", i);
            check(tl_image_write(owned[i].get(), (fs::path(o.out_dir) / name).c_str()));
        }
    }
    emit(o.out, report);
}

void run_serve(const ServiceConfig& config) {
    Service service(config);
    const int port = service.bind();
    std::printf("listening on http://%s:%d\n", config.host.c_str(), port);
    std::fflush(stdout);
    service.listen();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-driven 3D LUT tone adjustment"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tl_version());

    TrainOptions train;
    tl_model_config_default(&train.model);
    tl_train_config_default(&train.train);
    auto* cmd_train = app.add_subcommand("train", "Train the text adapter on a corpus");
    cmd_train->add_option("--corpus", train.corpus, "Directory of training images")->required();
    cmd_train->add_option("--texts", train.texts, "Target texts (comma separated or repeated)")
        ->delimiter(',')
        ->default_str("red photo");
    cmd_train->add_option("--out", train.out, "Checkpoint to write")->required();
    cmd_train->add_option("--history", train.history, "Loss history TSV (default <out>.history.tsv)");
    cmd_train->add_option("--resume", train.resume, "Continue training from this checkpoint");
    cmd_train->add_option("--limit", train.limit, "Use only the first N images (0 = all)");
    cmd_train->add_option("--steps", train.train.steps)->capture_default_str();
    cmd_train->add_option("--seed", train.train.seed)->capture_default_str();
    cmd_train->add_option("--lr", train.train.learning_rate)->capture_default_str();
    cmd_train->add_option("--beta1", train.train.beta1)->capture_default_str();
    cmd_train->add_option("--beta2", train.train.beta2)->capture_default_str();
    cmd_train->add_option("--batch", train.train.batch_size)->capture_default_str();
    cmd_train->add_option("--s", train.train.s)->capture_default_str();
    cmd_train->add_option("--lambda-content", train.train.lambda_content)->capture_default_str();
    cmd_train->add_option("--lambda-clip", train.train.lambda_clip)->capture_default_str();
    cmd_train->add_option("--lambda-lut", train.train.lambda_lut)->capture_default_str();
    cmd_train->add_option("--lambda-weight", train.train.lambda_weight)->capture_default_str();
    cmd_train->add_option("--lambda-interval", train.train.lambda_interval)->capture_default_str();
    cmd_train->add_option("--alpha", train.train.alpha)->capture_default_str();
    cmd_train->add_option("--grid", train.model.grid_size, "LUT grid size N")->capture_default_str();
    cmd_train->add_option("--hidden", train.model.hidden, "Adapter hidden width")->capture_default_str();
    cmd_train->add_option("--neutral", train.neutral, "Base backbone")
        ->check(CLI::IsMember({"zero", "modulatable", "settled"}))
        ->capture_default_str();
    cmd_train->add_option("--log-every", train.log_every, "Progress line interval (0 = quiet)")->capture_default_str();

    AdjustOptions adjust;
    auto* cmd_adjust = app.add_subcommand("adjust", "Adjust an image toward a text");
    cmd_adjust->add_option("--checkpoint", adjust.checkpoint)->required();
    cmd_adjust->add_option("--image", adjust.image)->required();
    cmd_adjust->add_option("--text", adjust.text)->required();
    cmd_adjust->add_option("--s", adjust.s, "Strength")->capture_default_str();
    cmd_adjust->add_option("--out", adjust.out)->required();
    cmd_adjust->add_option("--export-cube", adjust.cube, "Also write the baked .cube");
    cmd_adjust->add_option("--embeddings", adjust.embeddings, "JSON-lines embedding store (default: toy)");

    std::string lut_cube;
    std::string lut_image;
    std::string lut_out;
    auto* cmd_apply = app.add_subcommand("apply-lut", "Apply a .cube LUT to an image");
    cmd_apply->add_option("--cube", lut_cube)->required();
    cmd_apply->add_option("--image", lut_image)->required();
    cmd_apply->add_option("--out", lut_out)->required();

    EvalOptions eval;
    auto* cmd_eval = app.add_subcommand("eval", "SSIM, image similarity and directional similarity per pair");
    cmd_eval->add_option("--checkpoint", eval.checkpoint)->required();
    cmd_eval->add_option("--images", eval.images, "Directory of images")->required();
    cmd_eval->add_option("--texts", eval.texts)->delimiter(',')->required();
    cmd_eval->add_option("--s", eval.s)->capture_default_str();
    cmd_eval->add_option("--out", eval.out, "JSON report (default stdout)");
    cmd_eval->add_option("--embeddings", eval.embeddings, "JSON-lines embedding store (default: toy)");

    std::string assess_corpus = "data/corpus";
    bool assess_json = false;
    auto* cmd_assess = app.add_subcommand("assess-filters", "Relative similarity before and after each built-in filter");
    cmd_assess->add_option("--corpus", assess_corpus)->capture_default_str();
    cmd_assess->add_flag("--json", assess_json);

    SweepOptions sweep;
    auto* cmd_sweep = app.add_subcommand("sweep", "Outputs and metrics across strengths");
    cmd_sweep->add_option("--checkpoint", sweep.checkpoint)->required();
    cmd_sweep->add_option("--image", sweep.image)->required();
    cmd_sweep->add_option("--text", sweep.text)->required();
    cmd_sweep->add_option("--s-values", sweep.s_values)->delimiter(',');
    cmd_sweep->add_option("--out-dir", sweep.out_dir, "Write one PNG per strength");
    cmd_sweep->add_option("--out", sweep.out, "JSON report (default stdout)");

    ServiceConfig serve;
    auto* cmd_serve = app.add_subcommand("serve", "Start the HTTP service");
    cmd_serve->add_option("--checkpoint", serve.checkpoint)->required();
    cmd_serve->add_option("--host", serve.host)->capture_default_str();
    cmd_serve->add_option("--port", serve.port, "0 binds an ephemeral port")->capture_default_str();
    cmd_serve->add_option("--embeddings", serve.embedding_store, "JSON-lines embedding store (default: toy)");
    cmd_serve->add_option("--max-dimension", serve.max_dimension)->capture_default_str();
    cmd_serve->add_option("--static", serve.static_dir, "Serve built UI assets from this directory");

    std::string corpus_out;
    int corpus_count = 24;
    int corpus_size = 64;
    std::uint64_t corpus_seed = 2023;
    auto* cmd_corpus = app.add_subcommand("make-corpus", "Write the procedural image corpus");
    cmd_corpus->add_option("--out", corpus_out)->required();
    cmd_corpus->add_option("--count", corpus_count)->capture_default_str();
    cmd_corpus->add_option("--size", corpus_size)->capture_default_str();
    cmd_corpus->add_option("--seed", corpus_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            if (train.texts.empty()) train.texts = {"red photo"};
            run_train(train);
        } else if (cmd_adjust->parsed()) {
            run_adjust(adjust);
        } else if (cmd_apply->parsed()) {
            run_apply_lut(lut_cube, lut_image, lut_out);
        } else if (cmd_eval->parsed()) {
            run_eval(eval);
        } else if (cmd_assess->parsed()) {
            run_assess(assess_corpus, assess_json);
        } else if (cmd_sweep->parsed()) {
            run_sweep(sweep);
        } else if (cmd_serve->parsed()) {
            run_serve(serve);
        } else if (cmd_corpus->parsed()) {
            check(tl_corpus_generate(corpus_out.c_str(), corpus_count, corpus_size, corpus_seed));
        }
    } catch (const ApiError& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
