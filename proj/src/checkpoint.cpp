#include "json.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "tonelut/error.hpp"
#include "tonelut/formats.hpp"

namespace tonelut {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

constexpr std::string_view kMagic{"TONELUT\x01", 8};

template <typename T>
void put(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

void put_doubles(std::string& out, std::span<const double> values) {
    out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string_view take(std::size_t n) {
        need(n);
        const auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::vector<double> doubles(std::size_t n) {
        const auto raw = take(n * sizeof(double));
        std::vector<double> out(n);
        std::memcpy(out.data(), raw.data(), raw.size());
        return out;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) fail(ErrorCode::format, "checkpoint is truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

json train_config_json(const TrainConfig& c) {
    return {
        {"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"adam_epsilon", c.adam_epsilon},
        {"steps", c.steps},
        {"batch_size", c.batch_size},
        {"seed", c.seed},
        {"crop_fraction", c.crop_fraction},
        {"flip_probability", c.flip_probability},
        {"brightness_min", c.brightness_min},
        {"brightness_max", c.brightness_max},
        {"saturation_min", c.saturation_min},
        {"saturation_max", c.saturation_max},
        {"s", c.s},
        {"lambda_content", c.loss.content},
        {"lambda_clip", c.loss.clip},
        {"lambda_lut", c.loss.lut},
        {"lambda_weight", c.loss.weight},
        {"lambda_interval", c.loss.interval},
        {"alpha", c.loss.alpha},
    };
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.steps = j.at("steps").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.crop_fraction = j.at("crop_fraction").get<double>();
    c.flip_probability = j.at("flip_probability").get<double>();
    c.brightness_min = j.at("brightness_min").get<double>();
    c.brightness_max = j.at("brightness_max").get<double>();
    c.saturation_min = j.at("saturation_min").get<double>();
    c.saturation_max = j.at("saturation_max").get<double>();
    c.s = j.at("s").get<double>();
    c.loss.content = j.at("lambda_content").get<double>();
    c.loss.clip = j.at("lambda_clip").get<double>();
    c.loss.lut = j.at("lambda_lut").get<double>();
    c.loss.weight = j.at("lambda_weight").get<double>();
    c.loss.interval = j.at("lambda_interval").get<double>();
    c.loss.alpha = j.at("alpha").get<double>();
    return c;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const ModelBundle& b = ck.bundle;
    b.validate();
    const bool has_moments = ck.trainer && !ck.trainer->adam.m.empty();
    if (has_moments && (ck.trainer->adam.m.size() != b.adapter.parameter_count() ||
                        ck.trainer->adam.v.size() != b.adapter.parameter_count())) {
        fail(ErrorCode::dimension, "optimizer state does not match the adapter");
    }
    json header = {
        {"format", "tonelut-checkpoint"},
        {"grid_size", b.grid_size()},
        {"luts", b.bank.count()},
        {"features", b.backbone.weight_predictor.inputs},
        {"embedding_dim", b.adapter.layer1.inputs},
        {"hidden", b.adapter.layer1.outputs},
        {"source_prompt", b.adapter.source_prompt},
        {"train_config", train_config_json(ck.train_config)},
    };
    if (ck.trainer) {
        header["trainer"] = {
            {"step", ck.trainer->step},
            {"adam_t", ck.trainer->adam.t},
            {"rng_state", ck.trainer->rng_state},
            {"has_moments", has_moments},
        };
    } else {
        header["trainer"] = nullptr;
    }
    const std::string header_text = header.dump();

    std::string out;
    out.append(kMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, header_text.size());
    out += header_text;
    for (const auto& lut : b.bank.luts()) {
        for (const auto& v : lut.values()) put_doubles(out, v);
    }
    put_doubles(out, b.backbone.flatten());
    put_doubles(out, b.adapter.flatten());
    if (has_moments) {
        put_doubles(out, ck.trainer->adam.m);
        put_doubles(out, ck.trainer->adam.v);
    }
    return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) || bytes.substr(0, kMagic.size()) != kMagic) {
        fail(ErrorCode::version, "not a tonelut checkpoint (bad magic)");
    }
    Reader in(bytes.substr(kMagic.size()));
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        fail(ErrorCode::version, "checkpoint version " + std::to_string(version) + " is incompatible; expected " +
                                     std::to_string(kCheckpointVersion));
    }
    const auto header_len = in.get<std::uint64_t>();
    json header;
    try {
        header = json::parse(in.take(header_len));
    } catch (const json::exception& e) {
        fail(ErrorCode::format, std::string("corrupt checkpoint header: ") + e.what());
    }

    Checkpoint ck;
    try {
        const int n = header.at("grid_size").get<int>();
        const auto luts = header.at("luts").get<std::size_t>();
        const int features = header.at("features").get<int>();
        const int dim = header.at("embedding_dim").get<int>();
        const int hidden = header.at("hidden").get<int>();
        if (n < 2 || n > 256 || luts < 1 || luts > 64 || features < 1 || dim < 1 || hidden < 1) {
            fail(ErrorCode::format, "checkpoint header has invalid dimensions");
        }
        const std::size_t entries = static_cast<std::size_t>(n) * n * n;
        std::vector<Lut3D> bank;
        for (std::size_t l = 0; l < luts; ++l) {
            const auto raw = in.doubles(entries * 3);
            std::vector<Rgb> values(entries);
            for (std::size_t e = 0; e < entries; ++e) values[e] = {raw[3 * e], raw[3 * e + 1], raw[3 * e + 2]};
            bank.emplace_back(n, std::move(values));
        }
        ck.bundle.bank = BasisLutBank(std::move(bank));
        ck.bundle.backbone.weight_predictor = AffineMap(features, static_cast<int>(luts));
        ck.bundle.backbone.adaint_head = AffineMap(features, 3 * (n - 1));
        ck.bundle.backbone.assign(in.doubles(ck.bundle.backbone.parameter_count()));
        ck.bundle.adapter.layer1 = AffineMap(dim, hidden);
        ck.bundle.adapter.layer2 = AffineMap(hidden, static_cast<int>(ck.bundle.backbone.parameter_count()));
        ck.bundle.adapter.source_prompt = header.at("source_prompt").get<std::string>();
        ck.bundle.adapter.assign(in.doubles(ck.bundle.adapter.parameter_count()));
        ck.train_config = train_config_from_json(header.at("train_config"));

        const json& trainer = header.at("trainer");
        if (!trainer.is_null()) {
            TrainerState state;
            state.step = trainer.at("step").get<std::int64_t>();
            state.adam.t = trainer.at("adam_t").get<std::int64_t>();
            state.rng_state = trainer.at("rng_state").get<std::string>();
            if (trainer.at("has_moments").get<bool>()) {
                state.adam.m = in.doubles(ck.bundle.adapter.parameter_count());
                state.adam.v = in.doubles(ck.bundle.adapter.parameter_count());
            }
            ck.trainer = std::move(state);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::format, std::string("corrupt checkpoint header: ") + e.what());
    }
    if (!in.done()) fail(ErrorCode::format, "checkpoint has trailing bytes");
    ck.bundle.validate();
    return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
    return out;
}

}  // namespace tonelut
