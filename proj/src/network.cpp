#include "tonelut/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tonelut/error.hpp"
#include "tonelut/losses.hpp"

namespace tonelut {

namespace {

constexpr double kBinWidth = 1.0 / (kHistogramBins - 1);
constexpr double kMinInterval = 1e-12;

double kernel(double v, int bin) {
    return std::max(0.0, 1.0 - std::abs(v - bin * kBinWidth) / kBinWidth);
}

double kernel_slope(double v, int bin) {
    const double offset = v - bin * kBinWidth;
    if (std::abs(offset) >= kBinWidth) return 0.0;
    return offset >= 0.0 ? -1.0 / kBinWidth : 1.0 / kBinWidth;
}

std::size_t hist_index(int channel, int bin) {
    return 6 + static_cast<std::size_t>(channel) * kHistogramBins + bin;
}

void require_features(std::span<const double> f, int expected) {
    if (static_cast<int>(f.size()) != expected) {
        fail(ErrorCode::dimension, "expected " + std::to_string(expected) + " features, got " +
                                       std::to_string(f.size()));
    }
}

std::vector<double> softmax(std::span<const double> z) {
    const double peak = *std::max_element(z.begin(), z.end());
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - peak);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::vector<double> interval_logits(const BackboneParams& params, const FeatureVector& features) {
    require_features(features, params.adaint_head.inputs);
    return params.adaint_head.apply(features);
}

}  // namespace

FeatureVector extract_features(const ImageBuffer& image) {
    if (image.empty()) fail(ErrorCode::dimension, "cannot extract features from an empty image");
    const double n = static_cast<double>(image.pixel_count());
    FeatureVector f(kFeatureCount, 0.0);
    for (const auto& p : image.pixels()) {
        for (int c = 0; c < 3; ++c) {
            f[c] += p[c];
            // Only the two kernels bracketing v are nonzero.
            const int lo = std::min(static_cast<int>(p[c] / kBinWidth), kHistogramBins - 1);
            f[hist_index(c, lo)] += kernel(p[c], lo);
            if (lo + 1 < kHistogramBins) f[hist_index(c, lo + 1)] += kernel(p[c], lo + 1);
        }
    }
    for (int c = 0; c < 3; ++c) f[c] /= n;
    for (const auto& p : image.pixels()) {
        for (int c = 0; c < 3; ++c) {
            const double d = p[c] - f[c];
            f[3 + c] += d * d;
        }
    }
    for (int c = 0; c < 3; ++c) f[3 + c] = std::sqrt(f[3 + c] / n);
    for (std::size_t i = 6; i < f.size(); ++i) f[i] /= n;
    return f;
}

std::vector<Rgb> extract_features_grad(const ImageBuffer& image, std::span<const double> upstream) {
    require_features(upstream, kFeatureCount);
    const FeatureVector f = extract_features(image);
    const double n = static_cast<double>(image.pixel_count());
    std::vector<Rgb> grad(image.pixel_count(), Rgb{0.0, 0.0, 0.0});
    const auto pixels = image.pixels();
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        for (int c = 0; c < 3; ++c) {
            const double v = pixels[p][c];
            double g = upstream[c] / n;
            const double sd = f[3 + c];
            if (sd > 0.0) g += upstream[3 + c] * (v - f[c]) / (n * sd);
            for (int k = 0; k < kHistogramBins; ++k) {
                g += upstream[hist_index(c, k)] * kernel_slope(v, k) / n;
            }
            grad[p][c] = g;
        }
    }
    return grad;
}

AffineMap::AffineMap(int inputs_, int outputs_)
    : inputs(inputs_),
      outputs(outputs_),
      weight(static_cast<std::size_t>(inputs_) * static_cast<std::size_t>(outputs_), 0.0),
      bias(static_cast<std::size_t>(outputs_), 0.0) {
    if (inputs_ <= 0 || outputs_ <= 0) fail(ErrorCode::dimension, "affine map dimensions must be positive");
}

std::vector<double> AffineMap::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != inputs) {
        fail(ErrorCode::dimension, "affine map expects " + std::to_string(inputs) + " inputs, got " +
                                       std::to_string(x.size()));
    }
    std::vector<double> y(bias);
    for (int r = 0; r < outputs; ++r) {
        const double* row = weight.data() + static_cast<std::size_t>(r) * inputs;
        double acc = 0.0;
        for (int c = 0; c < inputs; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
    return y;
}

std::vector<double> AffineMap::apply_transpose(std::span<const double> g) const {
    std::vector<double> out(static_cast<std::size_t>(inputs), 0.0);
    for (int r = 0; r < outputs; ++r) {
        if (g[r] == 0.0) continue;
        const double* row = weight.data() + static_cast<std::size_t>(r) * inputs;
        for (int c = 0; c < inputs; ++c) out[c] += row[c] * g[r];
    }
    return out;
}

namespace {

void append(std::vector<double>& out, const AffineMap& m) {
    out.insert(out.end(), m.weight.begin(), m.weight.end());
    out.insert(out.end(), m.bias.begin(), m.bias.end());
}

std::span<const double> take(std::span<const double> flat, AffineMap& m) {
    std::copy_n(flat.begin(), m.weight.size(), m.weight.begin());
    flat = flat.subspan(m.weight.size());
    std::copy_n(flat.begin(), m.bias.size(), m.bias.begin());
    return flat.subspan(m.bias.size());
}

}  // namespace

std::vector<double> BackboneParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    append(out, weight_predictor);
    append(out, adaint_head);
    return out;
}

void BackboneParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        fail(ErrorCode::dimension, "backbone expects " + std::to_string(parameter_count()) +
                                       " parameters, got " + std::to_string(flat.size()));
    }
    take(take(flat, weight_predictor), adaint_head);
}

namespace {

// Least-squares basis weights reproducing the input on an 11^3 lattice.
std::vector<double> identity_fit(const BasisLutBank& bank, const SamplingCoordinates& coords) {
    constexpr int kSamples = 11;
    std::vector<Rgb> points;
    for (int b = 0; b < kSamples; ++b) {
        for (int g = 0; g < kSamples; ++g) {
            for (int r = 0; r < kSamples; ++r) {
                points.push_back({r / (kSamples - 1.0), g / (kSamples - 1.0), b / (kSamples - 1.0)});
            }
        }
    }
    const ImageBuffer inputs(static_cast<int>(points.size()), 1, points);
    const std::size_t luts = bank.count();
    std::vector<std::vector<Rgb>> basis;
    for (const Lut3D& lut : bank.luts()) basis.push_back(lookup_unclamped(lut, coords, inputs));

    // Normal equations, solved by Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> m(luts, std::vector<double>(luts + 1, 0.0));
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (int c = 0; c < 3; ++c) {
            for (std::size_t u = 0; u < luts; ++u) {
                for (std::size_t v = 0; v < luts; ++v) m[u][v] += basis[u][p][c] * basis[v][p][c];
                m[u][luts] += basis[u][p][c] * points[p][c];
            }
        }
    }
    for (std::size_t col = 0; col < luts; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < luts; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) < 1e-12) {
            fail(ErrorCode::config, "basis LUTs are linearly dependent; cannot fit a settled backbone");
        }
        std::swap(m[col], m[pivot]);
        for (std::size_t r = 0; r < luts; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (std::size_t k = col; k <= luts; ++k) m[r][k] -= f * m[col][k];
        }
    }
    std::vector<double> beta(luts);
    for (std::size_t l = 0; l < luts; ++l) beta[l] = m[l][luts] / m[l][l];
    return beta;
}

}  // namespace

BackboneParams BackboneParams::neutral(const BasisLutBank& bank, NeutralStyle style, double alpha) {
    const int grid_size = bank.grid_size();
    const int luts = static_cast<int>(bank.count());
    const int features = kFeatureCount;
    if (grid_size < 2) fail(ErrorCode::dimension, "grid size must be >= 2");
    if (luts < 1) fail(ErrorCode::dimension, "need at least one basis LUT");
    BackboneParams p;
    p.weight_predictor = AffineMap(features, luts);
    p.adaint_head = AffineMap(features, 3 * (grid_size - 1));
    p.weight_predictor.bias[0] = 1.0;
    if (style == NeutralStyle::zero) return p;

    constexpr double kHistogramGain = 0.5;
    constexpr double kStatGain = 0.5;
    constexpr double kLogitBias = 1.0;
    const int intervals = grid_size - 1;
    std::array<std::vector<double>, 3> target;
    for (int c = 0; c < 3; ++c) {
        target[c] = style == NeutralStyle::settled ? interval_loss_minimizer(bank, c, alpha)
                                                   : std::vector<double>(intervals, 1.0 / intervals);
    }
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < intervals; ++i) {
            const std::size_t r = static_cast<std::size_t>(c) * intervals + i;
            double* row = p.adaint_head.weight.data() + r * features;
            row[c] = kStatGain;
            row[3 + c] = kStatGain;
            for (int k = 0; k < kHistogramBins; ++k) row[hist_index(c, k)] = kStatGain;
            p.adaint_head.bias[r] = kLogitBias;
            if (style == NeutralStyle::settled) p.adaint_head.bias[r] += std::log(target[c][i] * intervals);
        }
    }
    if (style == NeutralStyle::settled) {
        std::array<std::vector<double>, 3> axes;
        for (int c = 0; c < 3; ++c) {
            axes[c].assign(grid_size, 0.0);
            for (int i = 0; i < intervals; ++i) axes[c][i + 1] = axes[c][i] + target[c][i];
            axes[c].back() = 1.0;
        }
        const std::vector<double> beta = identity_fit(bank, SamplingCoordinates(std::move(axes)));
        for (int l = 0; l < luts; ++l) p.weight_predictor.bias[l] = beta[l];
    }
    for (int l = 0; l < luts; ++l) {
        double* row = p.weight_predictor.weight.data() + static_cast<std::size_t>(l) * features;
        for (int k = 0; k < kHistogramBins; ++k) {
            row[hist_index(0, k)] = kHistogramGain;
            row[hist_index(1, k)] = -kHistogramGain;
            row[hist_index(2, k)] = -kHistogramGain;
        }
        p.weight_predictor.bias[l] += kHistogramGain;
    }
    return p;
}

std::vector<double> AdapterNetwork::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    append(out, layer1);
    append(out, layer2);
    return out;
}

void AdapterNetwork::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        fail(ErrorCode::dimension, "adapter expects " + std::to_string(parameter_count()) +
                                       " parameters, got " + std::to_string(flat.size()));
    }
    take(take(flat, layer1), layer2);
}

void ModelBundle::validate() const {
    const int n = bank.grid_size();
    if (bank.count() == 0) fail(ErrorCode::dimension, "model has no basis LUTs");
    if (backbone.weight_predictor.outputs != static_cast<int>(bank.count())) {
        fail(ErrorCode::dimension, "weight predictor output count does not match the basis bank");
    }
    if (backbone.adaint_head.outputs != 3 * (n - 1)) {
        fail(ErrorCode::dimension, "AdaInt head does not match the LUT grid size");
    }
    if (backbone.weight_predictor.inputs != kFeatureCount || backbone.adaint_head.inputs != kFeatureCount) {
        fail(ErrorCode::dimension, "backbone heads must take the color-statistics features");
    }
    if (adapter.layer2.outputs != static_cast<int>(backbone.parameter_count())) {
        fail(ErrorCode::dimension, "adapter output size does not match the backbone parameter count");
    }
    if (adapter.layer1.outputs != adapter.layer2.inputs) {
        fail(ErrorCode::dimension, "adapter hidden widths disagree");
    }
}

LutWeights predict_weights(const BackboneParams& params, const FeatureVector& features) {
    require_features(features, params.weight_predictor.inputs);
    return params.weight_predictor.apply(features);
}

SamplingCoordinates coords_from_logits(std::span<const double> logits, int grid_size) {
    const std::size_t intervals = static_cast<std::size_t>(grid_size - 1);
    if (grid_size < 2 || logits.size() != 3 * intervals) {
        fail(ErrorCode::dimension, "expected " + std::to_string(3 * intervals) + " interval logits");
    }
    std::array<std::vector<double>, 3> axes;
    for (int c = 0; c < 3; ++c) {
        for (double z : logits.subspan(c * intervals, intervals)) {
            if (!std::isfinite(z)) fail(ErrorCode::invalid_argument, "interval logit is not finite");
        }
        std::vector<double> d = softmax(logits.subspan(c * intervals, intervals));
        // Extreme logits can underflow an interval to zero; keep every
        // interval strictly positive.
        if (*std::min_element(d.begin(), d.end()) < kMinInterval) {
            double sum = 0.0;
            for (auto& v : d) sum += (v = std::max(v, kMinInterval));
            for (auto& v : d) v /= sum;
        }
        auto& x = axes[c];
        x.assign(intervals + 1, 0.0);
        for (std::size_t i = 0; i < intervals; ++i) x[i + 1] = x[i] + d[i];
        x.back() = 1.0;
    }
    return SamplingCoordinates(std::move(axes));
}

std::vector<double> coords_from_logits_grad(std::span<const double> logits, int grid_size,
                                            const std::array<std::vector<double>, 3>& upstream) {
    const std::size_t intervals = static_cast<std::size_t>(grid_size - 1);
    std::vector<double> grad(3 * intervals, 0.0);
    for (int c = 0; c < 3; ++c) {
        const auto& gx = upstream[c];
        if (gx.empty()) continue;
        if (gx.size() != intervals + 1) fail(ErrorCode::dimension, "coordinate gradient has the wrong length");
        const std::vector<double> d = softmax(logits.subspan(c * intervals, intervals));
        // x(i) = sum_{j<i} d(j), so dL/dd(j) = sum_{i>j} dL/dx(i).
        std::vector<double> gd(intervals, 0.0);
        double suffix = 0.0;
        for (std::size_t j = intervals; j-- > 0;) {
            suffix += gx[j + 1];
            gd[j] = suffix;
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < intervals; ++j) mean += d[j] * gd[j];
        for (std::size_t j = 0; j < intervals; ++j) grad[c * intervals + j] = d[j] * (gd[j] - mean);
    }
    return grad;
}

SamplingCoordinates predict_coords(const BackboneParams& params, const FeatureVector& features) {
    return coords_from_logits(interval_logits(params, features), params.grid_size());
}

std::vector<double> adapter_forward(const AdapterNetwork& adapter, const EmbeddingVector& target,
                                    const EmbeddingVector& source) {
    if (target.dim() != source.dim() || static_cast<int>(target.dim()) != adapter.embedding_dim()) {
        fail(ErrorCode::dimension, "adapter expects embeddings of dimension " +
                                       std::to_string(adapter.embedding_dim()));
    }
    std::vector<double> direction(target.dim());
    for (std::size_t i = 0; i < direction.size(); ++i) direction[i] = target[i] - source[i];
    std::vector<double> hidden = adapter.layer1.apply(direction);
    for (auto& h : hidden) h = std::max(h, 0.0);
    return adapter.layer2.apply(hidden);
}

BackboneParams modulate(const BackboneParams& params, std::span<const double> delta,
                        const ModulationConfig& cfg) {
    std::vector<double> theta = params.flatten();
    if (delta.size() != theta.size()) {
        fail(ErrorCode::dimension, "modulation offsets have length " + std::to_string(delta.size()) +
                                       ", backbone has " + std::to_string(theta.size()) + " parameters");
    }
    if (!std::isfinite(cfg.s)) fail(ErrorCode::invalid_argument, "scaling factor must be finite");
    BackboneParams out = params;
    if (cfg.s == 0.0) return out;
    for (std::size_t p = 0; p < theta.size(); ++p) theta[p] *= 1.0 + cfg.s * delta[p];
    out.assign(theta);
    return out;
}

ImageBuffer backbone_forward(const BasisLutBank& bank, const BackboneParams& params,
                             const ImageBuffer& image) {
    const FeatureVector f = extract_features(image);
    return lookup(fuse(bank, predict_weights(params, f)), predict_coords(params, f), image);
}

ForwardResult forward(const ModelBundle& bundle, const ImageBuffer& image, const EmbeddingVector& target,
                      const EmbeddingVector& source, const ModulationConfig& cfg) {
    ForwardResult r;
    r.features = extract_features(image);
    if (target.dim() != source.dim() || static_cast<int>(target.dim()) != bundle.adapter.embedding_dim()) {
        fail(ErrorCode::dimension, "adapter expects embeddings of dimension " +
                                       std::to_string(bundle.adapter.embedding_dim()));
    }
    r.direction.resize(target.dim());
    for (std::size_t i = 0; i < r.direction.size(); ++i) r.direction[i] = target[i] - source[i];
    r.hidden_pre = bundle.adapter.layer1.apply(r.direction);
    std::vector<double> hidden(r.hidden_pre);
    for (auto& h : hidden) h = std::max(h, 0.0);
    r.delta = bundle.adapter.layer2.apply(hidden);
    r.modulated = modulate(bundle.backbone, r.delta, cfg);
    r.weights = predict_weights(r.modulated, r.features);
    r.coords = predict_coords(r.modulated, r.features);
    r.fused = fuse(bundle.bank, r.weights);
    r.output = lookup(r.fused, r.coords, image);
    return r;
}

std::vector<double> predict_weights_grad(const BackboneParams& params, const FeatureVector& features,
                                         std::span<const double> upstream) {
    require_features(features, params.weight_predictor.inputs);
    if (upstream.size() != static_cast<std::size_t>(params.weight_predictor.outputs)) {
        fail(ErrorCode::dimension, "weight gradient has the wrong length");
    }
    std::vector<double> grad(params.parameter_count(), 0.0);
    const std::size_t fc = features.size();
    for (std::size_t l = 0; l < upstream.size(); ++l) {
        for (std::size_t j = 0; j < fc; ++j) grad[l * fc + j] = upstream[l] * features[j];
        grad[params.weight_predictor.weight.size() + l] = upstream[l];
    }
    return grad;
}

std::vector<double> predict_coords_grad(const BackboneParams& params, const FeatureVector& features,
                                        const std::array<std::vector<double>, 3>& upstream) {
    const std::vector<double> logits = interval_logits(params, features);
    const std::vector<double> g_logits = coords_from_logits_grad(logits, params.grid_size(), upstream);
    std::vector<double> grad(params.parameter_count(), 0.0);
    const std::size_t offset = params.weight_predictor.parameter_count();
    const std::size_t fc = features.size();
    const std::size_t bias_offset = offset + params.adaint_head.weight.size();
    for (std::size_t r = 0; r < g_logits.size(); ++r) {
        for (std::size_t j = 0; j < fc; ++j) grad[offset + r * fc + j] = g_logits[r] * features[j];
        grad[bias_offset + r] = g_logits[r];
    }
    return grad;
}

std::vector<double> fuse_grad(const BasisLutBank& bank, std::span<const Rgb> upstream) {
    std::vector<double> grad(bank.count(), 0.0);
    for (std::size_t l = 0; l < bank.count(); ++l) {
        const auto basis = bank[l].values();
        if (upstream.size() != basis.size()) fail(ErrorCode::dimension, "LUT gradient has the wrong length");
        double acc = 0.0;
        for (std::size_t e = 0; e < basis.size(); ++e) {
            acc += upstream[e][0] * basis[e][0] + upstream[e][1] * basis[e][1] + upstream[e][2] * basis[e][2];
        }
        grad[l] = acc;
    }
    return grad;
}

std::vector<double> modulate_grad(const BackboneParams& params, const ModulationConfig& cfg,
                                  std::span<const double> upstream) {
    const std::vector<double> theta = params.flatten();
    if (upstream.size() != theta.size()) fail(ErrorCode::dimension, "parameter gradient has the wrong length");
    std::vector<double> grad(theta.size());
    for (std::size_t p = 0; p < theta.size(); ++p) grad[p] = upstream[p] * theta[p] * cfg.s;
    return grad;
}

namespace {

std::vector<double> adapter_pullback(const AdapterNetwork& adapter, std::span<const double> direction,
                                     std::span<const double> pre, std::span<const double> upstream) {
    const AffineMap& l1 = adapter.layer1;
    const AffineMap& l2 = adapter.layer2;
    if (upstream.size() != static_cast<std::size_t>(l2.outputs)) {
        fail(ErrorCode::dimension, "offset gradient has the wrong length");
    }
    std::vector<double> hidden(pre.begin(), pre.end());
    for (auto& h : hidden) h = std::max(h, 0.0);

    std::vector<double> grad(adapter.parameter_count(), 0.0);
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + l1.weight.size();
    double* g_w2 = g_b1 + l1.bias.size();
    double* g_b2 = g_w2 + l2.weight.size();
    for (int p = 0; p < l2.outputs; ++p) {
        const double gp = upstream[p];
        g_b2[p] = gp;
        if (gp == 0.0) continue;
        double* row = g_w2 + static_cast<std::size_t>(p) * l2.inputs;
        for (int h = 0; h < l2.inputs; ++h) row[h] = gp * hidden[h];
    }
    const std::vector<double> g_hidden = l2.apply_transpose(upstream);
    for (int h = 0; h < l1.outputs; ++h) {
        const double gh = pre[h] > 0.0 ? g_hidden[h] : 0.0;
        g_b1[h] = gh;
        double* row = g_w1 + static_cast<std::size_t>(h) * l1.inputs;
        for (int d = 0; d < l1.inputs; ++d) row[d] = gh * direction[d];
    }
    return grad;
}

}  // namespace

std::vector<double> adapter_forward_grad(const AdapterNetwork& adapter, const EmbeddingVector& target,
                                         const EmbeddingVector& source, std::span<const double> upstream) {
    if (target.dim() != source.dim() || static_cast<int>(target.dim()) != adapter.embedding_dim()) {
        fail(ErrorCode::dimension, "adapter expects embeddings of dimension " +
                                       std::to_string(adapter.embedding_dim()));
    }
    std::vector<double> direction(target.dim());
    for (std::size_t i = 0; i < direction.size(); ++i) direction[i] = target[i] - source[i];
    return adapter_pullback(adapter, direction, adapter.layer1.apply(direction), upstream);
}

std::vector<double> forward_grad(const ModelBundle& bundle, const ImageBuffer& image,
                                 const ForwardResult& result, const ModulationConfig& cfg,
                                 const ForwardUpstream& upstream) {
    const int n = bundle.grid_size();
    const std::size_t luts = bundle.bank.count();

    std::array<std::vector<double>, 3> g_coords;
    for (auto& axis : g_coords) axis.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> g_weights(luts, 0.0);

    if (!upstream.image.empty()) {
        const LookupGradient lg = lookup_grad(result.fused, result.coords, image, upstream.image);
        for (int c = 0; c < 3; ++c) {
            for (int i = 0; i < n; ++i) g_coords[c][i] += lg.coords[c][i];
        }
        g_weights = fuse_grad(bundle.bank, lg.lut);
    }
    if (!upstream.weights.empty()) {
        if (upstream.weights.size() != luts) fail(ErrorCode::dimension, "weight gradient has the wrong length");
        for (std::size_t l = 0; l < luts; ++l) g_weights[l] += upstream.weights[l];
    }
    for (int c = 0; c < 3; ++c) {
        if (upstream.coords[c].empty()) continue;
        if (upstream.coords[c].size() != static_cast<std::size_t>(n)) {
            fail(ErrorCode::dimension, "coordinate gradient has the wrong length");
        }
        for (int i = 0; i < n; ++i) g_coords[c][i] += upstream.coords[c][i];
    }

    std::vector<double> g_theta = predict_weights_grad(result.modulated, result.features, g_weights);
    const std::vector<double> g_adaint = predict_coords_grad(result.modulated, result.features, g_coords);
    for (std::size_t p = 0; p < g_theta.size(); ++p) g_theta[p] += g_adaint[p];
    return adapter_pullback(bundle.adapter, result.direction, result.hidden_pre,
                            modulate_grad(bundle.backbone, cfg, g_theta));
}

std::vector<double> forward_grad(const ModelBundle& bundle, const ImageBuffer& image,
                                 const EmbeddingVector& target, const EmbeddingVector& source,
                                 const ModulationConfig& cfg, const ForwardUpstream& upstream) {
    return forward_grad(bundle, image, forward(bundle, image, target, source, cfg), cfg, upstream);
}

}  // namespace tonelut
