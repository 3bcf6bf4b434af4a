#include "tonelut/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tonelut/error.hpp"

namespace tonelut {

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> taps{};
    double sum = 0.0;
    const int half = kSsimWindow / 2;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double x = i - half;
        taps[i] = std::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

std::vector<double> luma_plane(const ImageBuffer& image) {
    std::vector<double> out(image.pixel_count());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = luma(image.pixels()[p]);
    return out;
}

// Valid-region separable filtering: output is (w - 10) x (h - 10).
std::vector<double> blur_valid(const std::vector<double>& plane, int w, int h) {
    static const auto taps = gaussian_taps();
    const int ow = w - kSsimWindow + 1;
    const int oh = h - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kSsimWindow; ++t) acc += taps[t] * plane[static_cast<std::size_t>(y) * w + x + t];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kSsimWindow; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

Rgb clamp01(Rgb p) {
    for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
}

Rgb gamma(const Rgb& p, double g) { return {std::pow(p[0], g), std::pow(p[1], g), std::pow(p[2], g)}; }

Rgb gains(const Rgb& p, double r, double g, double b) { return clamp01({p[0] * r, p[1] * g, p[2] * b}); }

Rgb saturate(const Rgb& p, double factor) {
    const double y = luma(p);
    return clamp01({y + factor * (p[0] - y), y + factor * (p[1] - y), y + factor * (p[2] - y)});
}

Rgb contrast(const Rgb& p, double factor) {
    return clamp01({0.5 + factor * (p[0] - 0.5), 0.5 + factor * (p[1] - 0.5), 0.5 + factor * (p[2] - 0.5)});
}

Rgb tint(const Rgb& p, const Rgb& color, double amount) {
    return clamp01({p[0] + amount * (color[0] - p[0]), p[1] + amount * (color[1] - p[1]),
                    p[2] + amount * (color[2] - p[2])});
}

}  // namespace

double grayscale_ssim(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) fail(ErrorCode::dimension, "SSIM needs equally sized images");
    if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
        fail(ErrorCode::dimension, "SSIM needs images of at least 11x11");
    }
    const int w = a.width();
    const int h = a.height();
    const auto la = luma_plane(a);
    const auto lb = luma_plane(b);
    std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        aa[i] = la[i] * la[i];
        bb[i] = lb[i] * lb[i];
        ab[i] = la[i] * lb[i];
    }
    const auto mu_a = blur_valid(la, w, h);
    const auto mu_b = blur_valid(lb, w, h);
    const auto e_aa = blur_valid(aa, w, h);
    const auto e_bb = blur_valid(bb, w, h);
    const auto e_ab = blur_valid(ab, w, h);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2)) /
               ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
    }
    return sum / static_cast<double>(mu_a.size());
}

double image_similarity(const EmbeddingVector& a, const EmbeddingVector& b) { return dot(a.values(), b.values()); }

double directional_similarity(const EmbeddingVector& image_in, const EmbeddingVector& image_out,
                              const EmbeddingVector& text_source, const EmbeddingVector& text_target) {
    if (image_in.dim() != text_source.dim() || image_out.dim() != image_in.dim() ||
        text_target.dim() != text_source.dim()) {
        fail(ErrorCode::dimension, "directional similarity needs embeddings of one dimension");
    }
    std::vector<double> di(image_in.dim()), dt(image_in.dim());
    for (std::size_t i = 0; i < di.size(); ++i) {
        di[i] = image_out[i] - image_in[i];
        dt[i] = text_target[i] - text_source[i];
    }
    return cosine(di, dt, 1e-8);
}

ImageBuffer FilterSpec::apply(const ImageBuffer& image) const {
    std::vector<Rgb> out(image.pixel_count());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = transform(image.pixels()[p]);
    return clamp_to_image(image.width(), image.height(), std::move(out));
}

const std::vector<FilterSpec>& filter_registry() {
    static const std::vector<FilterSpec> registry = {
        {"bright", [](const Rgb& p) { return gamma(p, 0.6); }},
        {"dark", [](const Rgb& p) { return gamma(p, 1.7); }},
        {"warm", [](const Rgb& p) { return gains(p, 1.15, 1.0, 0.8); }},
        {"cold", [](const Rgb& p) { return gains(p, 0.82, 1.0, 1.2); }},
        {"aged", [](const Rgb& p) { return tint(saturate(p, 0.4), {0.7, 0.55, 0.35}, 0.3); }},
        {"cinematic", [](const Rgb& p) { return gains(contrast(gamma(p, 1.2), 1.15), 0.85, 1.0, 1.05); }},
        {"faded", [](const Rgb& p) { return saturate(clamp01({0.2 + 0.75 * p[0], 0.2 + 0.75 * p[1], 0.2 + 0.75 * p[2]}), 0.7); }},
        {"golden", [](const Rgb& p) { return gains(gamma(p, 0.85), 1.2, 1.05, 0.7); }},
        {"moonlight", [](const Rgb& p) { return gains(saturate(gamma(p, 1.3), 0.6), 0.75, 0.85, 1.1); }},
    };
    return registry;
}

std::vector<FilterAssessment> assess_filters(const std::vector<ImageBuffer>& corpus,
                                             const std::vector<FilterSpec>& filters,
                                             const EmbeddingProvider& provider, const std::string& anchor) {
    if (corpus.empty()) fail(ErrorCode::invalid_argument, "filter assessment needs at least one image");
    const EmbeddingVector anchor_embedding = provider.text(anchor);
    std::vector<EmbeddingVector> source_embeddings;
    source_embeddings.reserve(corpus.size());
    for (const auto& image : corpus) source_embeddings.push_back(provider.image(image));

    std::vector<FilterAssessment> table;
    for (const auto& filter : filters) {
        const EmbeddingVector target = provider.text(filter.name);
        FilterAssessment row{filter.name, 0.0, 0.0};
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            row.mean_source += relative_similarity(source_embeddings[i], target, anchor_embedding);
            row.mean_filtered += relative_similarity(provider.image(filter.apply(corpus[i])), target, anchor_embedding);
        }
        row.mean_source /= static_cast<double>(corpus.size());
        row.mean_filtered /= static_cast<double>(corpus.size());
        table.push_back(row);
    }
    return table;
}

EvalReport evaluate(const ModelBundle& bundle, const EmbeddingProvider& provider,
                    const std::vector<ImageBuffer>& images, const std::vector<std::string>& texts, double s) {
    EvalReport report;
    const EmbeddingVector source = provider.text(bundle.adapter.source_prompt);
    double dir_sum = 0.0;
    std::size_t dir_count = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const EmbeddingVector e_in = provider.image(images[i]);
        for (const auto& text : texts) {
            const EmbeddingVector target = provider.text(text);
            const ForwardResult fwd = forward(bundle, images[i], target, source, ModulationConfig{s});
            const EmbeddingVector e_out = provider.image(fwd.output);
            EvalRow row;
            row.image = i;
            row.text = text;
            row.grayscale_ssim = grayscale_ssim(images[i], fwd.output);
            row.image_similarity = image_similarity(e_in, e_out);
            try {
                row.directional_similarity = directional_similarity(e_in, e_out, source, target);
                dir_sum += *row.directional_similarity;
                ++dir_count;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::degenerate_direction) throw;
            }
            report.mean_grayscale_ssim += row.grayscale_ssim;
            report.mean_image_similarity += row.image_similarity;
            report.rows.push_back(std::move(row));
        }
    }
    if (!report.rows.empty()) {
        report.mean_grayscale_ssim /= static_cast<double>(report.rows.size());
        report.mean_image_similarity /= static_cast<double>(report.rows.size());
    }
    if (dir_count > 0) report.mean_directional_similarity = dir_sum / static_cast<double>(dir_count);
    return report;
}

std::vector<SweepPoint> strength_sweep(const ModelBundle& bundle, const EmbeddingProvider& provider,
                                       const ImageBuffer& image, const std::string& text,
                                       const std::vector<double>& s_values) {
    for (double s : s_values) {
        if (!std::isfinite(s)) fail(ErrorCode::invalid_argument, "sweep scaling factors must be finite");
    }
    const EmbeddingVector source = provider.text(bundle.adapter.source_prompt);
    const EmbeddingVector target = provider.text(text);
    const EmbeddingVector e_in = provider.image(image);
    std::vector<SweepPoint> points;
    for (double s : s_values) {
        SweepPoint pt;
        pt.s = s;
        pt.output = forward(bundle, image, target, source, ModulationConfig{s}).output;
        const EmbeddingVector e_out = provider.image(pt.output);
        pt.grayscale_ssim = grayscale_ssim(image, pt.output);
        pt.image_similarity = image_similarity(e_in, e_out);
        try {
            pt.directional_similarity = directional_similarity(e_in, e_out, source, target);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_direction) throw;
        }
        pt.relative_similarity = relative_similarity(e_out, target, source);
        if (!points.empty()) pt.max_delta_from_previous = max_abs_difference(points.back().output, pt.output);
        points.push_back(std::move(pt));
    }
    return points;
}

}  // namespace tonelut
