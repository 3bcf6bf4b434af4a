#include "oracles.hpp"

#include <cmath>

namespace tonelut::testing {

namespace {

// Last knot index i with x[i] <= v, capped so that i + 1 exists.
int scan_cell(std::span<const double> x, double v) {
    int cell = 0;
    for (int i = 0; i + 1 < static_cast<int>(x.size()); ++i) {
        if (x[i] <= v) cell = i;
    }
    return cell;
}

}  // namespace

Rgb oracle_lookup(const Lut3D& lut, const SamplingCoordinates& coords, const Rgb& pixel) {
    int cell[3];
    double t[3];
    for (int c = 0; c < 3; ++c) {
        const auto x = coords.axis(c);
        cell[c] = scan_cell(x, pixel[c]);
        t[c] = (pixel[c] - x[cell[c]]) / (x[cell[c] + 1] - x[cell[c]]);
    }
    Rgb out{0.0, 0.0, 0.0};
    for (int dr = 0; dr < 2; ++dr) {
        for (int dg = 0; dg < 2; ++dg) {
            for (int db = 0; db < 2; ++db) {
                const double w = (dr ? t[0] : 1.0 - t[0]) * (dg ? t[1] : 1.0 - t[1]) * (db ? t[2] : 1.0 - t[2]);
                const Rgb& v = lut.at(cell[0] + dr, cell[1] + dg, cell[2] + db);
                for (int c = 0; c < 3; ++c) out[c] += w * v[c];
            }
        }
    }
    return out;
}

double oracle_interval_loss(const BasisLutBank& bank, const SamplingCoordinates& coords, double alpha) {
    const int n = bank.grid_size();
    const auto xr = coords.axis(0);
    const auto xg = coords.axis(1);
    const auto xb = coords.axis(2);
    double total = 0.0;
    for (std::size_t l = 0; l < bank.count(); ++l) {
        const Lut3D& L = bank[l];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    for (int c = 0; c < 3; ++c) {
                        if (i + 1 < n) {
                            const double q = (L.at(i + 1, j, k)[c] - L.at(i, j, k)[c]) / std::pow(xr[i + 1] - xr[i], alpha);
                            total += q * q;
                        }
                        if (j + 1 < n) {
                            const double q = (L.at(i, j + 1, k)[c] - L.at(i, j, k)[c]) / std::pow(xg[j + 1] - xg[j], alpha);
                            total += q * q;
                        }
                        if (k + 1 < n) {
                            const double q = (L.at(i, j, k + 1)[c] - L.at(i, j, k)[c]) / std::pow(xb[k + 1] - xb[k], alpha);
                            total += q * q;
                        }
                    }
                }
            }
        }
    }
    return total;
}

double oracle_ssim(const ImageBuffer& a, const ImageBuffer& b) {
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double kernel[kWin][kWin];
    double ksum = 0.0;
    for (int y = 0; y < kWin; ++y) {
        for (int x = 0; x < kWin; ++x) {
            const double dx = x - kWin / 2;
            const double dy = y - kWin / 2;
            kernel[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            ksum += kernel[y][x];
        }
    }
    auto gray = [](const Rgb& p) { return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]; };
    double total = 0.0;
    int windows = 0;
    for (int oy = 0; oy + kWin <= a.height(); ++oy) {
        for (int ox = 0; ox + kWin <= a.width(); ++ox) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int y = 0; y < kWin; ++y) {
                for (int x = 0; x < kWin; ++x) {
                    const double w = kernel[y][x] / ksum;
                    const double va = gray(a.at(ox + x, oy + y));
                    const double vb = gray(b.at(ox + x, oy + y));
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return total / windows;
}

std::vector<double> oracle_features(const ImageBuffer& image) {
    const double n = static_cast<double>(image.pixel_count());
    std::vector<double> f(30, 0.0);
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (const Rgb& p : image.pixels()) sum += p[c];
        const double mean = sum / n;
        double var = 0.0;
        for (const Rgb& p : image.pixels()) var += (p[c] - mean) * (p[c] - mean);
        f[c] = mean;
        f[3 + c] = std::sqrt(var / n);
        for (int k = 0; k < 8; ++k) {
            double h = 0.0;
            for (const Rgb& p : image.pixels()) {
                const double dist = std::abs(p[c] - k / 7.0) * 7.0;
                if (dist < 1.0) h += 1.0 - dist;
            }
            f[6 + 8 * c + k] = h / n;
        }
    }
    return f;
}

std::vector<double> oracle_matvec(const std::vector<double>& row_major, const std::vector<double>& bias,
                                  const std::vector<double>& x) {
    std::vector<double> y(bias);
    for (std::size_t r = 0; r < y.size(); ++r) {
        for (std::size_t c = 0; c < x.size(); ++c) y[r] += row_major[r * x.size() + c] * x[c];
    }
    return y;
}

std::vector<double> oracle_mlp(const std::vector<double>& w1, const std::vector<double>& b1,
                               const std::vector<double>& w2, const std::vector<double>& b2,
                               const std::vector<double>& x) {
    std::vector<double> h = oracle_matvec(w1, b1, x);
    for (auto& v : h) v = v > 0.0 ? v : 0.0;
    return oracle_matvec(w2, b2, h);
}

}  // namespace tonelut::testing
