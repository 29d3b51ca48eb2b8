#include "deeprep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deeprep {

namespace {

constexpr double kPsnrCap = 100.0;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_dims(const Tensor3& x, const Tensor3& ref, const char* where) {
    if (!x.same_dims(ref)) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
}

double band_mse(const Tensor3& x, const Tensor3& ref, Index band) {
    double acc = 0.0;
    for (Index l = 0; l < x.n1(); ++l) {
        for (Index j = 0; j < x.n2(); ++j) {
            const double d = clamp01(x(l, j, band)) - clamp01(ref(l, j, band));
            acc += d * d;
        }
    }
    return acc / static_cast<double>(x.n1() * x.n2());
}

}  // namespace

std::vector<double> per_band_psnr(const Tensor3& x, const Tensor3& ref) {
    check_dims(x, ref, "psnr");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x.n3()));
    for (Index s = 0; s < x.n3(); ++s) {
        const double mse = band_mse(x, ref, s);
        out.push_back(mse == 0.0 ? kPsnrCap : 10.0 * std::log10(1.0 / mse));
    }
    return out;
}

double psnr(const Tensor3& x, const Tensor3& ref, PsnrMode mode) {
    check_dims(x, ref, "psnr");
    if (mode == PsnrMode::global) {
        double acc = 0.0;
        for (Index s = 0; s < x.n3(); ++s) acc += band_mse(x, ref, s);
        const double mse = acc / static_cast<double>(x.n3());
        return mse == 0.0 ? kPsnrCap : 10.0 * std::log10(1.0 / mse);
    }
    const std::vector<double> bands = per_band_psnr(x, ref);
    double acc = 0.0;
    for (double v : bands) acc += v;
    return acc / static_cast<double>(bands.size());
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

std::vector<double> gaussian_taps() {
    std::vector<double> taps(kSsimWindow);
    const int mid = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - mid;
        taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

double ssim_from_stats(double mx, double my, double vx, double vy, double cov) {
    return ((2.0 * mx * my + kSsimC1) * (2.0 * cov + kSsimC2)) /
           ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
}

// Separable valid-region Gaussian filter of one band image stored row-major.
std::vector<double> filter_valid(const std::vector<double>& img, Index rows, Index cols,
                                 const std::vector<double>& taps) {
    const Index w = kSsimWindow;
    const Index out_rows = rows - w + 1, out_cols = cols - w + 1;
    std::vector<double> tmp(static_cast<std::size_t>(rows * out_cols));
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (Index t = 0; t < w; ++t) acc += taps[static_cast<std::size_t>(t)] * img[static_cast<std::size_t>(r * cols + c + t)];
            tmp[static_cast<std::size_t>(r * out_cols + c)] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_rows * out_cols));
    for (Index r = 0; r < out_rows; ++r) {
        for (Index c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (Index t = 0; t < w; ++t) acc += taps[static_cast<std::size_t>(t)] * tmp[static_cast<std::size_t>((r + t) * out_cols + c)];
            out[static_cast<std::size_t>(r * out_cols + c)] = acc;
        }
    }
    return out;
}

double ssim_band(const Tensor3& x, const Tensor3& ref, Index band,
                 const std::vector<double>& taps) {
    const Index rows = x.n1(), cols = x.n2();
    std::vector<double> a(static_cast<std::size_t>(rows * cols));
    std::vector<double> b(static_cast<std::size_t>(rows * cols));
    for (Index l = 0; l < rows; ++l) {
        for (Index j = 0; j < cols; ++j) {
            a[static_cast<std::size_t>(l * cols + j)] = clamp01(x(l, j, band));
            b[static_cast<std::size_t>(l * cols + j)] = clamp01(ref(l, j, band));
        }
    }

    if (rows < kSsimWindow || cols < kSsimWindow) {
        // Too small for windowing: single SSIM from global statistics.
        const double n = static_cast<double>(rows * cols);
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
            cov += (a[i] - ma) * (b[i] - mb);
        }
        va /= n;
        vb /= n;
        cov /= n;
        return ssim_from_stats(ma, mb, va, vb, cov);
    }

    std::vector<double> aa(a.size()), bb(b.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, rows, cols, taps);
    const auto mu_b = filter_valid(b, rows, cols, taps);
    const auto m_aa = filter_valid(aa, rows, cols, taps);
    const auto m_bb = filter_valid(bb, rows, cols, taps);
    const auto m_ab = filter_valid(ab, rows, cols, taps);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        acc += ssim_from_stats(mu_a[i], mu_b[i], va, vb, cov);
    }
    return acc / static_cast<double>(mu_a.size());
}

}  // namespace

double ssim(const Tensor3& x, const Tensor3& ref) {
    check_dims(x, ref, "ssim");
    const std::vector<double> taps = gaussian_taps();
    double acc = 0.0;
    for (Index s = 0; s < x.n3(); ++s) acc += ssim_band(x, ref, s, taps);
    return acc / static_cast<double>(x.n3());
}

double sam(const Tensor3& x, const Tensor3& ref) {
    check_dims(x, ref, "sam");
    constexpr double kNormFloor = 1e-12;
    double acc = 0.0;
    Index counted = 0;
    for (Index l = 0; l < x.n1(); ++l) {
        for (Index j = 0; j < x.n2(); ++j) {
            double dot = 0.0, nx = 0.0, nr = 0.0;
            for (Index s = 0; s < x.n3(); ++s) {
                const double a = x(l, j, s);
                const double b = ref(l, j, s);
                dot += a * b;
                nx += a * a;
                nr += b * b;
            }
            nx = std::sqrt(nx);
            nr = std::sqrt(nr);
            if (nx < kNormFloor || nr < kNormFloor) continue;
            const double c = std::clamp(dot / (nx * nr), -1.0, 1.0);
            acc += std::acos(c);
            ++counted;
        }
    }
    if (counted == 0) {
        throw std::runtime_error("sam: every spatial position has a degenerate fiber");
    }
    return acc / static_cast<double>(counted);
}

MetricsReport evaluate(const Tensor3& x, const Tensor3& ref,
                       std::map<std::string, std::string> metadata) {
    MetricsReport report;
    report.psnr = psnr(x, ref);
    report.ssim = ssim(x, ref);
    report.sam = sam(x, ref);
    report.band_psnr = per_band_psnr(x, ref);
    report.metadata = std::move(metadata);
    return report;
}

std::string to_json_line(const MetricsReport& report) {
    nlohmann::json j;
    j["psnr"] = report.psnr;
    j["ssim"] = report.ssim;
    j["sam"] = report.sam;
    j["band_psnr"] = report.band_psnr;
    j["metadata"] = report.metadata;
    return j.dump();
}

}  // namespace deeprep
