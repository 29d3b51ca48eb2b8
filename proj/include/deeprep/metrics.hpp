#pragma once

#include <map>
#include <string>
#include <vector>

#include "deeprep/tensor.hpp"

namespace deeprep {

enum class PsnrMode { band_mean, global };

// PSNR in dB for [0,1]-ranged data (inputs are clamped first). band_mean
// averages 10*log10(1/MSE) over bands; bands with zero error contribute
// a 100 dB cap. global uses one MSE over the whole tensor.
double psnr(const Tensor3& x, const Tensor3& ref, PsnrMode mode = PsnrMode::band_mean);
std::vector<double> per_band_psnr(const Tensor3& x, const Tensor3& ref);

// Mean over bands of single-scale SSIM with an 11x11 Gaussian window
// (sigma 1.5), constants (0.01)^2 and (0.03)^2 at data range 1, window
// statistics averaged over the valid region only. Bands smaller than the
// window fall back to global-statistics SSIM. Inputs are clamped to [0,1].
double ssim(const Tensor3& x, const Tensor3& ref);

// Spectral angle mapper in radians: mean over spatial positions of the
// angle between mode-3 fibers. Positions where either fiber norm is
// below 1e-12 are skipped; it is an error if every position is skipped.
double sam(const Tensor3& x, const Tensor3& ref);

struct MetricsReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double sam = 0.0;
    std::vector<double> band_psnr;
    std::map<std::string, std::string> metadata;
};

MetricsReport evaluate(const Tensor3& x, const Tensor3& ref,
                       std::map<std::string, std::string> metadata = {});

// One-line JSON record of a report.
std::string to_json_line(const MetricsReport& report);

}  // namespace deeprep
