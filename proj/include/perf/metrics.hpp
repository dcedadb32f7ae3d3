#pragma once

#include "perf/volume.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace perf {

/// sqrt(||a - b||^2 / N) on magnitudes.
double rmse(ImageSeries const &xr, ImageSeries const &xf);
double rmse(std::span<double const> a, std::span<double const> b);

/// 20 log10(1 / rmse); +infinity when rmse == 0.
double psnr_from_rmse(double r);
double psnr(ImageSeries const &xr, ImageSeries const &xf);

/*
 * Both series mapped through the reference's magnitude range,
 * (|x| - min) / (max - min), before rmse. Keeps the unit peak of the PSNR
 * formula meaningful for data that is not already in [0, 1].
 */
double rmse_normalized(ImageSeries const &xr, ImageSeries const &xf);
double psnr_normalized(ImageSeries const &xr, ImageSeries const &xf);

/// "inf" for the infinite sentinel, else the shortest round-trip decimal.
std::string format_db(double v);

double pearson(std::span<double const> a, std::span<double const> b);

/// Lin's concordance correlation with population moments.
double ccc(std::span<double const> a, std::span<double const> b);

struct AgreementStats {
    double ccc = 0.0;
    double ba_bias = 0.0;
    double ba_sd = 0.0;
    double ba_lo = 0.0;
    double ba_hi = 0.0;
    std::size_t n = 0;
    std::vector<std::pair<double, double>> points; // (mean, diff)
};

/// Bias and 95% limits (sample sd). Leaves ccc at 0.
AgreementStats bland_altman(std::span<double const> a, std::span<double const> b);

/// bland_altman plus ccc.
AgreementStats agreement(std::span<double const> a, std::span<double const> b);

/*
 * Paired voxel values where the reference exceeds 1e-6 and, if given, the
 * exclusion mask is zero.
 */
std::pair<std::vector<double>, std::vector<double>> masked_pairs(ParameterMap const &est, ParameterMap const &ref,
                                                                 std::vector<std::uint8_t> const &exclude = {});

nlohmann::json to_json(AgreementStats const &s);
void write_bland_altman_csv(std::string const &path, AgreementStats const &s);

} // namespace perf
