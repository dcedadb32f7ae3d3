#pragma once

#include "perf/rng.hpp"
#include "perf/volume.hpp"

#include <Eigen/Core>

#include <vector>

namespace testing {

inline Eigen::VectorXcd random_vector(perf::Rng &rng, std::size_t n, double scale = 1.0) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double const re = rng.normal();
        double const im = rng.normal();
        v[i] = {scale * re, scale * im};
    }
    return v;
}

inline perf::WorkSeries random_work(perf::Rng &rng, perf::Shape s, double scale = 1.0) {
    perf::WorkSeries w(s, 1.0);
    w.data = random_vector(rng, s.size(), scale);
    return w;
}

inline perf::ImageSeries random_image(perf::Rng &rng, perf::Shape s, double scale = 1.0) {
    std::vector<perf::cfloat> d(s.size());
    for (auto &z : d) {
        double const re = rng.normal();
        double const im = rng.normal();
        z = {static_cast<float>(scale * re), static_cast<float>(scale * im)};
    }
    return {s, 1.0, std::move(d)};
}

inline std::vector<double> random_values(perf::Rng &rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
    std::vector<double> v(n);
    for (auto &x : v) {
        x = mean + sd * rng.normal();
    }
    return v;
}

} // namespace testing
