#include "perf/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace perf {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto &[key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(int nx, int ny, int sign) {
        std::lock_guard lock(mutex_);
        auto const key = std::make_tuple(nx, ny, sign);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        auto *buf = fftw_alloc_complex(static_cast<std::size_t>(nx) * ny);
        // Row-major: ny rows of nx contiguous samples.
        auto plan = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (plan == nullptr) {
            throw std::runtime_error("FFTW planning failed");
        }
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache &cache() {
    static PlanCache c;
    return c;
}

void transform(Eigen::Ref<Eigen::VectorXcd const> in, Eigen::Ref<Eigen::VectorXcd> out, int nx, int ny, int sign) {
    auto const n = static_cast<Eigen::Index>(nx) * ny;
    if (in.size() != n || out.size() != n) {
        throw std::invalid_argument("fft2: frame size mismatch");
    }
    auto plan = cache().get(nx, ny, sign);
    Eigen::VectorXcd tmp = in; // FFTW's new-array execute may not take const input
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(tmp.data()), reinterpret_cast<fftw_complex *>(tmp.data()));
    out = tmp * (1.0 / std::sqrt(static_cast<double>(n)));
}

} // namespace

void fft2(Eigen::Ref<Eigen::VectorXcd const> in, Eigen::Ref<Eigen::VectorXcd> out, int nx, int ny) {
    transform(in, out, nx, ny, FFTW_FORWARD);
}

void ifft2(Eigen::Ref<Eigen::VectorXcd const> in, Eigen::Ref<Eigen::VectorXcd> out, int nx, int ny) {
    transform(in, out, nx, ny, FFTW_BACKWARD);
}

Eigen::VectorXcd fft2(Eigen::VectorXcd const &in, int nx, int ny) {
    Eigen::VectorXcd out(in.size());
    fft2(in, out, nx, ny);
    return out;
}

Eigen::VectorXcd ifft2(Eigen::VectorXcd const &in, int nx, int ny) {
    Eigen::VectorXcd out(in.size());
    ifft2(in, out, nx, ny);
    return out;
}

} // namespace perf
