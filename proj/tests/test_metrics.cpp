#include "perf/metrics.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace perf;

namespace {

double naive_rmse(ImageSeries const &a, ImageSeries const &b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        double const d = std::abs(std::complex<double>(a.data()[i])) - std::abs(std::complex<double>(b.data()[i]));
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.data().size()));
}

double hand_ccc(std::vector<double> const &a, std::vector<double> const &b) {
    double const n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double va = 0, vb = 0, cov = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
        cov += (a[i] - ma) * (b[i] - mb);
    }
    va /= n;
    vb /= n;
    cov /= n;
    return 2.0 * cov / (va + vb + (ma - mb) * (ma - mb));
}

} // namespace

TEST_CASE("rmse: trivial cases and scalar oracle") {
    Shape const s{5, 4, 3};
    ImageSeries zero(s, 1.0);
    ImageSeries half(s, 1.0, std::vector<cfloat>(s.size(), cfloat(0.5f, 0.0f)));
    CHECK(rmse(half, half) == 0.0);
    CHECK(rmse(half, zero) == doctest::Approx(0.5).epsilon(1e-12));
    Rng rng(21);
    auto const a = testing::random_image(rng, s);
    auto const b = testing::random_image(rng, s);
    CHECK(std::abs(rmse(a, b) - naive_rmse(a, b)) <= 1e-12);
    CHECK(rmse(a, b) == rmse(b, a));
    CHECK_THROWS(rmse(a, ImageSeries(Shape{5, 4, 2}, 1.0)));
}

TEST_CASE("psnr closed forms and the infinite sentinel") {
    CHECK(psnr_from_rmse(0.01) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(psnr_from_rmse(0.1) == doctest::Approx(20.0).epsilon(1e-12));
    Shape const s{4, 4, 2};
    ImageSeries a(s, 1.0, std::vector<cfloat>(s.size(), cfloat(0.3f, 0.0f)));
    double const p = psnr(a, a);
    CHECK(std::isinf(p));
    CHECK(p > 0);
    CHECK(format_db(p) == "inf");
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 1e-4; r < 10.0; r *= 1.7) {
        double const v = psnr_from_rmse(r);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("normalized rmse maps both series through the reference range") {
    Shape const s{2, 1, 1};
    ImageSeries ref(s, 1.0, {cfloat(2.0f, 0.0f), cfloat(4.0f, 0.0f)});
    ImageSeries rec(s, 1.0, {cfloat(2.0f, 0.0f), cfloat(3.0f, 0.0f)});
    // normalized: ref (0, 1), rec (0, 0.5)
    CHECK(rmse_normalized(rec, ref) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
}

TEST_CASE("ccc: identity, location shift, hand formula") {
    std::vector<double> const a{1, 2, 3, 4};
    CHECK(ccc(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> shifted{3, 4, 5, 6};
    CHECK(ccc(a, shifted) < 1.0);
    CHECK(pearson(a, shifted) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ccc(a, shifted) < pearson(a, shifted));
    std::vector<double> const b{1.1, 1.9, 3.2, 3.8};
    CHECK(std::abs(ccc(a, b) - hand_ccc(a, b)) <= 1e-12);
}

TEST_CASE("ccc degenerate inputs") {
    std::vector<double> const c{2, 2, 2};
    CHECK(ccc(c, c) == 1.0);
    std::vector<double> const d{2, 2, 2.0};
    std::vector<double> const e{1, 3, 2.0};
    CHECK_NOTHROW(ccc(d, e));
    CHECK_THROWS(ccc(std::vector<double>{1.0}, std::vector<double>{1.0}));
    CHECK_THROWS(ccc(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}));
}

TEST_CASE("ccc bounded by |pearson| on random pairs") {
    Rng rng(22);
    for (int k = 0; k < 1000; ++k) {
        std::size_t const n = 2 + static_cast<std::size_t>(rng.uniform() * 30);
        auto const a = testing::random_values(rng, n, rng.normal(), 1.0 + rng.uniform());
        auto b = testing::random_values(rng, n, rng.normal(), 1.0 + rng.uniform());
        if (k % 3 == 0) {
            for (std::size_t i = 0; i < n; ++i) {
                b[i] += a[i];
            }
        }
        double const c = ccc(a, b);
        CHECK(std::abs(c) <= 1.0 + 1e-12);
        CHECK(std::abs(c) <= std::abs(pearson(a, b)) + 1e-12);
    }
}

TEST_CASE("bland-altman trivial cases and scalar oracle") {
    std::vector<double> const a{1, 2, 3, 5};
    auto const same = bland_altman(a, a);
    CHECK(same.ba_bias == 0.0);
    CHECK(same.ba_lo == 0.0);
    CHECK(same.ba_hi == 0.0);
    std::vector<double> const b{0, 1, 2, 4};
    auto const off = bland_altman(a, b);
    CHECK(off.ba_bias == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(off.ba_sd == doctest::Approx(0.0));

    Rng rng(23);
    auto const x = testing::random_values(rng, 50);
    auto const y = testing::random_values(rng, 50, 0.2);
    double mean = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        mean += x[i] - y[i];
    }
    mean /= 50.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
    }
    double const sd = std::sqrt(ss / 49.0);
    auto const st = agreement(x, y);
    CHECK(std::abs(st.ba_bias - mean) <= 1e-12);
    CHECK(std::abs(st.ba_sd - sd) <= 1e-12);
    CHECK(std::abs(st.ba_lo - (mean - 1.96 * sd)) <= 1e-12);
    CHECK(std::abs(st.ba_hi - (mean + 1.96 * sd)) <= 1e-12);
    CHECK(st.ba_lo <= st.ba_bias);
    CHECK(st.ba_bias <= st.ba_hi);
    CHECK(st.n == 50);
    REQUIRE(st.points.size() == 50);
    CHECK(st.points[7].first == doctest::Approx(0.5 * (x[7] + y[7])));
    CHECK(st.points[7].second == doctest::Approx(x[7] - y[7]));
    CHECK(std::abs(st.ccc - hand_ccc(x, y)) <= 1e-12);
}

TEST_CASE("masked pairs skip background and excluded voxels") {
    ParameterMap est(3, 1, MapKind::CBF), ref(3, 1, MapKind::CBF);
    est.data = {1.0f, 2.0f, 3.0f};
    ref.data = {0.0f, 2.5f, 3.5f};
    auto const [e, r] = masked_pairs(est, ref);
    CHECK(e == std::vector<double>{2.0, 3.0});
    CHECK(r == std::vector<double>{2.5, 3.5});
    auto const [e2, r2] = masked_pairs(est, ref, {0, 0, 1});
    CHECK(e2 == std::vector<double>{2.0});
}

TEST_CASE("bland-altman csv and json layout") {
    std::vector<double> const a{1, 2, 3};
    std::vector<double> const b{1.5, 2, 2};
    auto const st = agreement(a, b);
    auto const j = to_json(st);
    CHECK(j.contains("ccc"));
    CHECK(j["n"] == 3);
    auto const path = std::filesystem::temp_directory_path() / "ba_test.csv";
    write_bland_altman_csv(path.string(), st);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "mean,diff");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
    }
    CHECK(rows == 3);
    std::filesystem::remove(path);
}
