#include "perf/kinetics_dce.hpp"
#include "perf/kinetics_dsc.hpp"
#include "perf/phantom.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace perf;

namespace {

PhantomSpec fine_dsc() {
    auto s = default_dsc_spec();
    s.dt = 0.5;
    s.t = 120;
    return s;
}

std::vector<double> voxel_curve(ImageSeries const &s, std::size_t v) {
    std::vector<double> out;
    for (int f = 0; f < s.t(); ++f) {
        out.push_back(s.data()[f * s.shape().frame_size() + v].real());
    }
    return out;
}

// First voxel carrying each label.
std::map<Tissue, std::size_t> representatives(Phantom const &ph) {
    std::map<Tissue, std::size_t> r;
    for (std::size_t v = 0; v < ph.labels.size(); ++v) {
        r.emplace(ph.labels[v], v);
    }
    return r;
}

} // namespace

TEST_CASE("default specs are valid and paint every label") {
    for (auto const &spec : {default_dsc_spec(), default_dce_spec()}) {
        CHECK_NOTHROW(spec.validate());
        auto const labels = label_map(spec);
        for (auto t : {Tissue::Background, Tissue::WM, Tissue::GM, Tissue::Vessel, Tissue::Tumor}) {
            CHECK(std::count(labels.begin(), labels.end(), t) > 0);
        }
    }
}

TEST_CASE("same seed gives bit-identical output, different seed differs") {
    auto spec = default_dsc_spec();
    spec.noise_sigma = 0.01;
    auto const a = generate(spec);
    auto const b = generate(spec);
    CHECK(a.series.data() == b.series.data());
    spec.seed = 2;
    CHECK(generate(spec).series.data() != a.series.data());
}

TEST_CASE("zero flow gives a flat signal") {
    auto spec = default_dsc_spec();
    for (auto &l : spec.labels) {
        if (l.tissue == Tissue::WM) {
            l.cbf = 0.0;
        }
    }
    auto const ph = generate(spec);
    auto const v = representatives(ph).at(Tissue::WM);
    auto const c = voxel_curve(ph.series, v);
    for (double x : c) {
        CHECK(x == c.front());
    }
    CHECK(c.front() > 0.0);
}

TEST_CASE("missing vessel is rejected") {
    auto spec = default_dsc_spec();
    std::erase_if(spec.labels, [](LabelSpec const &l) { return l.tissue == Tissue::Vessel; });
    CHECK_THROWS(generate(spec));
    spec = default_dsc_spec();
    for (auto &l : spec.labels) {
        if (l.tissue == Tissue::Vessel) {
            l.shape.rx = 1e-3;
            l.shape.ry = 1e-3;
            l.shape.cx = 0.01;
        }
    }
    CHECK_THROWS_WITH(generate(spec), "phantom: vessel region is empty, no AIF source");
}

TEST_CASE("DSC area identity at dt = 0.5 s") {
    auto const spec = fine_dsc();
    auto const ca = spec.aif.sample(static_cast<std::size_t>(spec.t), spec.dt);
    double sca = 0.0;
    for (double v : ca.values) {
        sca += v;
    }
    for (auto const &l : spec.labels) {
        if (l.tissue == Tissue::Vessel) {
            continue;
        }
        auto const ct = dsc_tissue_curve(ca, l.cbf, l.mtt);
        double sct = 0.0;
        for (double v : ct.values) {
            sct += v;
        }
        CHECK(std::abs(sct - l.cbf * l.mtt * sca) <= 0.02 * l.cbf * l.mtt * sca);
    }
}

TEST_CASE("signals are positive and flat before arrival") {
    for (auto const &spec : {default_dsc_spec(), default_dce_spec()}) {
        auto const ph = generate(spec);
        auto const reps = representatives(ph);
        for (auto const &[t, v] : reps) {
            if (t == Tissue::Background) {
                continue;
            }
            auto const c = voxel_curve(ph.series, v);
            for (double x : c) {
                CHECK(x > 0.0);
            }
            for (int f = 0; f * spec.dt <= spec.aif.t0 && f < spec.t; ++f) {
                CHECK(c[static_cast<std::size_t>(f)] == c.front());
            }
        }
        double peak = 0.0;
        for (auto z : ph.series.data()) {
            peak = std::max(peak, double(std::abs(z)));
        }
        CHECK(peak == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("DCE tissue curve is linear in (vp, ktrans)") {
    auto const cp = default_dce_spec().aif.sample(30, 1.5);
    auto const a = dce_tissue_curve(cp, 0.03, 0.1);
    auto const b = dce_tissue_curve(cp, 0.07, 0.05);
    auto const ab = dce_tissue_curve(cp, 0.10, 0.15);
    auto const scaled = dce_tissue_curve(cp, 0.06, 0.2);
    for (std::size_t i = 0; i < cp.size(); ++i) {
        CHECK(ab.values[i] == doctest::Approx(a.values[i] + b.values[i]).epsilon(1e-13));
        CHECK(scaled.values[i] == doctest::Approx(2.0 * a.values[i]).epsilon(1e-13));
    }
}

TEST_CASE("JSON round trip") {
    auto spec = default_dce_spec();
    spec.noise_sigma = 0.02;
    spec.frame_average = 5;
    spec.seed = 77;
    auto const back = phantom_spec_from_json(to_json(spec));
    CHECK(to_json(back) == to_json(spec));
    CHECK(generate(back).series.data() == generate(spec).series.data());
    CHECK_THROWS(phantom_spec_from_json({{"mode", "PET"}}));
    CHECK_THROWS(phantom_spec_from_json({{"labels", {{{"tissue", "bone"}, {"ellipse", {0, 0, 1, 1}}}}}}));
}

TEST_CASE("DSC closure: noiseless fine-grid phantom quantifies back to truth") {
    auto const ph = generate(fine_dsc());
    auto const reps = representatives(ph);
    for (double thr : {0.10, 0.0}) {
        DscConfig cfg;
        cfg.svd_threshold = thr;
        auto const maps = compute_dsc_maps(ph.series, ph.aif_region, cfg);
        double const tol_flow = thr > 0.0 ? 0.10 : 0.01;
        double const tol_vol = thr > 0.0 ? 0.05 : 0.01;
        for (auto t : {Tissue::WM, Tissue::GM, Tissue::Tumor}) {
            auto const v = reps.at(t);
            INFO("tissue " << to_string(t) << " threshold " << thr);
            CHECK(std::abs(maps.cbf.data[v] - ph.truth_maps[0].data[v]) <= tol_flow * ph.truth_maps[0].data[v]);
            CHECK(std::abs(maps.cbv.data[v] - ph.truth_maps[1].data[v]) <= tol_vol * ph.truth_maps[1].data[v]);
            CHECK(std::abs(maps.mtt.data[v] - ph.truth_maps[2].data[v]) <= tol_flow * ph.truth_maps[2].data[v]);
        }
    }
}

TEST_CASE("DCE closure: noiseless phantom quantifies back to truth") {
    auto const ph = generate(default_dce_spec());
    REQUIRE(ph.vfa.has_value());
    auto const maps = compute_dce_maps(ph.series, *ph.vfa, ph.aif_region, default_dce_spec().dce);
    auto const reps = representatives(ph);
    for (auto t : {Tissue::WM, Tissue::GM, Tissue::Tumor}) {
        auto const v = reps.at(t);
        INFO("tissue " << to_string(t));
        CHECK(maps.ktrans.data[v] == doctest::Approx(ph.truth_maps[0].data[v]).epsilon(1e-3));
        CHECK(maps.vp.data[v] == doctest::Approx(ph.truth_maps[1].data[v]).epsilon(1e-3));
        CHECK(maps.t1.data[v] == doctest::Approx(ph.truth_maps[2].data[v]).epsilon(1e-5));
        CHECK(maps.m.data[v] == doctest::Approx(ph.truth_maps[3].data[v]).epsilon(1e-5));
    }
    CHECK(maps.flagged_voxels == std::count(ph.labels.begin(), ph.labels.end(), Tissue::Background));
}
