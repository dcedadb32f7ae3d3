#include "perf/phantom.hpp"

#include "perf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perf {

std::string to_string(Tissue t) {
    switch (t) {
    case Tissue::Background: return "background";
    case Tissue::WM: return "WM";
    case Tissue::GM: return "GM";
    case Tissue::Vessel: return "vessel";
    case Tissue::Tumor: return "tumor";
    }
    return "background";
}

Tissue parse_tissue(std::string const &s) {
    for (auto t : {Tissue::Background, Tissue::WM, Tissue::GM, Tissue::Vessel, Tissue::Tumor}) {
        std::string name = to_string(t);
        if (std::equal(name.begin(), name.end(), s.begin(), s.end(),
                       [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
            return t;
        }
    }
    throw std::invalid_argument("unknown tissue label: " + s);
}

void PhantomSpec::validate() const {
    if (nx < 1 || ny < 1 || t < 2) {
        throw std::invalid_argument("phantom: invalid dimensions");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("phantom: dt must be positive");
    }
    if (frame_average < 1 || !(noise_sigma >= 0.0)) {
        throw std::invalid_argument("phantom: invalid frame averaging or noise level");
    }
    if (!(aif.a > 0.0) || !(aif.b > 0.0) || !(aif.k_scale >= 0.0)) {
        throw std::invalid_argument("phantom: invalid AIF parameters");
    }
    bool vessel = false;
    for (auto const &l : labels) {
        vessel = vessel || l.tissue == Tissue::Vessel;
        if (l.s0 < 0 || l.cbf < 0 || l.vp < 0 || l.ktrans < 0 || l.m < 0 || !(l.mtt > 0) || !(l.t1_0 > 0)) {
            throw std::invalid_argument("phantom: kinetic parameters must be non-negative");
        }
        if (!(l.shape.rx > 0) || !(l.shape.ry > 0)) {
            throw std::invalid_argument("phantom: ellipse radii must be positive");
        }
    }
    if (!vessel) {
        throw std::invalid_argument("phantom: no vessel label, nothing carries the AIF");
    }
    if (mode == PhantomMode::DCE) {
        dce.validate();
        if (vfa_angles.size() < 3) {
            throw std::invalid_argument("phantom: need at least 3 VFA angles");
        }
    } else if (!(te > 0.0)) {
        throw std::invalid_argument("phantom: TE must be positive");
    }
}

PhantomSpec default_dsc_spec() {
    PhantomSpec s;
    s.mode = PhantomMode::DSC;
    s.nx = 32;
    s.ny = 32;
    s.t = 24;
    s.dt = 1.5;
    // Peak 50 at t0 + a b; narrow enough for the truncated SVD to keep most of the residue.
    s.aif = {0.0, 13.0, 3.0, 0.5};
    s.aif.k_scale = 50.0 / (std::pow(s.aif.a * s.aif.b, s.aif.a) * std::exp(-s.aif.a));
    LabelSpec gm{Tissue::GM, {0.0, 0.0, 0.85, 0.9}};
    gm.s0 = 1.0;
    gm.cbf = 0.15;
    gm.mtt = 4.0;
    LabelSpec wm{Tissue::WM, {0.0, 0.0, 0.65, 0.7}};
    wm.s0 = 0.85;
    wm.cbf = 0.06;
    wm.mtt = 6.0;
    LabelSpec tumor{Tissue::Tumor, {0.3, -0.3, 0.22, 0.2}};
    tumor.s0 = 0.9;
    tumor.cbf = 0.2;
    tumor.mtt = 5.0;
    LabelSpec vessel{Tissue::Vessel, {-0.3, 0.35, 0.13, 0.13}};
    vessel.s0 = 0.7;
    s.labels = {gm, wm, tumor, vessel};
    return s;
}

PhantomSpec default_dce_spec() {
    PhantomSpec s;
    s.mode = PhantomMode::DCE;
    s.nx = 32;
    s.ny = 32;
    s.t = 20;
    s.dt = 1.5;
    s.aif = {0.0, 8.0, 2.0, 4.0};
    s.aif.k_scale = 6.0 / (std::pow(s.aif.a * s.aif.b, s.aif.a) * std::exp(-s.aif.a));
    LabelSpec gm{Tissue::GM, {0.0, 0.0, 0.85, 0.9}};
    gm.vp = 0.04;
    gm.ktrans = 0.02;
    gm.t1_0 = 1.2;
    gm.m = 1.1;
    LabelSpec wm{Tissue::WM, {0.0, 0.0, 0.65, 0.7}};
    wm.vp = 0.02;
    wm.ktrans = 0.01;
    wm.t1_0 = 0.8;
    wm.m = 1.0;
    LabelSpec tumor{Tissue::Tumor, {0.3, -0.3, 0.22, 0.2}};
    tumor.vp = 0.08;
    tumor.ktrans = 0.25;
    tumor.t1_0 = 1.6;
    tumor.m = 1.2;
    LabelSpec vessel{Tissue::Vessel, {-0.3, 0.35, 0.13, 0.13}};
    vessel.vp = 1.0;
    vessel.ktrans = 0.0;
    vessel.t1_0 = 1.7;
    vessel.m = 1.3;
    s.labels = {gm, wm, tumor, vessel};
    return s;
}

PhantomSpec phantom_spec_from_json(nlohmann::json const &j) {
    std::string const mode = j.value("mode", "DSC");
    PhantomSpec s;
    if (mode == "DSC" || mode == "dsc") {
        s = default_dsc_spec();
    } else if (mode == "DCE" || mode == "dce") {
        s = default_dce_spec();
    } else {
        throw std::invalid_argument("phantom: unknown mode " + mode);
    }
    s.nx = j.value("nx", s.nx);
    s.ny = j.value("ny", s.ny);
    s.t = j.value("t", s.t);
    s.dt = j.value("dt", s.dt);
    s.te = j.value("te", s.te);
    s.seed = j.value("seed", s.seed);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.frame_average = j.value("frame_average", s.frame_average);
    s.vfa_angles = j.value("vfa_angles", s.vfa_angles);
    if (j.contains("aif")) {
        auto const &a = j.at("aif");
        s.aif.t0 = a.value("t0", s.aif.t0);
        s.aif.a = a.value("a", s.aif.a);
        s.aif.b = a.value("b", s.aif.b);
        if (a.contains("peak")) {
            s.aif.k_scale = a.at("peak").get<double>() / (std::pow(s.aif.a * s.aif.b, s.aif.a) * std::exp(-s.aif.a));
        } else {
            s.aif.k_scale = a.value("k", s.aif.k_scale);
        }
    }
    if (j.contains("dce")) {
        auto const &d = j.at("dce");
        s.dce.r1 = d.value("r1", s.dce.r1);
        s.dce.dynamic_angle = d.value("flip_angle", s.dce.dynamic_angle);
        s.dce.tr = d.value("tr", s.dce.tr);
        s.dce.baseline_frames = d.value("baseline_frames", s.dce.baseline_frames);
    }
    if (j.contains("labels")) {
        s.labels.clear();
        for (auto const &l : j.at("labels")) {
            LabelSpec ls;
            ls.tissue = parse_tissue(l.at("tissue").get<std::string>());
            auto const e = l.at("ellipse").get<std::vector<double>>();
            if (e.size() != 4) {
                throw std::invalid_argument("phantom: ellipse needs [cx, cy, rx, ry]");
            }
            ls.shape = {e[0], e[1], e[2], e[3]};
            ls.s0 = l.value("s0", ls.s0);
            ls.cbf = l.value("cbf", ls.cbf);
            ls.mtt = l.value("mtt", ls.mtt);
            ls.vp = l.value("vp", ls.vp);
            ls.ktrans = l.value("ktrans", ls.ktrans);
            ls.t1_0 = l.value("t1_0", ls.t1_0);
            ls.m = l.value("m", ls.m);
            s.labels.push_back(ls);
        }
    }
    s.validate();
    return s;
}

nlohmann::json to_json(PhantomSpec const &s) {
    nlohmann::json labels = nlohmann::json::array();
    for (auto const &l : s.labels) {
        labels.push_back({{"tissue", to_string(l.tissue)},
                          {"ellipse", {l.shape.cx, l.shape.cy, l.shape.rx, l.shape.ry}},
                          {"s0", l.s0},
                          {"cbf", l.cbf},
                          {"mtt", l.mtt},
                          {"vp", l.vp},
                          {"ktrans", l.ktrans},
                          {"t1_0", l.t1_0},
                          {"m", l.m}});
    }
    return {{"mode", s.mode == PhantomMode::DSC ? "DSC" : "DCE"},
            {"nx", s.nx},
            {"ny", s.ny},
            {"t", s.t},
            {"dt", s.dt},
            {"te", s.te},
            {"seed", s.seed},
            {"noise_sigma", s.noise_sigma},
            {"frame_average", s.frame_average},
            {"vfa_angles", s.vfa_angles},
            {"aif", {{"k", s.aif.k_scale}, {"t0", s.aif.t0}, {"a", s.aif.a}, {"b", s.aif.b}}},
            {"dce",
             {{"r1", s.dce.r1}, {"flip_angle", s.dce.dynamic_angle}, {"tr", s.dce.tr},
              {"baseline_frames", s.dce.baseline_frames}}},
            {"labels", labels}};
}

std::vector<Tissue> label_map(PhantomSpec const &spec) {
    std::vector<Tissue> out(static_cast<std::size_t>(spec.nx) * spec.ny, Tissue::Background);
    for (auto const &l : spec.labels) {
        for (int y = 0; y < spec.ny; ++y) {
            double const v = (y + 0.5) / spec.ny * 2.0 - 1.0;
            for (int x = 0; x < spec.nx; ++x) {
                double const u = (x + 0.5) / spec.nx * 2.0 - 1.0;
                double const du = (u - l.shape.cx) / l.shape.rx;
                double const dv = (v - l.shape.cy) / l.shape.ry;
                if (du * du + dv * dv <= 1.0) {
                    out[static_cast<std::size_t>(y) * spec.nx + x] = l.tissue;
                }
            }
        }
    }
    return out;
}

TimeCurve dsc_tissue_curve(TimeCurve const &ca, double cbf, double mtt) {
    auto const n = ca.size();
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
        r[j] = std::exp(-ca.time(j) / mtt);
    }
    std::vector<double> ct(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double s = 0.5 * (ca.values[i] * r[0] + ca.values[0] * r[i]);
        for (std::size_t j = 1; j < i; ++j) {
            s += ca.values[i - j] * r[j];
        }
        ct[i] = cbf * ca.dt * s;
    }
    return {std::move(ct), ca.dt};
}

TimeCurve dce_tissue_curve(TimeCurve const &cp, double vp, double ktrans) {
    auto const integral = cumulative_trapezoid(cp);
    std::vector<double> ct(cp.size());
    for (std::size_t i = 0; i < cp.size(); ++i) {
        ct[i] = vp * cp.values[i] + ktrans / 60.0 * integral[i];
    }
    return {std::move(ct), cp.dt};
}

namespace {

LabelSpec const *find_label(PhantomSpec const &spec, Tissue t) {
    for (auto it = spec.labels.rbegin(); it != spec.labels.rend(); ++it) {
        if (it->tissue == t) {
            return &*it;
        }
    }
    return nullptr;
}

} // namespace

Phantom generate(PhantomSpec const &spec) {
    spec.validate();
    Phantom ph;
    ph.labels = label_map(spec);
    auto const nvox = ph.labels.size();
    ph.aif_region.assign(nvox, 0);
    for (std::size_t v = 0; v < nvox; ++v) {
        ph.aif_region[v] = ph.labels[v] == Tissue::Vessel ? 1 : 0;
    }
    if (std::none_of(ph.aif_region.begin(), ph.aif_region.end(), [](std::uint8_t b) { return b != 0; })) {
        throw std::invalid_argument("phantom: vessel region is empty, no AIF source");
    }

    Shape const shape{spec.nx, spec.ny, spec.t};
    std::vector<double> signal(shape.size(), 0.0);
    auto put = [&](std::size_t v, std::vector<double> const &curve) {
        for (int f = 0; f < spec.t; ++f) {
            signal[static_cast<std::size_t>(f) * nvox + v] = curve[static_cast<std::size_t>(f)];
        }
    };

    // One curve per label; every voxel of a label shares it.
    std::vector<std::vector<double>> label_curves(5);

    if (spec.mode == PhantomMode::DSC) {
        ph.aif = spec.aif.sample(static_cast<std::size_t>(spec.t), spec.dt);
        ph.truth_maps = {ParameterMap(spec.nx, spec.ny, MapKind::CBF, "relative"),
                         ParameterMap(spec.nx, spec.ny, MapKind::CBV, "relative"),
                         ParameterMap(spec.nx, spec.ny, MapKind::MTT, "s")};
        for (auto t : {Tissue::WM, Tissue::GM, Tissue::Vessel, Tissue::Tumor}) {
            auto const *l = find_label(spec, t);
            if (l == nullptr) {
                continue;
            }
            auto const c = t == Tissue::Vessel ? ph.aif : dsc_tissue_curve(ph.aif, l->cbf, l->mtt);
            std::vector<double> s(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) {
                s[i] = l->s0 * std::exp(-spec.te * c.values[i]);
            }
            label_curves[static_cast<std::size_t>(t)] = std::move(s);
        }
        for (std::size_t v = 0; v < nvox; ++v) {
            auto const t = ph.labels[v];
            if (t == Tissue::Background) {
                continue;
            }
            put(v, label_curves[static_cast<std::size_t>(t)]);
            if (t != Tissue::Vessel) {
                auto const *l = find_label(spec, t);
                ph.truth_maps[0].data[v] = static_cast<float>(l->cbf);
                ph.truth_maps[1].data[v] = static_cast<float>(l->cbf * l->mtt);
                ph.truth_maps[2].data[v] = l->cbf > 0.0 ? static_cast<float>(l->mtt) : 0.0f;
            }
        }
    } else {
        int const fa = spec.frame_average;
        double const fine_dt = spec.dt / fa;
        auto const fine_n = static_cast<std::size_t>(spec.t) * static_cast<std::size_t>(fa);
        auto const cp_fine = spec.aif.sample(fine_n, fine_dt);
        auto average = [&](std::vector<double> const &fine) {
            std::vector<double> out(static_cast<std::size_t>(spec.t), 0.0);
            for (std::size_t i = 0; i < fine.size(); ++i) {
                out[i / static_cast<std::size_t>(fa)] += fine[i] / fa;
            }
            return out;
        };
        ph.aif = {average(cp_fine.values), spec.dt};
        ph.truth_maps = {ParameterMap(spec.nx, spec.ny, MapKind::KTRANS, "1/min"),
                         ParameterMap(spec.nx, spec.ny, MapKind::VP, "fraction"),
                         ParameterMap(spec.nx, spec.ny, MapKind::T1, "s"),
                         ParameterMap(spec.nx, spec.ny, MapKind::M, "a.u.")};
        for (auto t : {Tissue::WM, Tissue::GM, Tissue::Vessel, Tissue::Tumor}) {
            auto const *l = find_label(spec, t);
            if (l == nullptr) {
                continue;
            }
            auto const ct = dce_tissue_curve(cp_fine, l->vp, l->ktrans);
            std::vector<double> s(fine_n);
            for (std::size_t i = 0; i < fine_n; ++i) {
                double const t1 = 1.0 / (1.0 / l->t1_0 + spec.dce.r1 * ct.values[i]);
                s[i] = spgr_signal(l->m, t1, spec.dce.dynamic_angle, spec.dce.tr);
            }
            label_curves[static_cast<std::size_t>(t)] = average(s);
        }
        VfaSeries vfa;
        vfa.nx = spec.nx;
        vfa.ny = spec.ny;
        vfa.angles_deg = spec.vfa_angles;
        vfa.tr = spec.dce.tr;
        vfa.images.assign(spec.vfa_angles.size(), std::vector<float>(nvox, 0.0f));
        for (std::size_t v = 0; v < nvox; ++v) {
            auto const t = ph.labels[v];
            if (t == Tissue::Background) {
                continue;
            }
            auto const *l = find_label(spec, t);
            put(v, label_curves[static_cast<std::size_t>(t)]);
            ph.truth_maps[0].data[v] = static_cast<float>(l->ktrans);
            ph.truth_maps[1].data[v] = static_cast<float>(l->vp);
            ph.truth_maps[2].data[v] = static_cast<float>(l->t1_0);
            ph.truth_maps[3].data[v] = static_cast<float>(l->m);
        }
        ph.vfa = std::move(vfa);
    }

    double peak = 0.0;
    for (double s : signal) {
        peak = std::max(peak, std::abs(s));
    }
    ph.scale = peak > 0.0 ? 1.0 / peak : 1.0;

    Rng rng(mix_seed(spec.seed, 0x7068616e746f6dull));
    std::vector<cfloat> data(shape.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double v = signal[i] * ph.scale;
        if (spec.noise_sigma > 0.0) {
            v += spec.noise_sigma * rng.normal();
        }
        data[i] = cfloat(static_cast<float>(v), 0.0f);
    }
    ph.series = ImageSeries(shape, spec.dt, std::move(data));

    if (ph.vfa) {
        for (std::size_t a = 0; a < spec.vfa_angles.size(); ++a) {
            for (std::size_t v = 0; v < nvox; ++v) {
                auto const t = ph.labels[v];
                if (t == Tissue::Background) {
                    continue;
                }
                auto const *l = find_label(spec, t);
                double s = spgr_signal(l->m, l->t1_0, spec.vfa_angles[a], spec.dce.tr) * ph.scale;
                if (spec.noise_sigma > 0.0) {
                    s += spec.noise_sigma * rng.normal();
                }
                ph.vfa->images[a][v] = static_cast<float>(s);
            }
        }
        for (auto &m : ph.truth_maps[3].data) {
            m = static_cast<float>(m * ph.scale);
        }
    }
    return ph;
}

} // namespace perf
