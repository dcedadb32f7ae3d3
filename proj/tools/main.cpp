#include "perf/config.hpp"
#include "perf/container.hpp"
#include "perf/gfbs.hpp"
#include "perf/kinetics_dce.hpp"
#include "perf/kinetics_dsc.hpp"
#include "perf/metrics.hpp"
#include "perf/parallel.hpp"
#include "perf/phantom.hpp"
#include "perf/preview.hpp"
#include "perf/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace perf;

namespace {

void write_json(fs::path const &p, json const &j) {
    std::ofstream os(p);
    if (!os) {
        throw std::runtime_error("cannot write " + p.string());
    }
    os << j.dump(2) << '\n';
}

json read_json(fs::path const &p) {
    std::ifstream is(p);
    if (!is) {
        throw std::runtime_error("cannot read " + p.string());
    }
    try {
        return json::parse(is);
    } catch (json::parse_error const &e) {
        throw std::runtime_error(p.string() + ": " + e.what());
    }
}

void require_file(std::string const &p, char const *what) {
    if (!fs::is_regular_file(p)) {
        throw std::runtime_error(std::string(what) + " not found: " + p);
    }
}

fs::path prepare_out(std::string const &dir) {
    fs::path const out(dir);
    fs::create_directories(out);
    auto const probe = out / ".write_probe";
    {
        std::ofstream os(probe);
        if (!os) {
            throw std::runtime_error("output directory not writable: " + dir);
        }
    }
    fs::remove(probe);
    return out;
}

// JSON has no infinity; the sentinel travels as the string "inf".
json db_value(double v) {
    if (std::isinf(v)) {
        return format_db(v);
    }
    return v;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string map_name(MapKind k) { return lower(to_string(k)); }

void write_map(fs::path const &out, ParameterMap const &m, std::string const &prefix = {}) {
    auto const stem = prefix + map_name(m.kind);
    save_container((out / (stem + ".pvol")).string(), m);
    write_pgm((out / (stem + ".pgm")).string(), m);
}

void write_frame_previews(fs::path const &out, ImageSeries const &s) {
    std::vector<int> frames{0, s.t() / 2, s.t() - 1};
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    for (int f : frames) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03d.pgm", f);
        write_pgm((out / name).string(), s, f);
    }
}

json mask_json(SamplingMask const &m) {
    return {{"scheme", to_string(m.scheme)}, {"requested_R", m.requested_R}, {"achieved_R", m.achieved_R()},
            {"seed", m.seed}, {"dims", {m.shape.nx, m.shape.ny, m.shape.t}}};
}

RunConfig config_or_default(std::string const &path) {
    if (path.empty()) {
        return {};
    }
    require_file(path, "config");
    return load_run_config(path);
}

// ---------------------------------------------------------------- phantom

struct PhantomOpts {
    std::string spec;
    std::string mode = "dsc";
    std::string out;
};

void run_phantom(PhantomOpts const &o) {
    PhantomSpec spec;
    if (!o.spec.empty()) {
        require_file(o.spec, "phantom spec");
        spec = phantom_spec_from_json(read_json(o.spec));
    } else {
        auto const m = lower(o.mode);
        if (m != "dsc" && m != "dce") {
            throw std::invalid_argument("--mode must be dsc or dce");
        }
        spec = m == "dsc" ? default_dsc_spec() : default_dce_spec();
    }
    auto const out = prepare_out(o.out);
    auto const ph = generate(spec);

    save_container((out / "series.pvol").string(), ph.series);
    for (auto const &m : ph.truth_maps) {
        write_map(out, m, "truth_");
    }
    write_region_csv((out / "aif_region.csv").string(), ph.aif_region, spec.nx, spec.ny);
    write_curve_csv((out / "aif.csv").string(), ph.aif);
    write_frame_previews(out, ph.series);
    if (ph.vfa) {
        auto const &v = *ph.vfa;
        std::vector<cfloat> data;
        for (auto const &im : v.images) {
            for (float x : im) {
                data.emplace_back(x, 0.0f);
            }
        }
        ImageSeries vs(Shape{v.nx, v.ny, static_cast<int>(v.images.size())}, 0.0, std::move(data));
        save_container((out / "vfa.pvol").string(), vs);
        write_json(out / "vfa.json", {{"angles_deg", v.angles_deg}, {"tr", v.tr}});
    }
    write_json(out / "resolved_config.json",
               {{"command", "phantom"}, {"spec", to_json(spec)}, {"signal_scale", ph.scale}});
}

// ---------------------------------------------------------------- sample

struct SampleOpts {
    std::string in;
    std::string scheme = "radial";
    double R = 4.0;
    double sigma2 = 1e-10;
    std::uint64_t seed = 1;
    std::string out;
};

void run_sample(SampleOpts const &o) {
    require_file(o.in, "input series");
    auto const x = load_image_series(o.in);
    auto const mask = make_mask(parse_scheme(o.scheme), x.nx(), x.ny(), x.t(), o.R, o.seed);
    NoiseSpec const noise{o.sigma2, o.seed};
    auto const y = forward_encode(x, mask, noise);
    auto const ref = encode_reference_frame(x, mask, noise);
    auto const out = prepare_out(o.out);
    save_container((out / "kspace.pvol").string(), y);
    save_container((out / "mask.pvol").string(), mask);
    save_container((out / "reference_kspace.pvol").string(), ref);
    auto const dense = densify_first_frame(mask);
    write_json(out / "resolved_config.json", {{"command", "sample"},
                                              {"input", o.in},
                                              {"mask", mask_json(mask)},
                                              {"noise", {{"variance", o.sigma2}, {"seed", o.seed}}},
                                              {"reference_frame", {{"achieved_R", dense.achieved_R()}}}});
}

// ---------------------------------------------------------------- recon

struct ReconOpts {
    std::string in;
    std::string mask;
    std::string method = "proposed";
    std::string config;
    std::string truth;
    std::string reference;
    std::vector<double> sweep;
    std::string scheme = "radial";
    double sigma2 = 1e-10;
    std::uint64_t seed = 1;
    std::string out;
};

struct ReconOutcome {
    ImageSeries image;
    std::optional<ReconHistory> history;
};

ReconOutcome reconstruct_one(std::string const &method, KSpaceSeries const &y, SamplingMask const &mask,
                             RunConfig const &cfg, ReconInputs const &in) {
    if (method == "zerofill") {
        return {adjoint(y), std::nullopt};
    }
    if (method != "proposed") {
        throw std::invalid_argument("--method must be proposed or zerofill");
    }
    auto res = reconstruct(y, mask, cfg.gfbs, in);
    return {std::move(res.image), std::move(res.history)};
}

void run_sweep(ReconOpts const &o, RunConfig const &cfg, fs::path const &out) {
    if (o.truth.empty()) {
        throw std::invalid_argument("--R-sweep needs --truth");
    }
    require_file(o.truth, "truth series");
    auto const truth = load_image_series(o.truth);
    auto const scheme = parse_scheme(o.scheme);
    std::ofstream csv(out / "sweep.csv");
    csv.precision(17);
    csv << "R,achieved_R,psnr_zerofill,psnr_proposed\n";
    json rows = json::array();
    for (double R : o.sweep) {
        auto const mask = make_mask(scheme, truth.nx(), truth.ny(), truth.t(), R, o.seed);
        NoiseSpec const noise{o.sigma2, o.seed};
        auto const y = forward_encode(truth, mask, noise);
        ReconInputs in;
        in.truth = truth;
        in.reference_kspace = encode_reference_frame(truth, mask, noise);
        double const pz = psnr_normalized(adjoint(y), truth);
        double const pp = psnr_normalized(reconstruct(y, mask, cfg.gfbs, in).image, truth);
        csv << R << ',' << mask.achieved_R() << ',' << format_db(pz) << ',' << format_db(pp) << '\n';
        rows.push_back({{"R", R}, {"achieved_R", mask.achieved_R()}, {"psnr_zerofill", db_value(pz)},
                        {"psnr_proposed", db_value(pp)}});
    }
    write_json(out / "sweep.json", rows);
    write_json(out / "resolved_config.json", {{"command", "recon"},
                                              {"mode", "sweep"},
                                              {"truth", o.truth},
                                              {"scheme", o.scheme},
                                              {"R", o.sweep},
                                              {"noise", {{"variance", o.sigma2}, {"seed", o.seed}}},
                                              {"config", to_json(cfg)}});
}

void run_recon(ReconOpts const &o) {
    auto const cfg = config_or_default(o.config);
    if (!o.sweep.empty()) {
        run_sweep(o, cfg, prepare_out(o.out));
        return;
    }
    if (o.in.empty() || o.mask.empty()) {
        throw std::invalid_argument("recon needs --in and --mask (or --R-sweep with --truth)");
    }
    require_file(o.in, "k-space");
    require_file(o.mask, "mask");
    auto const y = load_kspace_series(o.in);
    auto const mask = load_mask(o.mask);
    if (!(y.shape() == mask.shape)) {
        throw std::invalid_argument("k-space and mask dimensions differ");
    }

    ReconInputs in;
    if (!o.truth.empty()) {
        require_file(o.truth, "truth series");
        in.truth = load_image_series(o.truth);
    }
    std::string reference = o.reference;
    if (reference.empty()) {
        auto const sibling = fs::path(o.in).parent_path() / "reference_kspace.pvol";
        if (fs::is_regular_file(sibling)) {
            reference = sibling.string();
        }
    } else {
        require_file(reference, "reference k-space");
    }
    if (!reference.empty()) {
        in.reference_kspace = load_kspace_series(reference);
    }

    auto const out = prepare_out(o.out);
    auto const res = reconstruct_one(o.method, y, mask, cfg, in);
    save_container((out / "recon.pvol").string(), res.image);
    write_frame_previews(out, res.image);

    json metrics = {{"method", o.method}};
    if (res.history) {
        res.history->write_csv((out / "history.csv").string());
        metrics["iterations"] = res.history->iterations;
        metrics["stop"] = to_string(res.history->stop);
        if (!res.history->records.empty()) {
            metrics["final_objective"] = res.history->records.back().objective;
        }
    }
    if (in.truth) {
        double const r = rmse_normalized(res.image, *in.truth);
        metrics["rmse"] = r;
        metrics["psnr"] = db_value(psnr_from_rmse(r));
        metrics["psnr_zerofill"] = db_value(psnr_normalized(adjoint(y), *in.truth));
    }
    write_json(out / "metrics.json", metrics);

    json rc = {{"command", "recon"},
               {"method", o.method},
               {"input", o.in},
               {"mask", o.mask},
               {"achieved_R", mask.achieved_R()},
               {"truth", o.truth.empty() ? json(nullptr) : json(o.truth)},
               {"config", to_json(cfg)}};
    if (reference.empty()) {
        rc["reference_frame"] = {{"source", "zero-filled frame 0 of the input"}};
    } else {
        SamplingMask m0;
        m0.shape = {mask.shape.nx, mask.shape.ny, 1};
        m0.bits.assign(mask.bits.begin(), mask.bits.begin() + static_cast<std::ptrdiff_t>(mask.shape.frame_size()));
        rc["reference_frame"] = {{"source", reference}, {"frame0_R", m0.achieved_R()}};
    }
    write_json(out / "resolved_config.json", rc);
}

// ---------------------------------------------------------------- quantify

struct QuantifyOpts {
    std::string in;
    std::string mode = "dsc";
    std::string aif;
    std::string config;
    std::string vfa;
    std::string truth;
    std::string out;
};

VfaSeries load_vfa(std::string const &path) {
    require_file(path, "VFA series");
    auto const s = load_image_series(path);
    auto const side = fs::path(path).replace_extension(".json");
    require_file(side.string(), "VFA sidecar");
    auto const meta = read_json(side);
    VfaSeries v;
    v.nx = s.nx();
    v.ny = s.ny();
    v.angles_deg = meta.at("angles_deg").get<std::vector<double>>();
    v.tr = meta.at("tr").get<double>();
    for (int f = 0; f < s.t(); ++f) {
        std::vector<float> im;
        for (auto z : s.frame(f)) {
            im.push_back(std::abs(z));
        }
        v.images.push_back(std::move(im));
    }
    v.validate();
    return v;
}

json score_maps(std::vector<ParameterMap> const &maps, std::string const &truth_dir, fs::path const &out) {
    json scores = json::object();
    for (auto const &m : maps) {
        auto const ref_path = fs::path(truth_dir) / ("truth_" + map_name(m.kind) + ".pvol");
        if (!fs::is_regular_file(ref_path)) {
            continue;
        }
        auto const ref = load_parameter_map(ref_path.string(), m.kind);
        auto const [est, tru] = masked_pairs(m, ref);
        if (est.size() < 2) {
            continue;
        }
        auto const st = perf::agreement(est, tru);
        write_bland_altman_csv((out / ("bland_altman_" + map_name(m.kind) + ".csv")).string(), st);
        scores[map_name(m.kind)] = to_json(st);
    }
    return scores;
}

void run_quantify(QuantifyOpts const &o) {
    auto const cfg = config_or_default(o.config);
    require_file(o.in, "input series");
    require_file(o.aif, "AIF region");
    auto const series = load_image_series(o.in);
    auto const region = load_region(o.aif, series.nx(), series.ny());
    auto const mode = lower(o.mode);
    auto const out = prepare_out(o.out);

    std::vector<ParameterMap> maps;
    json info;
    if (mode == "dsc") {
        GammaVariateFit fit;
        auto const ca = dsc_arterial_input(series, region, cfg.dsc, &fit);
        write_curve_csv((out / "aif.csv").string(), ca);
        auto const m = compute_dsc_maps(series, region, cfg.dsc);
        maps = {m.cbf, m.cbv, m.mtt};
        info = {{"invalid_voxels", m.invalid_voxels},
                {"aif_fit", {{"k", fit.k_scale}, {"t0", fit.t0}, {"a", fit.a}, {"b", fit.b},
                             {"residual", fit.residual}, {"iterations", fit.iterations}}}};
    } else if (mode == "dce") {
        if (o.vfa.empty()) {
            throw std::invalid_argument("DCE quantification needs --vfa");
        }
        auto const vfa = load_vfa(o.vfa);
        auto const m = compute_dce_maps(series, vfa, region, cfg.dce);
        maps = {m.ktrans, m.vp, m.t1, m.m};
        info = {{"flagged_voxels", m.flagged_voxels},
                {"clamped_samples", m.clamped_samples},
                {"baseline_warnings", m.baseline_warnings}};
    } else {
        throw std::invalid_argument("--mode must be dsc or dce");
    }
    for (auto const &m : maps) {
        write_map(out, m);
    }
    json result = {{"mode", mode}, {"diagnostics", info}};
    if (!o.truth.empty()) {
        if (!fs::is_directory(o.truth)) {
            throw std::runtime_error("truth directory not found: " + o.truth);
        }
        result["agreement"] = score_maps(maps, o.truth, out);
    }
    write_json(out / "agreement.json", result);
    write_json(out / "resolved_config.json", {{"command", "quantify"},
                                              {"input", o.in},
                                              {"mode", mode},
                                              {"aif", o.aif},
                                              {"vfa", o.vfa.empty() ? json(nullptr) : json(o.vfa)},
                                              {"truth", o.truth.empty() ? json(nullptr) : json(o.truth)},
                                              {"config", to_json(cfg)}});
}

// ---------------------------------------------------------------- report

void run_report(std::string const &dir) {
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("run directory not found: " + dir);
    }
    fs::path const root(dir);
    std::vector<fs::path> files;
    for (auto const &e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().filename() != "summary.json") {
            files.push_back(fs::relative(e.path(), root));
        }
    }
    std::sort(files.begin(), files.end());

    json summary = json::object();
    json listed = json::array();
    for (auto const &f : files) {
        auto const name = f.filename().string();
        auto const ext = f.extension().string();
        if (ext == ".csv" || ext == ".pgm" || ext == ".json") {
            listed.push_back(f.generic_string());
        }
        if (name == "metrics.json") {
            auto const m = read_json(root / f);
            // The proposed reconstruction wins over a zero-filled one in the same run.
            bool const take = !summary.contains("psnr") || m.value("method", "") == "proposed";
            if (take && m.contains("psnr")) {
                summary["psnr"] = m["psnr"];
                summary["rmse"] = m["rmse"];
                summary["psnr_zerofill"] = m["psnr_zerofill"];
                summary["method"] = m["method"];
                if (m.contains("iterations")) {
                    summary["iterations"] = m["iterations"];
                    summary["stop"] = m["stop"];
                }
            }
        } else if (name == "agreement.json") {
            auto const a = read_json(root / f);
            if (a.contains("agreement")) {
                for (auto const &[kind, st] : a["agreement"].items()) {
                    summary["ccc_" + kind] = st["ccc"];
                    summary["bland_altman"][kind] = st;
                }
            }
        } else if (name == "sweep.json") {
            summary["sweep"] = read_json(root / f);
        }
    }
    summary["files"] = listed;
    write_json(root / "summary.json", summary);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Undersampled perfusion MRI: phantom, sampling, reconstruction, kinetics"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);

    PhantomOpts ph;
    auto *cp = app.add_subcommand("phantom", "generate a digital perfusion phantom");
    cp->add_option("--spec", ph.spec, "phantom spec JSON");
    cp->add_option("--mode", ph.mode, "dsc or dce when no spec is given");
    cp->add_option("--out", ph.out, "output directory")->required();

    SampleOpts sa;
    auto *cs = app.add_subcommand("sample", "undersample a series in k-space");
    cs->add_option("--in", sa.in, "image series (.pvol)")->required();
    cs->add_option("--scheme", sa.scheme, "cartesian or radial");
    cs->add_option("--R", sa.R, "acceleration factor")->check(CLI::PositiveNumber);
    cs->add_option("--sigma2", sa.sigma2, "complex noise variance")->check(CLI::NonNegativeNumber);
    cs->add_option("--seed", sa.seed, "mask and noise seed");
    cs->add_option("--out", sa.out, "output directory")->required();

    ReconOpts re;
    auto *cr = app.add_subcommand("recon", "reconstruct undersampled k-space");
    cr->add_option("--in", re.in, "k-space (.pvol)");
    cr->add_option("--mask", re.mask, "sampling mask (.pvol)");
    cr->add_option("--method", re.method, "proposed or zerofill");
    cr->add_option("--config", re.config, "run config JSON");
    cr->add_option("--truth", re.truth, "reference image series for metrics");
    cr->add_option("--reference", re.reference, "densified frame-0 k-space");
    cr->add_option("--R-sweep", re.sweep, "comma-separated R values; resamples --truth at each")->delimiter(',');
    cr->add_option("--scheme", re.scheme, "sweep: cartesian or radial");
    cr->add_option("--sigma2", re.sigma2, "sweep: complex noise variance");
    cr->add_option("--seed", re.seed, "sweep: mask and noise seed");
    cr->add_option("--out", re.out, "output directory")->required();

    QuantifyOpts qu;
    auto *cq = app.add_subcommand("quantify", "perfusion maps from a dynamic series");
    cq->add_option("--in", qu.in, "image series (.pvol)")->required();
    cq->add_option("--mode", qu.mode, "dsc or dce");
    cq->add_option("--aif", qu.aif, "arterial region (.csv of x,y or mask .pvol)")->required();
    cq->add_option("--config", qu.config, "run config JSON");
    cq->add_option("--vfa", qu.vfa, "DCE: VFA series (.pvol with .json sidecar)");
    cq->add_option("--truth", qu.truth, "directory holding truth_*.pvol maps");
    cq->add_option("--out", qu.out, "output directory")->required();

    std::string run_dir;
    auto *cg = app.add_subcommand("report", "aggregate a run directory into summary.json");
    cg->add_option("--run", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const &e) {
        return app.exit(e);
    } catch (CLI::ParseError const &e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    try {
        if (workers > 0) {
            set_worker_count(workers);
        }
        if (cp->parsed()) {
            run_phantom(ph);
        } else if (cs->parsed()) {
            run_sample(sa);
        } else if (cr->parsed()) {
            run_recon(re);
        } else if (cq->parsed()) {
            run_quantify(qu);
        } else if (cg->parsed()) {
            run_report(run_dir);
        }
    } catch (std::exception const &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
