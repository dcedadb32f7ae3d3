#include "perf/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace perf {

namespace {

using nlohmann::json;

void check_keys(json const &j, std::string const &where, std::set<std::string> const &allowed) {
    if (!j.is_object()) {
        throw std::invalid_argument("config: " + where + " must be an object");
    }
    for (auto const &[k, v] : j.items()) {
        if (!allowed.contains(k)) {
            throw std::invalid_argument("config: unknown key " + where + "." + k);
        }
    }
}

template <typename T>
void read(json const &j, char const *key, T &dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

} // namespace

json to_json(DtvConfig const &c) {
    return {{"lambda1", c.lambda1}, {"eps_w", c.eps_w}, {"firls_outer", c.firls_outer}, {"pcg_max", c.pcg_max},
            {"pcg_tol", c.pcg_tol}};
}

json to_json(NlmConfig const &c) {
    return {{"search", c.search},         {"patch", c.patch},           {"h", c.h},
            {"h_factor", c.h_factor},     {"block_step", c.block_step}, {"pocs_iters", c.pocs_iters},
            {"lambda2", c.lambda2}};
}

json to_json(GfbsConfig const &c) {
    return {{"w1", c.w1},
            {"w2", c.w2},
            {"alpha0", c.alpha0},
            {"gamma", c.gamma},
            {"max_iters", c.max_iters},
            {"rel_tol", c.rel_tol},
            {"adaptive", c.adaptive},
            {"concurrent_prox", c.concurrent_prox}};
}

json to_json(DscConfig const &c) {
    return {{"te", c.te}, {"baseline_frames", c.baseline_frames}, {"svd_threshold", c.svd_threshold},
            {"pad_factor", c.pad_factor}};
}

json to_json(DceConfig const &c) {
    return {{"r1", c.r1}, {"flip_angle", c.dynamic_angle}, {"baseline_frames", c.baseline_frames}, {"tr", c.tr}};
}

json to_json(RunConfig const &c) {
    return {{"gfbs", to_json(c.gfbs)},
            {"dtv", to_json(c.gfbs.dtv)},
            {"nlm", to_json(c.gfbs.nlm)},
            {"dsc", to_json(c.dsc)},
            {"dce", to_json(c.dce)}};
}

RunConfig run_config_from_json(json const &j) {
    RunConfig c;
    if (j.is_null()) {
        return c;
    }
    check_keys(j, "root", {"gfbs", "dtv", "nlm", "dsc", "dce"});
    if (j.contains("gfbs")) {
        auto const &g = j.at("gfbs");
        check_keys(g, "gfbs", {"w1", "w2", "alpha0", "gamma", "max_iters", "rel_tol", "adaptive", "concurrent_prox"});
        read(g, "w1", c.gfbs.w1);
        read(g, "w2", c.gfbs.w2);
        read(g, "alpha0", c.gfbs.alpha0);
        read(g, "gamma", c.gfbs.gamma);
        read(g, "max_iters", c.gfbs.max_iters);
        read(g, "rel_tol", c.gfbs.rel_tol);
        read(g, "adaptive", c.gfbs.adaptive);
        read(g, "concurrent_prox", c.gfbs.concurrent_prox);
    }
    if (j.contains("dtv")) {
        auto const &d = j.at("dtv");
        check_keys(d, "dtv", {"lambda1", "eps_w", "firls_outer", "pcg_max", "pcg_tol"});
        read(d, "lambda1", c.gfbs.dtv.lambda1);
        read(d, "eps_w", c.gfbs.dtv.eps_w);
        read(d, "firls_outer", c.gfbs.dtv.firls_outer);
        read(d, "pcg_max", c.gfbs.dtv.pcg_max);
        read(d, "pcg_tol", c.gfbs.dtv.pcg_tol);
    }
    if (j.contains("nlm")) {
        auto const &n = j.at("nlm");
        check_keys(n, "nlm", {"search", "patch", "h", "h_factor", "block_step", "pocs_iters", "lambda2"});
        read(n, "search", c.gfbs.nlm.search);
        read(n, "patch", c.gfbs.nlm.patch);
        read(n, "h", c.gfbs.nlm.h);
        read(n, "h_factor", c.gfbs.nlm.h_factor);
        read(n, "block_step", c.gfbs.nlm.block_step);
        read(n, "pocs_iters", c.gfbs.nlm.pocs_iters);
        read(n, "lambda2", c.gfbs.nlm.lambda2);
    }
    if (j.contains("dsc")) {
        auto const &d = j.at("dsc");
        check_keys(d, "dsc", {"te", "baseline_frames", "svd_threshold", "pad_factor"});
        read(d, "te", c.dsc.te);
        read(d, "baseline_frames", c.dsc.baseline_frames);
        read(d, "svd_threshold", c.dsc.svd_threshold);
        read(d, "pad_factor", c.dsc.pad_factor);
    }
    if (j.contains("dce")) {
        auto const &d = j.at("dce");
        check_keys(d, "dce", {"r1", "flip_angle", "baseline_frames", "tr"});
        read(d, "r1", c.dce.r1);
        read(d, "flip_angle", c.dce.dynamic_angle);
        read(d, "baseline_frames", c.dce.baseline_frames);
        read(d, "tr", c.dce.tr);
    }
    c.gfbs.validate();
    c.dsc.validate();
    c.dce.validate();
    return c;
}

RunConfig load_run_config(std::string const &path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot read config " + path);
    }
    json j;
    try {
        is >> j;
    } catch (json::parse_error const &e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

} // namespace perf
