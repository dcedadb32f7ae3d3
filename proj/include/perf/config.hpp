#pragma once

#include "perf/gfbs.hpp"
#include "perf/kinetics_dce.hpp"
#include "perf/kinetics_dsc.hpp"

#include <json.hpp>

namespace perf {

/*
 * JSON round trip for the solver and kinetics settings. Readers start from
 * the defaults, override only the keys present, and reject unknown keys.
 *
 *   {"gfbs": {...}, "dtv": {...}, "nlm": {...}, "dsc": {...}, "dce": {...}}
 */
struct RunConfig {
    GfbsConfig gfbs;
    DscConfig dsc;
    DceConfig dce;
};

nlohmann::json to_json(DtvConfig const &c);
nlohmann::json to_json(NlmConfig const &c);
nlohmann::json to_json(GfbsConfig const &c); // weights and schedule only
nlohmann::json to_json(DscConfig const &c);
nlohmann::json to_json(DceConfig const &c);
nlohmann::json to_json(RunConfig const &c);

RunConfig run_config_from_json(nlohmann::json const &j);
RunConfig load_run_config(std::string const &path);

} // namespace perf
