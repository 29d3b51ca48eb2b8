#pragma once

#include <string>

#include "deeprep/degradation.hpp"
#include "deeprep/model.hpp"
#include "deeprep/tnn.hpp"

namespace deeprep {

// Everything a run needs, loadable from JSON. Parsing rejects unknown
// keys, and every run writes the fully materialized document (all
// defaults filled in) beside its outputs for provenance.
struct RunConfig {
    std::string method = "3deeprep";  // "3deeprep" or "tnn"
    HyperParams hyper;
    AdmmConfig admm;
    DegradeSpec degrade;
    int threads = 1;

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Full JSON document with all defaults materialized.
std::string materialize_run_config(const RunConfig& cfg);
void write_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace deeprep
