#include "deeprep/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deeprep {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) {
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_hyper(const json& j, HyperParams& h) {
    check_keys(j, {"beta", "theta", "gamma", "k", "rank_tol", "slope", "expansion_init_std",
                   "adam", "iterations", "early_stop", "seed"},
               "hyper");
    maybe(j, "beta", h.beta);
    maybe(j, "theta", h.theta);
    maybe(j, "gamma", h.gamma);
    maybe(j, "k", h.k);
    maybe(j, "rank_tol", h.rank_tol);
    maybe(j, "slope", h.slope);
    maybe(j, "expansion_init_std", h.expansion_init_std);
    maybe(j, "iterations", h.iterations);
    maybe(j, "seed", h.seed);
    if (j.contains("adam")) {
        const json& a = j.at("adam");
        check_keys(a, {"lr", "beta1", "beta2", "eps"}, "hyper.adam");
        maybe(a, "lr", h.adam.lr);
        maybe(a, "beta1", h.adam.beta1);
        maybe(a, "beta2", h.adam.beta2);
        maybe(a, "eps", h.adam.eps);
    }
    if (j.contains("early_stop")) {
        const json& e = j.at("early_stop");
        check_keys(e, {"enabled", "window", "tol"}, "hyper.early_stop");
        maybe(e, "enabled", h.early_stop.enabled);
        maybe(e, "window", h.early_stop.window);
        maybe(e, "tol", h.early_stop.tol);
    }
}

void parse_admm(const json& j, AdmmConfig& a) {
    check_keys(j, {"rho", "rho_growth", "rho_cap", "max_iters", "tol"}, "admm");
    maybe(j, "rho", a.rho);
    maybe(j, "rho_growth", a.rho_growth);
    maybe(j, "rho_cap", a.rho_cap);
    maybe(j, "max_iters", a.max_iters);
    maybe(j, "tol", a.tol);
}

void parse_degrade(const json& j, DegradeSpec& d) {
    check_keys(j, {"case", "mr", "point_mr", "stripe_mr", "group_rates", "seed"}, "degrade");
    if (j.contains("case")) d.kind = parse_case(j.at("case").get<std::string>());
    maybe(j, "mr", d.mr);
    maybe(j, "point_mr", d.point_mr);
    maybe(j, "stripe_mr", d.stripe_mr);
    maybe(j, "seed", d.seed);
    if (j.contains("group_rates")) {
        const auto rates = j.at("group_rates").get<std::vector<double>>();
        if (rates.size() != 4) {
            throw std::invalid_argument("config: degrade.group_rates needs exactly 4 rates");
        }
        std::copy(rates.begin(), rates.end(), d.group_rates.begin());
    }
}

}  // namespace

void RunConfig::validate() const {
    if (method != "3deeprep" && method != "tnn") {
        throw std::invalid_argument("config: method must be \"3deeprep\" or \"tnn\"");
    }
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    hyper.validate();
    admm.validate();
    degrade.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, {"method", "hyper", "admm", "degrade", "threads"}, "root");
    RunConfig cfg;
    maybe(j, "method", cfg.method);
    maybe(j, "threads", cfg.threads);
    if (j.contains("hyper")) parse_hyper(j.at("hyper"), cfg.hyper);
    if (j.contains("admm")) parse_admm(j.at("admm"), cfg.admm);
    if (j.contains("degrade")) parse_degrade(j.at("degrade"), cfg.degrade);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string materialize_run_config(const RunConfig& cfg) {
    json j;
    j["method"] = cfg.method;
    j["threads"] = cfg.threads;
    j["hyper"] = {
        {"beta", cfg.hyper.beta},
        {"theta", cfg.hyper.theta},
        {"gamma", cfg.hyper.gamma},
        {"k", cfg.hyper.k},
        {"rank_tol", cfg.hyper.rank_tol},
        {"slope", cfg.hyper.slope},
        {"expansion_init_std", cfg.hyper.expansion_init_std},
        {"iterations", cfg.hyper.iterations},
        {"seed", cfg.hyper.seed},
        {"adam",
         {{"lr", cfg.hyper.adam.lr},
          {"beta1", cfg.hyper.adam.beta1},
          {"beta2", cfg.hyper.adam.beta2},
          {"eps", cfg.hyper.adam.eps}}},
        {"early_stop",
         {{"enabled", cfg.hyper.early_stop.enabled},
          {"window", cfg.hyper.early_stop.window},
          {"tol", cfg.hyper.early_stop.tol}}},
    };
    j["admm"] = {
        {"rho", cfg.admm.rho},           {"rho_growth", cfg.admm.rho_growth},
        {"rho_cap", cfg.admm.rho_cap},   {"max_iters", cfg.admm.max_iters},
        {"tol", cfg.admm.tol},
    };
    j["degrade"] = {
        {"case", case_name(cfg.degrade.kind)},
        {"mr", cfg.degrade.mr},
        {"point_mr", cfg.degrade.point_mr},
        {"stripe_mr", cfg.degrade.stripe_mr},
        {"group_rates", cfg.degrade.group_rates},
        {"seed", cfg.degrade.seed},
    };
    return j.dump(2) + "\n";
}

void write_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write config: " + path);
    out << materialize_run_config(cfg);
    if (!out) throw std::runtime_error("config write failed: " + path);
}

}  // namespace deeprep
