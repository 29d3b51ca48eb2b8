#include <array>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deeprep/config.hpp"
#include "deeprep/degradation.hpp"
#include "deeprep/io.hpp"
#include "deeprep/metrics.hpp"
#include "deeprep/model.hpp"
#include "deeprep/parallel.hpp"
#include "deeprep/tnn.hpp"

namespace {

using namespace deeprep;

void emit_error(const std::string& kind, const std::string& detail) {
    nlohmann::json j;
    j["error"] = kind;
    j["detail"] = detail;
    std::cerr << j.dump() << "\n";
}

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return load_run_config(path);
}

void write_trace(const std::vector<TraceRecord>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    for (const auto& rec : history) {
        nlohmann::json j;
        j["iteration"] = rec.iteration;
        j["total"] = rec.total;
        j["nuclear"] = rec.nuclear;
        j["dir_residual"] = rec.dir_residual;
        j["final_residual"] = rec.final_residual;
        out << j.dump() << "\n";
    }
}

std::array<Index, 3> parse_triple(const std::string& text, const char* what) {
    std::array<Index, 3> out{};
    std::stringstream ss(text);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 3) throw std::invalid_argument(std::string(what) + ": expected three values");
        out[static_cast<std::size_t>(i++)] = std::stoll(item);
    }
    if (i != 3) throw std::invalid_argument(std::string(what) + ": expected three values");
    return out;
}

struct CommonFlags {
    std::string config_path;
    int threads = 0;          // 0 = take from config
    std::int64_t seed = -1;   // -1 = take from config
    int iterations = -1;      // -1 = take from config
};

RunConfig effective_config(const CommonFlags& flags) {
    RunConfig cfg = load_config_or_default(flags.config_path);
    if (flags.threads > 0) cfg.threads = flags.threads;
    if (flags.seed >= 0) {
        cfg.hyper.seed = static_cast<std::uint64_t>(flags.seed);
        cfg.degrade.seed = static_cast<std::uint64_t>(flags.seed);
    }
    if (flags.iterations >= 0) cfg.hyper.iterations = flags.iterations;
    cfg.validate();
    set_max_threads(cfg.threads);
    return cfg;
}

int run_degrade(const CommonFlags& flags, const std::string& in_path, const std::string& case_name_arg,
                double mr, const std::string& out_mask, const std::string& out_observed,
                const std::vector<double>& group_rates) {
    RunConfig cfg = effective_config(flags);
    cfg.degrade.kind = parse_case(case_name_arg);
    if (mr >= 0.0) {
        cfg.degrade.mr = mr;
    }
    if (!group_rates.empty()) {
        if (group_rates.size() != 4) {
            throw std::invalid_argument("--group-rates needs exactly 4 values");
        }
        std::copy(group_rates.begin(), group_rates.end(), cfg.degrade.group_rates.begin());
    }
    cfg.degrade.validate();

    const Tensor3 truth = load_tensor(in_path);
    const Mask mask = generate_mask(truth.dims(), cfg.degrade);
    const Tensor3 observed = project_omega(truth, mask);
    save_mask(mask, out_mask);
    save_tensor(observed, out_observed);
    write_run_config(cfg, out_observed + ".runconfig.json");
    std::cout << "degraded " << in_path << ": case=" << case_name(cfg.degrade.kind)
              << " missing_rate=" << mask.missing_rate() << "\n";
    return 0;
}

int run_inpaint(const CommonFlags& flags, const std::string& method, const std::string& in_path,
                const std::string& mask_path, const std::string& out_path,
                const std::string& trace_path) {
    RunConfig cfg = effective_config(flags);
    cfg.method = method;

    const Tensor3 observed = load_tensor(in_path);
    const Mask mask = load_mask(mask_path);

    if (method == "tnn") {
        const TnnResult result = tnn_complete(observed, mask, cfg.admm);
        save_tensor(result.x, out_path);
        write_run_config(cfg, out_path + ".runconfig.json");
        std::cout << "tnn: iterations=" << result.iterations
                  << " converged=" << (result.converged ? "yes" : "no")
                  << " rel_change=" << result.final_rel_change << "\n";
        return 0;
    }

    const TrainResult result = train(observed, mask, cfg.hyper, cfg.admm);
    save_tensor(result.recovered, out_path);
    write_run_config(cfg, out_path + ".runconfig.json");
    if (!trace_path.empty()) write_trace(result.history, trace_path);
    std::cout << "3deeprep: iterations=" << result.iterations_run
              << " params=" << param_count(observed.dims(), cfg.hyper.k)
              << (result.early_stopped ? " (early stop)" : "") << "\n";
    return 0;
}

int run_evaluate(const std::string& recovered_path, const std::string& truth_path,
                 const std::string& report_path) {
    const Tensor3 recovered = load_tensor(recovered_path);
    const Tensor3 truth = load_tensor(truth_path);
    const MetricsReport report = evaluate(
        recovered, truth, {{"recovered", recovered_path}, {"truth", truth_path}});
    const std::string line = to_json_line(report);
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + report_path);
    out << line << "\n";
    std::cout << line << "\n";
    return 0;
}

int run_ablate(const CommonFlags& flags, const std::string& direction, const std::string& dims_text,
               const std::string& in_path, const std::string& mask_path,
               const std::string& out_path, const std::string& trace_path) {
    RunConfig cfg = effective_config(flags);

    Dims dims{};
    if (!dims_text.empty()) {
        dims = parse_triple(dims_text, "--dims");
    } else if (!in_path.empty()) {
        dims = load_tensor(in_path).dims();
    } else {
        throw std::invalid_argument("ablate: need --dims or --in");
    }

    const std::int64_t params =
        direction == "3d" ? param_count(dims, cfg.hyper.k)
                          : param_count_single_direction(dims, std::stoi(direction), cfg.hyper.k);
    std::cout << "ablate: direction=" << direction << " parameter_count=" << params << "\n";

    if (in_path.empty()) return 0;
    if (mask_path.empty() || out_path.empty()) {
        throw std::invalid_argument("ablate: --in requires --mask and --out");
    }

    const Tensor3 observed = load_tensor(in_path);
    const Mask mask = load_mask(mask_path);
    const TrainResult result =
        direction == "3d" ? train(observed, mask, cfg.hyper, cfg.admm)
                          : train_single_direction(observed, mask, std::stoi(direction),
                                                   cfg.hyper, cfg.admm);
    save_tensor(result.recovered, out_path);
    write_run_config(cfg, out_path + ".runconfig.json");
    if (!trace_path.empty()) write_trace(result.history, trace_path);
    std::cout << "ablate: iterations=" << result.iterations_run << "\n";
    return 0;
}

int run_render(const std::string& in_path, const std::string& bands_text,
               const std::string& out_path) {
    const Tensor3 t = load_tensor(in_path);
    const std::array<Index, 3> bands_one_based = parse_triple(bands_text, "--bands");
    std::array<Index, 3> bands{};
    for (int i = 0; i < 3; ++i) {
        if (bands_one_based[static_cast<std::size_t>(i)] < 1 ||
            bands_one_based[static_cast<std::size_t>(i)] > t.n3()) {
            throw std::invalid_argument("render: band index out of range (bands are 1-based)");
        }
        bands[static_cast<std::size_t>(i)] = bands_one_based[static_cast<std::size_t>(i)] - 1;
    }
    export_false_color(t, bands, out_path);
    std::cout << "rendered " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3-directional deep low-rank tensor inpainting for hyperspectral images"};
    app.require_subcommand(1);

    CommonFlags flags;

    // degrade
    auto* degrade = app.add_subcommand("degrade", "simulate a missing-data mask and observation");
    std::string deg_in, deg_case = "point", deg_out_mask, deg_out_observed;
    double deg_mr = -1.0;
    std::vector<double> deg_group_rates;
    degrade->add_option("--in", deg_in, "ground-truth tensor file")->required();
    degrade->add_option("--case", deg_case, "point|stripe|deadline|mixed")->required();
    degrade->add_option("--mr", deg_mr, "missing rate for point/stripe");
    degrade->add_option("--seed", flags.seed, "RNG seed");
    degrade->add_option("--out-mask", deg_out_mask, "mask output path")->required();
    degrade->add_option("--out-observed", deg_out_observed, "observed tensor output path")->required();
    degrade->add_option("--group-rates", deg_group_rates, "four deadline group rates");
    degrade->add_option("--config", flags.config_path, "run config JSON");

    // inpaint
    auto* inpaint = app.add_subcommand("inpaint", "recover a degraded tensor");
    std::string inp_method, inp_in, inp_mask, inp_out, inp_trace;
    inpaint->add_option("--method", inp_method, "3deeprep|tnn")
        ->required()
        ->check(CLI::IsMember({"3deeprep", "tnn"}));
    inpaint->add_option("--config", flags.config_path, "run config JSON");
    inpaint->add_option("--in", inp_in, "observed tensor file")->required();
    inpaint->add_option("--mask", inp_mask, "mask file")->required();
    inpaint->add_option("--out", inp_out, "recovered tensor output path")->required();
    inpaint->add_option("--trace", inp_trace, "loss trace output (JSON lines)");
    inpaint->add_option("--seed", flags.seed, "RNG seed override");
    inpaint->add_option("--iters", flags.iterations, "iteration budget override");
    inpaint->add_option("--threads", flags.threads, "internal parallelism cap");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "PSNR/SSIM/SAM against ground truth");
    std::string eva_recovered, eva_truth, eva_report;
    evaluate_cmd->add_option("--recovered", eva_recovered, "recovered tensor file")->required();
    evaluate_cmd->add_option("--truth", eva_truth, "ground-truth tensor file")->required();
    evaluate_cmd->add_option("--report", eva_report, "report output path")->required();

    // ablate
    auto* ablate = app.add_subcommand("ablate", "direction study: single-direction vs full model");
    std::string abl_direction, abl_dims, abl_in, abl_mask, abl_out, abl_trace;
    ablate->add_option("--direction", abl_direction, "1|2|3|3d")
        ->required()
        ->check(CLI::IsMember({"1", "2", "3", "3d"}));
    ablate->add_option("--dims", abl_dims, "n1,n2,n3 (parameter count only, no training)");
    ablate->add_option("--in", abl_in, "observed tensor file");
    ablate->add_option("--mask", abl_mask, "mask file");
    ablate->add_option("--out", abl_out, "recovered tensor output path");
    ablate->add_option("--trace", abl_trace, "loss trace output (JSON lines)");
    ablate->add_option("--config", flags.config_path, "run config JSON");
    ablate->add_option("--seed", flags.seed, "RNG seed override");
    ablate->add_option("--iters", flags.iterations, "iteration budget override");
    ablate->add_option("--threads", flags.threads, "internal parallelism cap");

    // render
    auto* render = app.add_subcommand("render", "export a false-color PPM of three bands");
    std::string ren_in, ren_bands = "70,40,10", ren_out;
    render->add_option("--in", ren_in, "tensor file")->required();
    render->add_option("--bands", ren_bands, "r,g,b band indices (1-based)");
    render->add_option("--out", ren_out, "PPM output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*degrade) {
            return run_degrade(flags, deg_in, deg_case, deg_mr, deg_out_mask, deg_out_observed,
                               deg_group_rates);
        }
        if (*inpaint) {
            return run_inpaint(flags, inp_method, inp_in, inp_mask, inp_out, inp_trace);
        }
        if (*evaluate_cmd) {
            return run_evaluate(eva_recovered, eva_truth, eva_report);
        }
        if (*ablate) {
            return run_ablate(flags, abl_direction, abl_dims, abl_in, abl_mask, abl_out,
                              abl_trace);
        }
        if (*render) {
            return run_render(ren_in, ren_bands, ren_out);
        }
    } catch (const std::invalid_argument& e) {
        emit_error("invalid_argument", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("runtime_error", e.what());
        return 2;
    }
    return 0;
}
