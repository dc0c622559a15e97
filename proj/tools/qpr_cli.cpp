// Experiment driver: solve ground-state grids, label them with order
// parameters, train the kernel Alphatron, and export plot-ready CSVs.
//
// Typical run:
//   qpr groundstate --preset spt --out runs/spt
//   qpr label       --preset spt --out runs/spt
//   qpr train       --preset spt --out runs/spt
//   qpr predict     --preset spt --out runs/spt
//   qpr report      --preset spt --out runs/spt

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qpr/errors.hpp"
#include "qpr/experiment.hpp"

namespace {

struct CommonOpts {
    std::string preset;
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int threads = -1;
};

qpr::ExperimentConfig resolve_config(const CommonOpts& opts) {
    qpr::ExperimentConfig config;
    if (!opts.preset.empty()) config = qpr::preset_config(opts.preset);
    if (!opts.config_path.empty()) {
        if (opts.preset.empty()) {
            config = qpr::config_from_file(opts.config_path);
        } else {
            std::ifstream in(opts.config_path);
            if (!in) throw qpr::ConfigError("cannot open config: " + opts.config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            qpr::apply_json_overrides(config, ss.str());
        }
    }
    if (opts.preset.empty() && opts.config_path.empty())
        throw qpr::ConfigError("need --preset or --config");
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (opts.seed >= 0) config.seed = static_cast<uint64_t>(opts.seed);
    if (opts.threads >= 0) config.threads = opts.threads;
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--preset", opts.preset, "Built-in experiment: xxz, spt, bond-xxz, ptdist");
    cmd->add_option("--config", opts.config_path, "JSON config file (overlays the preset)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Master seed");
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware)");
}

int run_stage(const CommonOpts& opts,
              const std::function<qpr::StageResult(const qpr::ExperimentConfig&)>& stage) {
    try {
        const qpr::ExperimentConfig config = resolve_config(opts);
        const qpr::StageResult result = stage(config);
        for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
        return result.exit_code;
    } catch (const qpr::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qpr::InvalidModelError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qpr::InvalidThresholdError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-kernel phase recognition experiments"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        qpr::StageResult (*fn)(const qpr::ExperimentConfig&);
    };
    const Sub subs[] = {
        {"groundstate", "Solve and cache every grid point's ground state", qpr::cmd_groundstate},
        {"label", "Evaluate the configured order parameter per point", qpr::cmd_label},
        {"train", "Build the training kernel and train the kernel Alphatron", qpr::cmd_train},
        {"predict", "Predict the test grid and score risk / success rate", qpr::cmd_predict},
        {"ptdist", "Porter-Thomas distance sweep over the grid", qpr::cmd_ptdist},
        {"shadow-baseline", "Classical-shadow kernel-PCA baseline", qpr::cmd_shadow_baseline},
        {"report", "Summarize a run and recheck metrics against the CSVs", qpr::cmd_report},
    };

    std::vector<CommonOpts> opts(std::size(subs));
    std::vector<CLI::App*> cmds;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, opts[i]);
        cmds.push_back(cmd);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < std::size(subs); ++i) {
        if (cmds[i]->parsed()) return run_stage(opts[i], subs[i].fn);
    }
    return 2;
}
