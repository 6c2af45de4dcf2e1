#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "rmpflow/io.hpp"
#include "rmpflow/runners.hpp"
#include "rmpflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace rmpflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
};

void addCommon(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
    cmd->add_option("--config", args.config, "scenario config file")->required();
    if (needs_out) cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed");
}

ScenarioConfig load(const CommonArgs& args, ScenarioKind expected) {
    ScenarioConfig config = loadScenario(args.config);
    if (config.kind != expected)
        throw ConfigError("config is a '" + toString(config.kind) + "' scenario, expected '" +
                          toString(expected) + "'");
    if (args.seed) config.seed = *args.seed;
    return config;
}

fs::path outDir(const CommonArgs& args, const ScenarioConfig& config) {
    fs::path dir = args.out;
    if (args.out == "out" && config.output_dir) dir = *config.output_dir;
    fs::create_directories(dir);
    return dir;
}

int runGuarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RMP-tree motion-policy fusion benchmarks"};
    app.require_subcommand(1);

    CommonArgs run1d_args, run2d_args, runarm_args, runinv_args, rundyn_args;
    CommonArgs validate_args, tree_args, dump_args;
    std::vector<double> dump_q, dump_qd;

    addCommon(app.add_subcommand("run-1d", "barrier task-map study"), run1d_args);
    addCommon(app.add_subcommand("run-2d", "obstacle/attractor panels"), run2d_args);
    addCommon(app.add_subcommand("run-arm", "planar-arm reaching benchmark"), runarm_args);
    addCommon(app.add_subcommand("run-invariance", "coordinate-invariance check"), runinv_args);
    addCommon(app.add_subcommand("run-dyncheck", "dynamics cross-check"), rundyn_args);
    addCommon(app.add_subcommand("validate", "parse and validate a config"), validate_args,
              false);
    addCommon(app.add_subcommand("print-tree", "print the scenario tree with node dimensions"),
              tree_args, false);
    auto* dump = app.add_subcommand("dump-dyn", "dump the chain root inertia and force");
    addCommon(dump, dump_args, false);
    dump->add_option("--q", dump_q, "joint positions");
    dump->add_option("--qd", dump_qd, "joint velocities");

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    return runGuarded([&] {
        if (sub == "run-1d") {
            const ScenarioConfig config = load(run1d_args, ScenarioKind::OneD);
            runOneD(config, outDir(run1d_args, config));
        } else if (sub == "run-2d") {
            const ScenarioConfig config = load(run2d_args, ScenarioKind::TwoD);
            runTwoD(config, outDir(run2d_args, config));
        } else if (sub == "run-arm") {
            const ScenarioConfig config = load(runarm_args, ScenarioKind::Arm);
            runArm(config, outDir(runarm_args, config));
        } else if (sub == "run-invariance") {
            const ScenarioConfig config = load(runinv_args, ScenarioKind::Invariance);
            const auto outcome = runInvariance(config, outDir(runinv_args, config));
            std::cout << "sup deviation: " << outcome.sup_deviation << "\n";
        } else if (sub == "run-dyncheck") {
            const ScenarioConfig config = load(rundyn_args, ScenarioKind::DynCheck);
            const auto outcome = runDynCheck(config, outDir(rundyn_args, config));
            for (const auto& chain : outcome.chains)
                std::cout << chain.name << ": forward rel err " << chain.max_forward_rel_err
                          << ", roundtrip err " << chain.max_roundtrip_err << "\n";
        } else if (sub == "validate") {
            ScenarioConfig config = loadScenario(validate_args.config);
            if (validate_args.seed) config.seed = *validate_args.seed;
            buildScenarioTree(config);  // exercises map/policy construction
            std::cout << "ok: " << toString(config.kind) << " scenario\n";
        } else if (sub == "print-tree") {
            ScenarioConfig config = loadScenario(tree_args.config);
            if (tree_args.seed) config.seed = *tree_args.seed;
            buildScenarioTree(config).print(std::cout);
        } else if (sub == "dump-dyn") {
            ScenarioConfig config = loadScenario(dump_args.config);
            if (config.kind != ScenarioKind::DynCheck)
                throw ConfigError("dump-dyn expects a dyncheck scenario");
            const ChainModel& chain = config.dyncheck->chains.front().model;
            const int n = chain.dof();
            VectorXd q = VectorXd::Zero(n), qd = VectorXd::Zero(n);
            for (size_t i = 0; i < dump_q.size() && i < static_cast<size_t>(n); ++i)
                q(static_cast<Eigen::Index>(i)) = dump_q[i];
            for (size_t i = 0; i < dump_qd.size() && i < static_cast<size_t>(n); ++i)
                qd(static_cast<Eigen::Index>(i)) = dump_qd[i];
            const NaturalRmp root = chainRootRmp(chain, q, qd);
            std::cout << "M_r =\n" << root.m << "\nf_r = " << root.f.transpose()
                      << "\nbias (lagrangian) = "
                      << lagrangianBias(chain, q, qd).transpose() << "\n";
        }
    });
}
