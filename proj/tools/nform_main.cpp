// Command-line front end: single runs, seeded ensembles, the exp1..exp6
// parameter studies and the gradient check.
//
// Exit codes: 0 success, 1 configuration error, 2 gradcheck failure, 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "nform/config.hpp"
#include "nform/gradcheck.hpp"
#include "nform/harness.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kGradCheckFailure = 2;
constexpr int kIoError = 3;

struct CommandLine {
    std::string config;
    std::string out;
    bool corrupt = false;
    std::map<std::string, std::string> values;
};

void add_common_options(CLI::App& cmd, CommandLine& cl) {
    cmd.add_option("--config", cl.config, "key=value configuration file");
    cmd.add_option("--out", cl.out, "output directory");
    for (const std::string_view key : nform::known_keys()) {
        const std::string name(key);
        cmd.add_option("--" + name, cl.values[name], "overrides '" + name + "'");
    }
}

int run_gradcheck(const nform::KeyValues& kv, bool corrupt) {
    nform::GradCheckOptions opt;
    const nform::ExperimentSpec spec = nform::build_spec(nform::ExperimentId::GradCheck, kv);
    opt.draws = spec.runs;
    opt.seed = kv.contains("seed") ? spec.base_seed : opt.seed;
    opt.corrupt = corrupt;
    const nform::GradCheckReport report = nform::gradcheck(opt);
    std::printf("entries checked        : %zu\n", report.entries);
    std::printf("max relative error     : %.3e\n", report.max_rel_error);
    std::printf("max abs error (small)  : %.3e\n", report.max_abs_error);
    std::printf("closed form vs reverse : %.3e\n", report.max_closed_form_diff);
    for (const std::string& note : report.failure_notes) {
        std::printf("FAIL %s\n", note.c_str());
    }
    std::printf("%s\n", report.passed() ? "gradcheck passed" : "gradcheck FAILED");
    return report.passed() ? 0 : kGradCheckFailure;
}

int run_command(const std::string& name, const CommandLine& cl) {
    nform::KeyValues kv;
    if (!cl.config.empty()) {
        kv = nform::load_key_values(cl.config);
    }
    for (const auto& [key, value] : cl.values) {
        if (!value.empty()) {
            kv[key] = value;
        }
    }
    const nform::ExperimentId id = nform::parse_experiment_id(name);
    if (id == nform::ExperimentId::GradCheck) {
        return run_gradcheck(kv, cl.corrupt);
    }

    nform::ExperimentSpec spec = nform::build_spec(id, kv);
    const bool to_stdout = cl.out.empty() &&
                           (id == nform::ExperimentId::Single || id == nform::ExperimentId::Ensemble);
    spec.out = cl.out.empty() ? std::filesystem::path("results") : std::filesystem::path(cl.out);

    const nform::ExperimentOutput output = nform::run_experiment(spec);
    if (to_stdout) {
        std::cout << output.files.front().content;
        for (std::size_t i = 1; i < output.files.size(); ++i) {
            std::cerr << "# " << output.files[i].name << '\n' << output.files[i].content;
        }
        return 0;
    }
    for (const auto& path : nform::write_outputs(spec.out, output)) {
        std::cerr << "wrote " << path.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural-form solver for the stiff linear model problem du/dx = lambda u"};
    app.require_subcommand(1);

    CommandLine cl;
    const char* commands[][2] = {
        {"single", "train once and emit one result row"},
        {"ensemble", "seeded random-initialisation ensemble with summary statistics"},
        {"exp1", "weight initialisation sweep"},
        {"exp2", "hidden-neuron count sweep"},
        {"exp3", "hidden-layer count sweep (table)"},
        {"exp4", "epoch budget sweep"},
        {"exp5", "stiffness parameter and domain size sweeps"},
        {"exp6", "optimiser comparison statistics"},
        {"gradcheck", "finite-difference check of all analytic gradients"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common_options(*cmd, cl);
        if (std::string(name) == "gradcheck") {
            cmd->add_flag("--corrupt", cl.corrupt, "perturb one analytic gradient entry")
                ->group("");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        return run_command(app.get_subcommands().front()->get_name(), cl);
    } catch (const nform::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const nform::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}
