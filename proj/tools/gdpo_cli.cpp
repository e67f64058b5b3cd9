// Command-line front end: enumeration, advantage computation, tool-call
// scoring, and the group-sampling simulator, sharing one core library.
//
// Exit codes: 0 success, 2 usage/config/schema errors, 3 budget refusals.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdpo/advantage.hpp"
#include "gdpo/csv.hpp"
#include "gdpo/enumeration.hpp"
#include "gdpo/errors.hpp"
#include "gdpo/json_io.hpp"
#include "gdpo/matching.hpp"
#include "gdpo/scenario.hpp"
#include "gdpo/simulator.hpp"
#include "gdpo/tool_call.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gdpo::InvalidInputError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gdpo::InvalidInputError("cannot write file: " + out_path);
    out << content;
}

gdpo::Method require_method(const std::string& name) {
    const auto method = gdpo::parse_method(name);
    if (!method)
        throw gdpo::InvalidInputError("unknown method '" + name +
                                      "' (expected grpo, grpo_no_std, or gdpo)");
    return *method;
}

gdpo::StdMode require_std_mode(const std::string& name) {
    if (name == "sample") return gdpo::StdMode::sample;
    if (name == "population") return gdpo::StdMode::population;
    throw gdpo::InvalidInputError("unknown std mode '" + name + "'");
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw gdpo::InvalidInputError("not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw gdpo::InvalidInputError("empty number list");
    return out;
}

/// "0,1" applies to every reward; "0,1;0,0.5,1" lists per-reward levels.
std::vector<std::vector<double>> parse_levels(const std::string& text, int rewards) {
    std::vector<std::vector<double>> per_reward;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) per_reward.push_back(parse_number_list(part));
    if (per_reward.size() == 1)
        return std::vector<std::vector<double>>(static_cast<std::size_t>(rewards), per_reward[0]);
    return per_reward;
}

struct Range {
    int from = 0;
    int to = 0;
};

Range parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        const int v = std::stoi(text);
        return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

// ---------------------------------------------------------------------------
// enumerate
// ---------------------------------------------------------------------------

struct EnumerateOptions {
    int rollouts = 2;
    int rewards = 2;
    std::string method = "grpo";
    std::string levels;
    std::uint64_t budget = 10'000'000;
    int round_digits = 6;
    bool order_sensitive = false;
    bool per_reward_tuple = false;
    bool witnesses = false;
    std::size_t max_witnesses = 10;
    bool table = false;
    bool sweep_mode = false;
    std::string g_range;
    std::string n_range;
    std::string format = "text";
    std::string out;
};

int cmd_enumerate(const EnumerateOptions& opt) {
    if (opt.sweep_mode) {
        gdpo::SweepSpec ss;
        const auto gr = opt.g_range.empty() ? Range{opt.rollouts, opt.rollouts}
                                            : parse_range(opt.g_range);
        const auto nr = opt.n_range.empty() ? Range{opt.rewards, opt.rewards}
                                            : parse_range(opt.n_range);
        ss.rollouts_from = gr.from;
        ss.rollouts_to = gr.to;
        ss.rewards_from = nr.from;
        ss.rewards_to = nr.to;
        ss.budget = opt.budget;
        ss.round_digits = opt.round_digits;
        if (!opt.levels.empty()) {
            const auto parsed = parse_levels(opt.levels, 1);
            if (parsed.size() != 1)
                throw gdpo::InvalidInputError("sweep levels must be a single shared list");
            ss.levels = parsed[0];
        }
        const auto result = gdpo::sweep(ss);
        std::ostringstream csv;
        gdpo::write_sweep(csv, result);
        write_output(opt.out, csv.str());
        for (const auto& d : result.diagnostics) std::cerr << "# " << d << '\n';
        return kExitOk;
    }

    gdpo::EnumerationSpec spec;
    spec.rollouts = opt.rollouts;
    spec.rewards = opt.rewards;
    spec.method = require_method(opt.method);
    spec.budget = opt.budget;
    spec.round_digits = opt.round_digits;
    spec.order_insensitive = !opt.order_sensitive;
    spec.per_reward_tuple = opt.per_reward_tuple;
    if (!opt.levels.empty()) spec.levels = parse_levels(opt.levels, opt.rewards);

    const auto result = gdpo::count_distinct_groups(spec);

    std::ostringstream body;
    if (opt.format == "json") {
        nlohmann::json out;
        out["rollouts"] = spec.rollouts;
        out["rewards"] = spec.rewards;
        out["method"] = gdpo::method_name(spec.method);
        out["combinations"] = result.combinations;
        out["count"] = result.distinct;
        if (opt.table) out["table"] = gdpo::io::signature_table_to_json(result);
        body << out.dump(2) << '\n';
    } else if (opt.format == "csv") {
        body << "G,n,method,levels,count\n"
             << spec.rollouts << ',' << spec.rewards << ',' << gdpo::method_name(spec.method)
             << ',' << gdpo::levels_repr(spec.resolved_levels()) << ',' << result.distinct << '\n';
    } else {
        body << "G=" << spec.rollouts << " n=" << spec.rewards
             << " method=" << gdpo::method_name(spec.method)
             << " combinations=" << result.combinations << " count=" << result.distinct << '\n';
        if (opt.table) body << gdpo::io::signature_table_to_json(result).dump(2) << '\n';
    }

    if (opt.witnesses) {
        const auto witnesses = gdpo::find_collapse_witnesses(spec, opt.max_witnesses);
        nlohmann::json list = nlohmann::json::array();
        for (const auto& w : witnesses) {
            list.push_back({{"rewards_a", w.rewards_a},
                            {"rewards_b", w.rewards_b},
                            {"grpo_signature", w.grpo_signature.to_values()},
                            {"gdpo_signature_a", w.gdpo_signature_a.to_values()},
                            {"gdpo_signature_b", w.gdpo_signature_b.to_values()}});
        }
        body << "witnesses=" << witnesses.size() << '\n' << list.dump(2) << '\n';
    }
    write_output(opt.out, body.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// advantages
// ---------------------------------------------------------------------------

struct AdvantagesOptions {
    std::string input;
    std::string method = "grpo";
    std::string weights;
    bool no_batch_norm = false;
    bool force_batch_norm = false;
    std::string std_mode = "sample";
    double batch_eps = 1e-6;
    std::string out;
};

int cmd_advantages(const AdvantagesOptions& opt) {
    const auto batch = gdpo::io::parse_reward_batch(gdpo::io::parse_text(read_file(opt.input)));

    gdpo::EstimatorConfig cfg;
    cfg.method = require_method(opt.method);
    cfg.std_mode = require_std_mode(opt.std_mode);
    cfg.batch_eps = opt.batch_eps;
    if (opt.no_batch_norm && opt.force_batch_norm)
        throw gdpo::InvalidInputError("--no-batch-norm conflicts with --batch-norm");
    if (opt.no_batch_norm) cfg.batch_norm = false;
    if (opt.force_batch_norm) cfg.batch_norm = true;
    if (!opt.weights.empty()) cfg.weights.values = parse_number_list(opt.weights);

    const auto result = gdpo::estimate(batch, cfg);
    write_output(opt.out, gdpo::io::advantage_batch_to_json(result).dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
    std::string response;
    std::string ground_truth;
    std::size_t cap = 64;
    std::string out;
};

int cmd_score(const ScoreOptions& opt) {
    const auto response_text = read_file(opt.response);
    const auto ground_truth =
        gdpo::io::parse_tool_call_file(gdpo::io::parse_text(read_file(opt.ground_truth)));

    const auto parsed = gdpo::StructuredResponse::parse(response_text);
    const int format = gdpo::format_reward(parsed);
    const auto calls = gdpo::parse_tool_calls(parsed);
    const auto report = gdpo::optimal_match_score(calls.calls, ground_truth, opt.cap);
    const double correctness = 6.0 * report.r_max / gdpo::max_match_score(ground_truth) - 3.0;

    if (calls.parse_failures > 0)
        std::cerr << "note: " << calls.parse_failures << " tool-call line(s) failed to parse\n";
    write_output(opt.out, gdpo::io::score_report_to_json(format, correctness, report).dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string preset = "competing";
    std::string scenario_file;
    std::uint64_t scenario_seed = 0;
    int questions = 8;
    int actions = 10;
    double hard_fraction = 0.2;
    double easy_fraction = 0.8;
    int overlap = 1;
    int base_count = 2;
    int gap = 0;

    std::string methods = "gdpo";
    int seeds = 1;
    std::uint64_t base_seed = 0;
    int steps = 100;
    int rollouts = 16;
    int batch_questions = 8;
    double learning_rate = 0.1;
    double clip_low = 0.2;
    double clip_high = 0.28;
    int ppo_epochs = 1;
    bool no_dynamic_filter = false;
    double kl_coef = 0.0;
    std::string weights;
    bool no_batch_norm = false;
    bool force_batch_norm = false;
    std::string std_mode = "sample";
    double batch_eps = 1e-6;
    std::string out = ".";
};

int cmd_simulate(const SimulateOptions& opt) {
    gdpo::ScenarioSpec scenario;
    if (!opt.scenario_file.empty()) {
        scenario = gdpo::io::parse_scenario(gdpo::io::parse_text(read_file(opt.scenario_file)));
    } else {
        gdpo::PresetParams params;
        params.questions = opt.questions;
        params.actions = opt.actions;
        params.hard_fraction = opt.hard_fraction;
        params.easy_fraction = opt.easy_fraction;
        params.overlap = opt.overlap;
        params.base_count = opt.base_count;
        params.gap = opt.gap;
        scenario = gdpo::build_scenario(opt.preset, params, opt.scenario_seed);
    }

    std::vector<gdpo::TrainConfig> configs;
    {
        std::stringstream ss(opt.methods);
        std::string name;
        while (std::getline(ss, name, ',')) {
            gdpo::TrainConfig cfg;
            cfg.rollouts = opt.rollouts;
            cfg.batch_questions = opt.batch_questions;
            cfg.steps = opt.steps;
            cfg.learning_rate = opt.learning_rate;
            cfg.clip_low = opt.clip_low;
            cfg.clip_high = opt.clip_high;
            cfg.ppo_epochs = opt.ppo_epochs;
            cfg.dynamic_filter = !opt.no_dynamic_filter;
            cfg.kl_coef = opt.kl_coef;
            cfg.estimator.method = require_method(name);
            cfg.estimator.std_mode = require_std_mode(opt.std_mode);
            cfg.estimator.batch_eps = opt.batch_eps;
            if (opt.no_batch_norm && opt.force_batch_norm)
                throw gdpo::InvalidInputError("--no-batch-norm conflicts with --batch-norm");
            if (opt.no_batch_norm) cfg.estimator.batch_norm = false;
            if (opt.force_batch_norm) cfg.estimator.batch_norm = true;
            if (!opt.weights.empty()) cfg.estimator.weights.values = parse_number_list(opt.weights);
            cfg.validate();
            configs.push_back(std::move(cfg));
        }
    }
    if (configs.empty()) throw gdpo::InvalidInputError("no methods given");
    if (opt.seeds < 1) throw gdpo::InvalidInputError("--seeds must be >= 1");

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < opt.seeds; ++i) seeds.push_back(opt.base_seed + static_cast<std::uint64_t>(i));

    std::filesystem::create_directories(opt.out);
    const auto metrics_path = std::filesystem::path(opt.out) / "metrics.csv";
    const auto summary_path = std::filesystem::path(opt.out) / "summary.csv";

    std::ofstream metrics(metrics_path, std::ios::binary);
    if (!metrics) throw gdpo::InvalidInputError("cannot write " + metrics_path.string());
    gdpo::write_metrics_header(metrics, scenario.reward_dims);

    // Runs are written and flushed one at a time, so an abort mid-way still
    // leaves the completed runs on disk.
    gdpo::ComparisonResult result;
    for (const auto& base_cfg : configs) {
        gdpo::MethodRuns runs;
        runs.method = gdpo::method_name(base_cfg.estimator.method);
        for (const auto seed : seeds) {
            gdpo::TrainConfig cfg = base_cfg;
            cfg.seed = seed;
            auto log = gdpo::run_experiment(scenario, cfg);
            gdpo::write_metrics_rows(metrics, log);
            metrics.flush();
            runs.runs.push_back(std::move(log));
        }
        result.methods.push_back(std::move(runs));
    }
    for (const auto& runs : result.methods) {
        const int steps = runs.runs.empty() ? 0 : static_cast<int>(runs.runs.front().steps.size());
        for (int t = 0; t < steps; ++t) {
            std::vector<double> totals;
            for (const auto& run : runs.runs)
                totals.push_back(run.steps[static_cast<std::size_t>(t)].mean_total);
            result.summary.push_back({t, runs.method, gdpo::median(totals),
                                      gdpo::quantile(totals, 0.25), gdpo::quantile(totals, 0.75)});
        }
    }

    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw gdpo::InvalidInputError("cannot write " + summary_path.string());
    gdpo::write_summary(summary, result.summary);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-reward group-relative advantage estimation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI sections per subcommand); "
                                   "command-line flags override file values");

    EnumerateOptions enum_opt;
    auto* enumerate = app.add_subcommand(
        "enumerate", "Count distinct advantage groups over all reward combinations");
    enumerate->add_option("--rollouts", enum_opt.rollouts, "Rollouts per group (G)");
    enumerate->add_option("--rewards", enum_opt.rewards, "Reward dimensions (n)");
    enumerate->add_option("--method", enum_opt.method, "grpo | grpo_no_std | gdpo");
    enumerate->add_option("--levels", enum_opt.levels,
                          "Reward levels, e.g. '0,1' shared or '0,1;0,0.5,1' per reward");
    enumerate->add_option("--budget", enum_opt.budget, "Combination budget")
        ->envname("GDPO_BUDGET");
    enumerate->add_option("--round-digits", enum_opt.round_digits, "Signature rounding digits");
    enumerate->add_flag("--order-sensitive", enum_opt.order_sensitive,
                        "Enumerate ordered tuples instead of multisets");
    enumerate->add_flag("--per-reward-tuple", enum_opt.per_reward_tuple,
                        "gdpo: signatures over per-reward advantage tuples");
    enumerate->add_flag("--witnesses", enum_opt.witnesses, "Report collapse witness pairs");
    enumerate->add_option("--max-witnesses", enum_opt.max_witnesses, "Witness cap (0 = all)");
    enumerate->add_flag("--table", enum_opt.table, "Include the signature table");
    enumerate->add_flag("--sweep", enum_opt.sweep_mode, "Sweep (G, n) ranges to CSV");
    enumerate->add_option("--g-range", enum_opt.g_range, "Sweep rollout range, e.g. 2:8");
    enumerate->add_option("--n-range", enum_opt.n_range, "Sweep reward range, e.g. 1:4");
    enumerate->add_option("--format", enum_opt.format, "text | json | csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    enumerate->add_option("--out", enum_opt.out, "Output file (default stdout)");

    AdvantagesOptions adv_opt;
    auto* advantages =
        app.add_subcommand("advantages", "Compute advantages for a reward-matrix batch file");
    advantages->add_option("--input", adv_opt.input, "Reward batch JSON file")->required();
    advantages->add_option("--method", adv_opt.method, "grpo | grpo_no_std | gdpo");
    advantages->add_option("--weights", adv_opt.weights, "Comma-separated reward weights");
    advantages->add_flag("--no-batch-norm", adv_opt.no_batch_norm, "Disable batch normalization");
    advantages->add_flag("--batch-norm", adv_opt.force_batch_norm, "Force batch normalization");
    advantages->add_option("--std-mode", adv_opt.std_mode, "sample | population");
    advantages->add_option("--batch-eps", adv_opt.batch_eps, "Batch normalization epsilon");
    advantages->add_option("--out", adv_opt.out, "Output file (default stdout)");

    ScoreOptions score_opt;
    auto* score = app.add_subcommand("score", "Score a structured response against ground truth");
    score->add_option("--response", score_opt.response, "Raw response text file")->required();
    score->add_option("--ground-truth", score_opt.ground_truth, "Ground-truth tool-call JSON file")
        ->required();
    score->add_option("--cap", score_opt.cap, "Maximum calls per side");
    score->add_option("--out", score_opt.out, "Output file (default stdout)");

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "Run the group-sampling training simulator");
    simulate->add_option("--preset", sim_opt.preset, "competing | easy-vs-hard");
    simulate->add_option("--scenario", sim_opt.scenario_file, "Scenario JSON file (overrides preset)");
    simulate->add_option("--scenario-seed", sim_opt.scenario_seed, "Preset construction seed");
    simulate->add_option("--questions", sim_opt.questions, "Questions per scenario");
    simulate->add_option("--actions", sim_opt.actions, "Actions per question");
    simulate->add_option("--hard-fraction", sim_opt.hard_fraction, "competing: hard-reward share");
    simulate->add_option("--easy-fraction", sim_opt.easy_fraction, "competing: easy-reward share");
    simulate->add_option("--overlap", sim_opt.overlap, "competing: actions satisfying both");
    simulate->add_option("--base-count", sim_opt.base_count, "easy-vs-hard: hard-reward count");
    simulate->add_option("--gap", sim_opt.gap, "easy-vs-hard: extra easy-reward count");
    simulate->add_option("--methods", sim_opt.methods, "Comma-separated estimator list");
    simulate->add_option("--seeds", sim_opt.seeds, "Number of seeds");
    simulate->add_option("--seed", sim_opt.base_seed, "Base seed (runs use seed..seed+seeds-1)");
    simulate->add_option("--steps", sim_opt.steps, "Training steps");
    simulate->add_option("--rollouts", sim_opt.rollouts, "Rollouts per group (G)");
    simulate->add_option("--batch-questions", sim_opt.batch_questions, "Questions per step");
    simulate->add_option("--lr", sim_opt.learning_rate, "Learning rate");
    simulate->add_option("--clip-low", sim_opt.clip_low, "Lower clip threshold");
    simulate->add_option("--clip-high", sim_opt.clip_high, "Upper clip threshold");
    simulate->add_option("--ppo-epochs", sim_opt.ppo_epochs, "Update epochs per step");
    simulate->add_flag("--no-dynamic-filter", sim_opt.no_dynamic_filter,
                       "Keep zero-spread groups");
    simulate->add_option("--kl-coef", sim_opt.kl_coef, "Quadratic drift penalty coefficient");
    simulate->add_option("--weights", sim_opt.weights, "Comma-separated reward weights");
    simulate->add_flag("--no-batch-norm", sim_opt.no_batch_norm, "Disable batch normalization");
    simulate->add_flag("--batch-norm", sim_opt.force_batch_norm, "Force batch normalization");
    simulate->add_option("--std-mode", sim_opt.std_mode, "sample | population");
    simulate->add_option("--batch-eps", sim_opt.batch_eps, "Batch normalization epsilon");
    simulate->add_option("--out", sim_opt.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (enumerate->parsed()) return cmd_enumerate(enum_opt);
        if (advantages->parsed()) return cmd_advantages(adv_opt);
        if (score->parsed()) return cmd_score(score_opt);
        if (simulate->parsed()) return cmd_simulate(sim_opt);
    } catch (const gdpo::BudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBudget;
    } catch (const gdpo::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const gdpo::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const gdpo::ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
