// brar — exact evaluation of two-arm Bayesian response-adaptive designs:
// critical-value tables, burn-in sweeps, optimal-burn-in maps, prior
// sensitivity panels, group-sequential summaries, and Monte Carlo checks.
//
// Configuration comes from one declarative JSON document (--config) whose
// top-level keys apply everywhere and whose per-subcommand objects hold the
// command options; any command-line flag overrides its config field. Every
// report is composed in memory first, so failed runs leave no output file,
// and reruns with one config are byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "brar/common.hpp"
#include "brar/csv.hpp"
#include "brar/design.hpp"
#include "brar/exact_tests.hpp"
#include "brar/group_sequential.hpp"
#include "brar/mc.hpp"
#include "brar/operating_characteristics.hpp"
#include "brar/policy.hpp"
#include "brar/posterior.hpp"

namespace {

using nlohmann::json;

constexpr int large_gate_horizon = 100;

struct shared_options {
    std::string config_path;
    std::string cache_dir;
    bool large = false;
    int workers = 1;  // reserved; evaluation is single-threaded
};

// ---------------------------------------------------------------- config --

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw brar::io_error("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw brar::config_error(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw brar::config_error("config root must be a JSON object");
    return doc;
}

template <class T>
inline constexpr bool is_vector_v = false;
template <class U>
inline constexpr bool is_vector_v<std::vector<U>> = true;

// Fills one option target from the config document unless the flag was given
// on the command line; flags always win.
class option_overlay {
  public:
    option_overlay(const CLI::App* cmd, const json& root) : cmd_(cmd), root_(&root) {
        if (root.contains(cmd->get_name())) {
            const json& sec = root.at(cmd->get_name());
            if (!sec.is_object())
                throw brar::config_error("config section '" + cmd->get_name() + "' must be an object");
            sec_ = &sec;
        }
    }

    template <class T>
    void fill(const std::string& flag, const char* key, T& target, bool top_level = false) const {
        if (cmd_->get_option(flag)->count() > 0) return;
        const json* src = nullptr;
        if (sec_ && sec_->contains(key)) src = &sec_->at(key);
        else if (top_level && root_->contains(key)) src = &root_->at(key);
        if (!src) return;
        if constexpr (is_vector_v<T>) {
            if (src->is_array() && src->empty())
                throw brar::config_error(std::string("config field '") + key + "' must not be empty");
        }
        try {
            target = src->get<T>();
        } catch (const json::exception& e) {
            throw brar::config_error(std::string("config field '") + key + "': " + e.what());
        }
    }

  private:
    const CLI::App* cmd_;
    const json* root_;
    const json* sec_ = nullptr;
};

// -------------------------------------------------------------- canonical --

class canonical_config {
  public:
    explicit canonical_config(std::string_view cmd) : text_("cmd=") { text_ += cmd; }

    canonical_config& kv(std::string_view key, const std::string& value) {
        text_ += ' ';
        text_ += key;
        text_ += '=';
        text_ += value;
        return *this;
    }
    canonical_config& kv(std::string_view key, const char* value) {
        return kv(key, std::string(value));
    }
    canonical_config& kv(std::string_view key, double value) {
        return kv(key, brar::format_double(value));
    }
    canonical_config& kv(std::string_view key, int value) { return kv(key, std::to_string(value)); }
    canonical_config& kv(std::string_view key, std::int64_t value) {
        return kv(key, std::to_string(value));
    }
    canonical_config& kv(std::string_view key, std::uint64_t value) {
        return kv(key, std::to_string(value));
    }
    canonical_config& kv(std::string_view key, bool value) {
        return kv(key, value ? "true" : "false");
    }
    template <class T>
    canonical_config& kv(std::string_view key, const std::vector<T>& values) {
        std::string joined;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) joined += ',';
            if constexpr (std::is_same_v<T, double>) joined += brar::format_double(values[i]);
            else if constexpr (std::is_same_v<T, std::string>) joined += values[i];
            else joined += std::to_string(values[i]);
        }
        return kv(key, joined);
    }

    std::string hash() const { return brar::hex64(brar::fnv1a64(text_)); }

  private:
    std::string text_;
};

// ---------------------------------------------------------------- parsing --

brar::statistic_kind parse_stat(const std::string& s) {
    if (s == "ppcs") return brar::statistic_kind::ppcs;
    if (s == "wald") return brar::statistic_kind::wald;
    if (s == "wald-plugin" || s == "wald_plugin") return brar::statistic_kind::wald_plugin;
    throw brar::config_error("unknown statistic '" + s + "' (ppcs, wald, wald-plugin)");
}

brar::test_mode parse_test(const std::string& s) {
    if (s == "calibrated") return brar::test_mode::calibrated;
    if (s == "ux") return brar::test_mode::ux;
    if (s == "cxs" || s == "cx-s") return brar::test_mode::cxs;
    if (s == "asymptotic") return brar::test_mode::asymptotic;
    throw brar::config_error("unknown test '" + s + "' (calibrated, ux, cxs, asymptotic)");
}

brar::oc_kind parse_kind(const std::string& s) {
    if (s == "rejection" || s == "rejection-rate" || s == "rejection_rate")
        return brar::oc_kind::rejection_rate;
    if (s == "epasa") return brar::oc_kind::epasa;
    if (s == "piwd") return brar::oc_kind::piwd;
    if (s == "bias") return brar::oc_kind::bias;
    throw brar::config_error("unknown kind '" + s + "' (rejection, epasa, piwd, bias)");
}

brar::oc_kind parse_metric(const std::string& s) {
    if (s == "max-rejection") return brar::oc_kind::rejection_rate;
    return parse_kind(s);
}

brar::burn_in_rule parse_rule(const std::string& s) {
    if (s == "alternating") return brar::burn_in_rule::alternating;
    if (s == "random" || s == "random-order") return brar::burn_in_rule::random_order;
    throw brar::config_error("unknown burn-in rule '" + s + "' (alternating, random)");
}

brar::block_rule parse_block_rule(const std::string& s) {
    if (s == "deterministic") return brar::block_rule::deterministic;
    if (s == "binomial") return brar::block_rule::binomial;
    throw brar::config_error("unknown block rule '" + s + "' (deterministic, binomial)");
}

brar::pniwd_scope parse_scope(const std::string& s) {
    if (s == "full") return brar::pniwd_scope::full;
    if (s == "realized") return brar::pniwd_scope::realized;
    throw brar::config_error("unknown imbalance scope '" + s + "' (full, realized)");
}

brar::beta_prior prior_of(const std::vector<double>& p) {
    if (p.size() != 2) throw brar::config_error("prior needs exactly two shape parameters");
    const brar::beta_prior prior{p[0], p[1]};
    prior.validate();
    return prior;
}

std::pair<double, double> clip_of(const std::vector<double>& c) {
    if (c.size() != 2) throw brar::config_error("clip needs exactly two bounds");
    return {c[0], c[1]};
}

void check_large_gate(int horizon, bool large) {
    if (horizon > large_gate_horizon && !large)
        throw brar::config_error(
            "trials beyond " + std::to_string(large_gate_horizon) +
            " participants are gated behind --large (a full 240-participant policy and "
            "coefficient pass takes minutes and roughly a gigabyte of memory)");
}

std::vector<int> default_bp_burn_ins(int horizon) {
    std::vector<int> out;
    for (int tenth = 0; tenth <= 10; ++tenth) {
        const int b = static_cast<int>(std::llround(tenth * 0.1 * horizon / 2.0));
        if (out.empty() || out.back() != b) out.push_back(b);
    }
    return out;
}

void require_burn_ins(const std::vector<int>& burn_ins, int horizon) {
    if (burn_ins.empty()) throw brar::config_error("burn-in list must not be empty");
    for (const int b : burn_ins) {
        if (b < 0 || 2 * b > horizon)
            throw brar::config_error("burn-in " + std::to_string(b) +
                                     " out of range for horizon " + std::to_string(horizon));
    }
}

// ----------------------------------------------------------------- output --

void write_report(const std::string& out_path, const brar::report_meta& meta,
                  const std::function<void(brar::csv_writer&)>& body) {
    std::ostringstream buf;
    brar::csv_writer w(buf);
    brar::write_report_header(w, meta);
    body(w);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw brar::io_error("cannot open output file: " + out_path);
    out << buf.str();
    out.flush();
    if (!out) throw brar::io_error("failed writing output file: " + out_path);
    std::cerr << "wrote " << out_path << "\n";
}

brar::policy_table acquire_policy(const shared_options& shared, int horizon,
                                  const brar::beta_prior& prior, double clip_lo, double clip_hi,
                                  double tol) {
    const int last = horizon - 1;
    if (shared.cache_dir.empty())
        return brar::build_policy_table(0, last, prior, clip_lo, clip_hi, tol);
    namespace fs = std::filesystem;
    const std::string name = brar::policy_cache_name(0, last, prior, clip_lo, clip_hi, tol);
    const std::string path = (fs::path(shared.cache_dir) / name).string();
    if (auto cached = brar::load_policy_cache(path, 0, last, prior, clip_lo, clip_hi, tol))
        return std::move(*cached);
    brar::policy_table table = brar::build_policy_table(0, last, prior, clip_lo, clip_hi, tol);
    try {
        fs::create_directories(shared.cache_dir);
        brar::save_policy_cache(table, path);
    } catch (const std::exception& e) {
        std::cerr << "warning: policy cache not written: " << e.what() << "\n";
    }
    return table;
}

std::string tail_field(const brar::tail_cut& cut) {
    return cut.any ? brar::format_double(cut.crit) : std::string();
}

// --------------------------------------------------------------- critvals --

struct critvals_options {
    int horizon = 60;
    std::vector<int> burn_ins;
    std::vector<std::string> stats{"ppcs"};
    std::vector<int> s_values;
    double theta_null = 0.5;
    double alpha_upper = 0.025;
    double alpha_lower = 0.025;
    std::vector<double> prior{1.0, 1.0};
    std::vector<double> clip{0.0, 1.0};
    double policy_tol = 1e-3;
    double stat_tol = 1e-6;
    std::string out = "critvals.csv";
};

void run_critvals(const shared_options& shared, critvals_options opt) {
    check_large_gate(opt.horizon, shared.large);
    if (opt.burn_ins.empty())
        for (int b = 0; 2 * b <= opt.horizon; ++b) opt.burn_ins.push_back(b);
    require_burn_ins(opt.burn_ins, opt.horizon);
    if (opt.s_values.empty()) {
        opt.s_values = {opt.horizon / 5, 4 * opt.horizon / 5};
        if (opt.s_values[0] == opt.s_values[1]) opt.s_values.pop_back();
    }
    for (const int s : opt.s_values)
        if (s < 0 || s > opt.horizon)
            throw brar::config_error("conditional total " + std::to_string(s) +
                                     " outside 0..horizon");
    const brar::beta_prior prior = prior_of(opt.prior);
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    std::vector<brar::statistic_kind> stats;
    for (const std::string& s : opt.stats) stats.push_back(parse_stat(s));

    brar::design_spec base;
    base.horizon = opt.horizon;
    base.prior = prior;
    base.clip_lo = clip_lo;
    base.clip_hi = clip_hi;
    base.policy_tol = opt.policy_tol;
    base.stat_tol = opt.stat_tol;
    base.validate();

    const std::string hash = canonical_config("critvals")
                                 .kv("n", opt.horizon)
                                 .kv("burn_in", opt.burn_ins)
                                 .kv("stats", opt.stats)
                                 .kv("s_values", opt.s_values)
                                 .kv("theta_null", opt.theta_null)
                                 .kv("alpha_upper", opt.alpha_upper)
                                 .kv("alpha_lower", opt.alpha_lower)
                                 .kv("prior", opt.prior)
                                 .kv("clip", opt.clip)
                                 .kv("policy_tol", opt.policy_tol)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();

    const brar::policy_table policy =
        acquire_policy(shared, opt.horizon, prior, clip_lo, clip_hi, opt.policy_tol);
    brar::quad_options quad;
    quad.abs_tol = opt.stat_tol;
    std::vector<std::vector<double>> images;
    for (const brar::statistic_kind kind : stats)
        images.push_back(brar::statistic_image(opt.horizon, kind, prior, quad));

    brar::report_meta meta{hash, {{"policy_tol", opt.policy_tol}, {"stat_tol", opt.stat_tol}}};
    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        std::vector<std::string> header{"b"};
        for (const brar::statistic_kind kind : stats) {
            const std::string stat = brar::to_string(kind);
            header.push_back("calibrated_" + stat);
            header.push_back("ux_" + stat);
            for (const int s : opt.s_values)
                header.push_back("cxs_" + stat + "_s" + std::to_string(s));
        }
        w.row(header);
        for (const int b : opt.burn_ins) {
            brar::design_spec design = base;
            design.burn_in = b;
            const brar::coefficient_frontier frontier = brar::final_frontier(design, policy);
            std::vector<std::string> row{std::to_string(b)};
            for (std::size_t k = 0; k < stats.size(); ++k) {
                const std::vector<double>& t = images[k];
                brar::test_choice choice;
                choice.statistic = stats[k];
                choice.theta_null = opt.theta_null;
                choice.alpha_upper = opt.alpha_upper;
                choice.alpha_lower = opt.alpha_lower;
                choice.mode = brar::test_mode::calibrated;
                row.push_back(tail_field(brar::build_test(choice, frontier, t).upper));
                choice.mode = brar::test_mode::ux;
                row.push_back(tail_field(brar::build_test(choice, frontier, t).upper));
                choice.mode = brar::test_mode::cxs;
                const brar::test_definition cxs = brar::build_test(choice, frontier, t);
                for (const int s : opt.s_values)
                    row.push_back(tail_field(cxs.upper_by_s[static_cast<std::size_t>(s)]));
            }
            w.row(row);
        }
    });
}

// ------------------------------------------------------------------ sweep --

struct sweep_options {
    int horizon = 60;
    std::vector<int> burn_ins;
    std::vector<std::string> tests{"calibrated"};
    std::vector<std::string> stats{"ppcs"};
    std::vector<std::string> kinds{"rejection"};
    std::string metric;
    std::vector<double> deltas{0.0};
    double phi = 0.1;
    double grid_step = 0.01;
    double theta_null = 0.5;
    double alpha_upper = 0.025;
    double alpha_lower = 0.025;
    double asymptotic_crit = 1.959964;
    std::vector<double> prior{1.0, 1.0};
    std::vector<double> clip{0.0, 1.0};
    double policy_tol = 1e-3;
    double stat_tol = 1e-6;
    std::string out = "sweep.csv";
};

// Cross product of tests and statistics; the asymptotic comparator is only
// meaningful on the Wald scale, so it pairs with Wald even when the
// statistic list holds posterior statistics only.
std::vector<brar::test_choice> build_choices(const std::vector<std::string>& tests,
                                             const std::vector<std::string>& stats,
                                             double theta_null, double alpha_upper,
                                             double alpha_lower, double asymptotic_crit) {
    std::vector<brar::test_choice> choices;
    for (const std::string& test : tests) {
        const brar::test_mode mode = parse_test(test);
        bool emitted = false;
        for (const std::string& stat : stats) {
            const brar::statistic_kind kind = parse_stat(stat);
            if (mode == brar::test_mode::asymptotic && kind == brar::statistic_kind::ppcs) continue;
            brar::test_choice choice;
            choice.mode = mode;
            choice.statistic = kind;
            choice.theta_null = theta_null;
            choice.alpha_upper = alpha_upper;
            choice.alpha_lower = alpha_lower;
            choice.asymptotic_crit = asymptotic_crit;
            choices.push_back(choice);
            emitted = true;
        }
        if (mode == brar::test_mode::asymptotic && !emitted) {
            brar::test_choice choice;
            choice.mode = mode;
            choice.statistic = brar::statistic_kind::wald;
            choice.theta_null = theta_null;
            choice.alpha_upper = alpha_upper;
            choice.alpha_lower = alpha_lower;
            choice.asymptotic_crit = asymptotic_crit;
            choices.push_back(choice);
        }
    }
    return choices;
}

std::vector<std::string> sweep_header(bool with_prior) {
    std::vector<std::string> header;
    if (with_prior) {
        header.push_back("prior_alpha");
        header.push_back("prior_beta");
    }
    for (const char* name : {"design_hash", "horizon", "b", "bp", "test", "statistic", "kind",
                             "delta", "value_avg", "value_min", "argmin_theta_d", "value_max",
                             "argmax_theta_d"})
        header.push_back(name);
    return header;
}

void append_sweep_rows(brar::csv_writer& w, const brar::design_spec& base,
                       const std::vector<brar::oc_row>& rows, bool with_prior) {
    for (const brar::oc_row& row : rows) {
        brar::design_spec design = base;
        design.burn_in = row.burn_in;
        std::vector<std::string> fields;
        if (with_prior) {
            fields.push_back(brar::format_double(base.prior.alpha));
            fields.push_back(brar::format_double(base.prior.beta));
        }
        fields.push_back(brar::hex64(design.hash()));
        fields.push_back(std::to_string(base.horizon));
        fields.push_back(std::to_string(row.burn_in));
        fields.push_back(brar::format_double(row.burn_in_proportion));
        fields.push_back(row.test);
        fields.push_back(row.test.empty() ? std::string() : brar::to_string(row.statistic));
        fields.push_back(brar::to_string(row.kind));
        fields.push_back(brar::format_double(row.delta));
        fields.push_back(brar::format_double(row.average));
        fields.push_back(brar::format_double(row.extrema.min_value));
        fields.push_back(brar::format_double(row.extrema.argmin.d));
        fields.push_back(brar::format_double(row.extrema.max_value));
        fields.push_back(brar::format_double(row.extrema.argmax.d));
        w.row(fields);
    }
}

void run_sweep(const shared_options& shared, sweep_options opt) {
    check_large_gate(opt.horizon, shared.large);
    if (opt.burn_ins.empty()) opt.burn_ins = default_bp_burn_ins(opt.horizon);
    require_burn_ins(opt.burn_ins, opt.horizon);
    const brar::beta_prior prior = prior_of(opt.prior);
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    if (!opt.metric.empty()) {
        const brar::oc_kind extra = parse_metric(opt.metric);
        bool present = false;
        for (const std::string& k : opt.kinds) present = present || parse_kind(k) == extra;
        if (!present) opt.kinds.push_back(brar::to_string(extra));
    }
    std::vector<brar::oc_kind> kinds;
    for (const std::string& k : opt.kinds) kinds.push_back(parse_kind(k));
    const std::vector<brar::test_choice> choices =
        build_choices(opt.tests, opt.stats, opt.theta_null, opt.alpha_upper, opt.alpha_lower,
                      opt.asymptotic_crit);
    if (choices.empty()) throw brar::config_error("no usable test/statistic combination");

    brar::design_spec base;
    base.horizon = opt.horizon;
    base.prior = prior;
    base.clip_lo = clip_lo;
    base.clip_hi = clip_hi;
    base.policy_tol = opt.policy_tol;
    base.stat_tol = opt.stat_tol;
    base.validate();

    const std::string hash = canonical_config("sweep")
                                 .kv("n", opt.horizon)
                                 .kv("burn_in", opt.burn_ins)
                                 .kv("tests", opt.tests)
                                 .kv("stats", opt.stats)
                                 .kv("kinds", opt.kinds)
                                 .kv("deltas", opt.deltas)
                                 .kv("phi", opt.phi)
                                 .kv("grid_step", opt.grid_step)
                                 .kv("theta_null", opt.theta_null)
                                 .kv("alpha_upper", opt.alpha_upper)
                                 .kv("alpha_lower", opt.alpha_lower)
                                 .kv("asymptotic_crit", opt.asymptotic_crit)
                                 .kv("prior", opt.prior)
                                 .kv("clip", opt.clip)
                                 .kv("policy_tol", opt.policy_tol)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();

    const brar::policy_table policy =
        acquire_policy(shared, opt.horizon, prior, clip_lo, clip_hi, opt.policy_tol);
    const std::vector<brar::oc_row> rows = brar::burnin_sweep(
        base, policy, opt.burn_ins, choices, kinds, opt.deltas, opt.phi, opt.grid_step);

    brar::report_meta meta{hash, {{"policy_tol", opt.policy_tol}, {"stat_tol", opt.stat_tol}}};
    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        w.row(sweep_header(false));
        append_sweep_rows(w, base, rows, false);
    });
}

// ------------------------------------------------------------------- pobp --

struct pobp_options {
    int horizon = 20;
    std::string test = "ux";
    std::string stat = "ppcs";
    double grid_step = 0.05;
    double theta_null = 0.5;
    double alpha_upper = 0.025;
    double alpha_lower = 0.025;
    double asymptotic_crit = 1.959964;
    std::vector<double> prior{1.0, 1.0};
    std::vector<double> clip{0.0, 1.0};
    double policy_tol = 1e-3;
    double stat_tol = 1e-6;
    std::string out = "pobp.csv";
};

void run_pobp(const shared_options& shared, pobp_options opt) {
    check_large_gate(opt.horizon, shared.large);
    const brar::beta_prior prior = prior_of(opt.prior);
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    if (!(opt.grid_step > 0.0 && opt.grid_step <= 0.5))
        throw brar::config_error("grid step must lie in (0, 0.5]");

    brar::test_choice choice;
    choice.mode = parse_test(opt.test);
    choice.statistic = parse_stat(opt.stat);
    if (choice.mode == brar::test_mode::asymptotic &&
        choice.statistic == brar::statistic_kind::ppcs)
        choice.statistic = brar::statistic_kind::wald;
    choice.theta_null = opt.theta_null;
    choice.alpha_upper = opt.alpha_upper;
    choice.alpha_lower = opt.alpha_lower;
    choice.asymptotic_crit = opt.asymptotic_crit;

    brar::design_spec base;
    base.horizon = opt.horizon;
    base.prior = prior;
    base.clip_lo = clip_lo;
    base.clip_hi = clip_hi;
    base.policy_tol = opt.policy_tol;
    base.stat_tol = opt.stat_tol;
    base.validate();

    std::vector<brar::theta_pair> grid;
    const int steps = static_cast<int>(std::floor(1.0 / opt.grid_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            if (i == j) continue;
            grid.push_back({std::min(i * opt.grid_step, 1.0), std::min(j * opt.grid_step, 1.0)});
        }
    }

    const std::string hash = canonical_config("pobp")
                                 .kv("n", opt.horizon)
                                 .kv("test", opt.test)
                                 .kv("stat", opt.stat)
                                 .kv("grid_step", opt.grid_step)
                                 .kv("theta_null", opt.theta_null)
                                 .kv("alpha_upper", opt.alpha_upper)
                                 .kv("alpha_lower", opt.alpha_lower)
                                 .kv("asymptotic_crit", opt.asymptotic_crit)
                                 .kv("prior", opt.prior)
                                 .kv("clip", opt.clip)
                                 .kv("policy_tol", opt.policy_tol)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();

    const brar::policy_table policy =
        acquire_policy(shared, opt.horizon, prior, clip_lo, clip_hi, opt.policy_tol);
    const std::vector<brar::pobp_entry> entries =
        brar::optimal_burnin_map(base, policy, choice, grid);

    brar::report_meta meta{hash, {{"policy_tol", opt.policy_tol}, {"stat_tol", opt.stat_tol}}};
    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        w.row("theta_c", "theta_d", "test", "statistic", "b_star", "bp_star");
        for (const brar::pobp_entry& e : entries) {
            w.row(e.theta.c, e.theta.d, brar::to_string(choice.mode),
                  brar::to_string(choice.statistic), e.b_star,
                  opt.horizon > 0 ? 2.0 * e.b_star / opt.horizon : 0.0);
        }
    });
}

// ----------------------------------------------------------------- priors --

struct priors_options {
    int horizon = 60;
    std::vector<int> burn_ins;
    std::vector<double> priors{1.0, 1.0, 0.01, 0.01, 0.5, 0.5, 1.4, 0.6, 0.6, 1.4};
    std::vector<std::string> tests{"calibrated", "cxs", "ux", "asymptotic"};
    std::vector<std::string> stats{"ppcs"};
    std::vector<std::string> kinds{"rejection", "epasa", "bias"};
    std::vector<double> deltas{0.0, 0.1, 0.2, 0.4};
    double phi = 0.1;
    double grid_step = 0.01;
    double theta_null = 0.5;
    double alpha_upper = 0.025;
    double alpha_lower = 0.025;
    double asymptotic_crit = 1.959964;
    std::vector<double> clip{0.0, 1.0};
    double policy_tol = 1e-3;
    double stat_tol = 1e-6;
    std::string out = "priors.csv";
};

void run_priors(const shared_options& shared, priors_options opt) {
    check_large_gate(opt.horizon, shared.large);
    if (opt.burn_ins.empty()) {
        for (const double bp : {0.0, 0.2, 0.5, 0.8, 1.0}) {
            const int b = static_cast<int>(std::llround(bp * opt.horizon / 2.0));
            if (opt.burn_ins.empty() || opt.burn_ins.back() != b) opt.burn_ins.push_back(b);
        }
    }
    require_burn_ins(opt.burn_ins, opt.horizon);
    if (opt.priors.empty() || opt.priors.size() % 2 != 0)
        throw brar::config_error("priors must be a nonempty list of alpha,beta pairs");
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    std::vector<brar::oc_kind> kinds;
    for (const std::string& k : opt.kinds) kinds.push_back(parse_kind(k));
    const std::vector<brar::test_choice> choices =
        build_choices(opt.tests, opt.stats, opt.theta_null, opt.alpha_upper, opt.alpha_lower,
                      opt.asymptotic_crit);
    if (choices.empty()) throw brar::config_error("no usable test/statistic combination");

    const std::string hash = canonical_config("priors")
                                 .kv("n", opt.horizon)
                                 .kv("burn_in", opt.burn_ins)
                                 .kv("priors", opt.priors)
                                 .kv("tests", opt.tests)
                                 .kv("stats", opt.stats)
                                 .kv("kinds", opt.kinds)
                                 .kv("deltas", opt.deltas)
                                 .kv("phi", opt.phi)
                                 .kv("grid_step", opt.grid_step)
                                 .kv("theta_null", opt.theta_null)
                                 .kv("alpha_upper", opt.alpha_upper)
                                 .kv("alpha_lower", opt.alpha_lower)
                                 .kv("asymptotic_crit", opt.asymptotic_crit)
                                 .kv("clip", opt.clip)
                                 .kv("policy_tol", opt.policy_tol)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();

    struct panel {
        brar::design_spec base;
        std::vector<brar::oc_row> rows;
    };
    std::vector<panel> panels;
    for (std::size_t p = 0; p + 1 < opt.priors.size(); p += 2) {
        const brar::beta_prior prior = prior_of({opt.priors[p], opt.priors[p + 1]});
        brar::design_spec base;
        base.horizon = opt.horizon;
        base.prior = prior;
        base.clip_lo = clip_lo;
        base.clip_hi = clip_hi;
        base.policy_tol = opt.policy_tol;
        base.stat_tol = opt.stat_tol;
        base.validate();
        const brar::policy_table policy =
            acquire_policy(shared, opt.horizon, prior, clip_lo, clip_hi, opt.policy_tol);
        panels.push_back({base, brar::burnin_sweep(base, policy, opt.burn_ins, choices, kinds,
                                                   opt.deltas, opt.phi, opt.grid_step)});
    }

    brar::report_meta meta{hash, {{"policy_tol", opt.policy_tol}, {"stat_tol", opt.stat_tol}}};
    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        w.row(sweep_header(true));
        for (const panel& p : panels) append_sweep_rows(w, p.base, p.rows, true);
    });
}

// ----------------------------------------------------------------- arrest --

struct arrest_options {
    int horizon = 150;
    int block = 30;
    std::vector<int> burn_ins{15, 30, 45, 60, 75};
    std::string ost_set = "both";
    double b15_ost = 0.986;
    double alpha = 0.05;
    double theta_null = 0.12;
    double null_lo = 0.02;
    double null_hi = 0.22;
    double null_step = 0.01;
    double delta = 0.25;
    std::string block_rule = "deterministic";
    std::string pniwd_scope = "full";
    double phi = 0.1;
    std::vector<double> clip{0.25, 0.75};
    std::vector<double> prior{1.0, 1.0};
    double stat_tol = 1e-6;
    std::string out = "arrest.csv";
};

void run_arrest(const shared_options& shared, arrest_options opt) {
    (void)shared;
    require_burn_ins(opt.burn_ins, opt.horizon);
    if (opt.ost_set != "c" && opt.ost_set != "ux" && opt.ost_set != "both")
        throw brar::config_error("ost-set must be c, ux, or both");
    const brar::beta_prior prior = prior_of(opt.prior);
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    const brar::block_rule rule = parse_block_rule(opt.block_rule);
    const brar::pniwd_scope scope = parse_scope(opt.pniwd_scope);
    if (!(opt.null_step > 0.0) || opt.null_hi < opt.null_lo)
        throw brar::config_error("null grid bounds must satisfy lo <= hi with positive step");
    std::vector<double> null_grid;
    const int null_count =
        static_cast<int>(std::floor((opt.null_hi - opt.null_lo) / opt.null_step + 1e-9)) + 1;
    for (int i = 0; i < null_count; ++i) null_grid.push_back(opt.null_lo + i * opt.null_step);

    const std::string hash = canonical_config("arrest")
                                 .kv("n", opt.horizon)
                                 .kv("block", opt.block)
                                 .kv("burn_in", opt.burn_ins)
                                 .kv("ost_set", opt.ost_set)
                                 .kv("b15_ost", opt.b15_ost)
                                 .kv("alpha", opt.alpha)
                                 .kv("theta_null", opt.theta_null)
                                 .kv("null_lo", opt.null_lo)
                                 .kv("null_hi", opt.null_hi)
                                 .kv("null_step", opt.null_step)
                                 .kv("delta", opt.delta)
                                 .kv("block_rule", opt.block_rule)
                                 .kv("pniwd_scope", opt.pniwd_scope)
                                 .kv("phi", opt.phi)
                                 .kv("clip", opt.clip)
                                 .kv("prior", opt.prior)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();

    brar::ppcs_memo memo(prior, opt.stat_tol);

    struct arrest_row {
        int b;
        std::string ost_kind;
        double ost, mepasa, mpower, mtnr, mpniwd;
    };
    std::vector<arrest_row> rows;
    for (const int b : opt.burn_ins) {
        brar::gs_design_spec design;
        design.horizon = opt.horizon;
        design.block = opt.block;
        design.burn_in = b;
        design.prior = prior;
        design.clip_lo = clip_lo;
        design.clip_hi = clip_hi;
        design.rule = rule;
        design.stat_tol = opt.stat_tol;
        design.ost = 0.75;  // placeholder; set per threshold below
        design.validate();

        std::vector<std::pair<std::string, double>> thresholds;
        if (opt.ost_set != "ux") {
            const double ost = (b == 15 && opt.b15_ost > 0.0)
                                   ? opt.b15_ost
                                   : brar::calibrate_ost(design, opt.theta_null, opt.alpha, &memo);
            thresholds.emplace_back("c", ost);
        }
        if (opt.ost_set != "c")
            thresholds.emplace_back("ux", brar::ux_ost(design, null_grid, opt.alpha, &memo));

        for (const auto& [kind, ost] : thresholds) {
            design.ost = ost;
            const brar::gs_kernel kernel = brar::build_gs_kernel(design, memo);
            const double mtnr = brar::gs_mtnr(kernel, null_grid);
            double mepasa = 1.0;
            double mpower = 1.0;
            double mpniwd = 1.0;
            for (const double tc : null_grid) {
                const brar::gs_report r = brar::gs_ocs(kernel, tc, tc + opt.delta, opt.phi, scope);
                mepasa = std::min(mepasa, r.epasa);
                mpower = std::min(mpower, r.rejection);
                mpniwd = std::min(mpniwd, r.pniwd);
            }
            rows.push_back({b, kind, ost, mepasa, mpower, mtnr, mpniwd});
        }
    }

    brar::report_meta meta{hash, {{"stat_tol", opt.stat_tol}}};
    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        w.row("b", "ost_kind", "ost", "mepasa", "mpower", "mtnr", "mpniwd");
        for (const arrest_row& r : rows)
            w.row(r.b, r.ost_kind, r.ost, r.mepasa, r.mpower, r.mtnr, r.mpniwd);
    });
}

// --------------------------------------------------------------- mc-check --

struct mc_check_options {
    int horizon = 20;
    int burn_in = 5;
    double theta_c = 0.3;
    double theta_d = 0.55;
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    std::string rule = "alternating";
    std::vector<std::string> kinds{"rejection", "epasa", "piwd", "bias"};
    std::string test = "calibrated";
    std::string stat = "ppcs";
    int random = 0;
    bool gs = false;
    int block = 4;
    double ost = 0.9;
    std::string block_rule = "deterministic";
    std::string pniwd_scope = "full";
    double phi = 0.1;
    std::vector<double> clip{0.0, 1.0};
    std::vector<double> prior{1.0, 1.0};
    double policy_tol = 1e-3;
    double stat_tol = 1e-6;
    std::string out = "mc_check.csv";
};

struct mc_check_row {
    int horizon, burn_in;
    double theta_c, theta_d;
    std::string kind, test;
    double exact, estimate, se, z;
    bool within;
};

mc_check_row make_row(int horizon, int burn_in, double tc, double td, std::string kind,
                      std::string test, double exact, const brar::mc_result& mc) {
    const double diff = mc.estimate - exact;
    const double z = diff == 0.0 ? 0.0 : diff / mc.se;
    return {horizon, burn_in, tc,      td, std::move(kind), std::move(test),
            exact,   mc.estimate, mc.se, z,  std::abs(diff) <= 3.5 * mc.se};
}

void run_mc_check(const shared_options& shared, mc_check_options opt) {
    check_large_gate(opt.horizon, shared.large);
    const brar::beta_prior prior = prior_of(opt.prior);
    const auto [clip_lo, clip_hi] = clip_of(opt.clip);
    const brar::burn_in_rule rule = parse_rule(opt.rule);

    const std::string hash = canonical_config("mc-check")
                                 .kv("n", opt.horizon)
                                 .kv("burn_in", opt.burn_in)
                                 .kv("theta_c", opt.theta_c)
                                 .kv("theta_d", opt.theta_d)
                                 .kv("reps", opt.reps)
                                 .kv("seed", opt.seed)
                                 .kv("rule", opt.rule)
                                 .kv("kinds", opt.kinds)
                                 .kv("test", opt.test)
                                 .kv("stat", opt.stat)
                                 .kv("random", opt.random)
                                 .kv("gs", opt.gs)
                                 .kv("block", opt.block)
                                 .kv("ost", opt.ost)
                                 .kv("block_rule", opt.block_rule)
                                 .kv("pniwd_scope", opt.pniwd_scope)
                                 .kv("phi", opt.phi)
                                 .kv("clip", opt.clip)
                                 .kv("prior", opt.prior)
                                 .kv("policy_tol", opt.policy_tol)
                                 .kv("stat_tol", opt.stat_tol)
                                 .hash();
    brar::report_meta meta{hash, {{"policy_tol", opt.policy_tol}, {"stat_tol", opt.stat_tol}}};

    std::vector<mc_check_row> rows;

    if (opt.gs) {
        brar::gs_design_spec design;
        design.horizon = opt.horizon;
        design.block = opt.block;
        design.burn_in = opt.burn_in;
        design.prior = prior;
        design.clip_lo = clip_lo;
        design.clip_hi = clip_hi;
        design.ost = opt.ost;
        design.rule = parse_block_rule(opt.block_rule);
        design.stat_tol = opt.stat_tol;
        design.validate();
        const brar::pniwd_scope scope = parse_scope(opt.pniwd_scope);
        brar::ppcs_memo memo(prior, opt.stat_tol);
        const brar::gs_kernel kernel = brar::build_gs_kernel(design, memo);
        const brar::gs_report exact =
            brar::gs_ocs(kernel, opt.theta_c, opt.theta_d, opt.phi, scope);
        brar::sim_config cfg;
        cfg.theta_c = opt.theta_c;
        cfg.theta_d = opt.theta_d;
        cfg.replications = opt.reps;
        cfg.seed = opt.seed;
        const brar::mc_gs_report mc = brar::mc_gs_ocs(design, memo, cfg, opt.phi, scope);
        rows.push_back(make_row(opt.horizon, opt.burn_in, opt.theta_c, opt.theta_d, "rejection",
                                "", exact.rejection, mc.rejection));
        rows.push_back(make_row(opt.horizon, opt.burn_in, opt.theta_c, opt.theta_d, "epasa", "",
                                exact.epasa, mc.epasa));
        rows.push_back(make_row(opt.horizon, opt.burn_in, opt.theta_c, opt.theta_d, "pniwd", "",
                                exact.pniwd, mc.pniwd));
        rows.push_back(make_row(opt.horizon, opt.burn_in, opt.theta_c, opt.theta_d,
                                "expected_size", "", exact.expected_size, mc.expected_size));
    } else {
        struct case_spec {
            int horizon, burn_in;
            double tc, td;
        };
        std::vector<case_spec> cases;
        if (opt.random > 0) {
            brar::xoshiro256pp rng(opt.seed);
            for (int k = 0; k < opt.random; ++k) {
                const int horizon = 6 + static_cast<int>(rng.below(35));  // 6..40
                const int burn_in = static_cast<int>(rng.below(horizon / 2 + 1));
                const int tc = 1 + static_cast<int>(rng.below(19));
                int td = 1 + static_cast<int>(rng.below(19));
                while (td == tc) td = 1 + static_cast<int>(rng.below(19));
                cases.push_back({horizon, burn_in, tc * 0.05, td * 0.05});
            }
        } else {
            cases.push_back({opt.horizon, opt.burn_in, opt.theta_c, opt.theta_d});
        }

        brar::test_choice choice;
        choice.mode = parse_test(opt.test);
        choice.statistic = parse_stat(opt.stat);
        std::map<int, std::vector<double>> images;
        for (const case_spec& c : cases) {
            check_large_gate(c.horizon, shared.large);
            brar::design_spec design;
            design.horizon = c.horizon;
            design.burn_in = c.burn_in;
            design.prior = prior;
            design.clip_lo = clip_lo;
            design.clip_hi = clip_hi;
            design.policy_tol = opt.policy_tol;
            design.stat_tol = opt.stat_tol;
            design.validate();
            const brar::policy_table policy =
                acquire_policy(shared, c.horizon, prior, clip_lo, clip_hi, opt.policy_tol);
            const brar::coefficient_frontier frontier = brar::final_frontier(design, policy);
            brar::sim_config cfg;
            cfg.theta_c = c.tc;
            cfg.theta_d = c.td;
            cfg.replications = opt.reps;
            cfg.seed = opt.seed;
            cfg.rule = rule;

            for (const std::string& kind_name : opt.kinds) {
                const brar::oc_kind kind = parse_kind(kind_name);
                if (kind == brar::oc_kind::piwd && c.tc == c.td)
                    throw brar::config_error("piwd needs theta_c != theta_d");
                brar::oc_spec spec;
                spec.kind = kind;
                spec.phi = opt.phi;
                brar::test_definition def;
                std::string test_name;
                if (kind == brar::oc_kind::rejection_rate) {
                    auto it = images.find(c.horizon);
                    if (it == images.end()) {
                        brar::quad_options quad;
                        quad.abs_tol = opt.stat_tol;
                        it = images
                                 .emplace(c.horizon, brar::statistic_image(c.horizon,
                                                                           choice.statistic, prior,
                                                                           quad))
                                 .first;
                    }
                    def = brar::build_test(choice, frontier, it->second);
                    spec.test = &def;
                    spec.statistic = &it->second;
                    test_name = brar::to_string(choice.mode);
                }
                const double exact = brar::oc_point(frontier, spec, {c.tc, c.td});
                const brar::mc_result mc = brar::mc_estimate(design, policy, spec, cfg);
                rows.push_back(make_row(c.horizon, c.burn_in, c.tc, c.td,
                                        brar::to_string(kind), test_name, exact, mc));
            }
        }
    }

    write_report(opt.out, meta, [&](brar::csv_writer& w) {
        w.row("horizon", "b", "theta_c", "theta_d", "kind", "test", "exact", "estimate", "se",
              "z", "within_3_5_se");
        for (const mc_check_row& r : rows)
            w.row(r.horizon, r.burn_in, r.theta_c, r.theta_d, r.kind, r.test, r.exact, r.estimate,
                  r.se, r.z, r.within ? 1 : 0);
    });
}

}  // namespace

// ------------------------------------------------------------------- main --

int main(int argc, char** argv) {
    CLI::App app{"Exact operating characteristics of two-arm Bayesian response-adaptive trials"};
    app.require_subcommand(1);

    shared_options shared;
    app.add_option("--config", shared.config_path, "JSON configuration document");
    app.add_option("--cache-dir", shared.cache_dir,
                   "Directory for policy-table caches (or set BRAR_CACHE_DIR)");
    app.add_flag("--large", shared.large,
                 "Allow trials beyond 100 participants (a 240-participant pass takes minutes "
                 "and roughly a gigabyte)");
    app.add_option("--workers", shared.workers, "Reserved; evaluation is single-threaded")
        ->check(CLI::PositiveNumber);

    critvals_options cv;
    CLI::App* cv_cmd = app.add_subcommand("critvals", "Critical-value tables per burn-in");
    cv_cmd->fallthrough();
    cv_cmd->add_option("--n,--horizon", cv.horizon, "Trial size");
    cv_cmd->add_option("--burn-in", cv.burn_ins, "Burn-in lengths (default: all)")->delimiter(',');
    cv_cmd->add_option("--stat", cv.stats, "Statistics: ppcs, wald, wald-plugin")->delimiter(',');
    cv_cmd->add_option("--s-values", cv.s_values, "Conditional totals for the cxs columns")
        ->delimiter(',');
    cv_cmd->add_option("--theta-null", cv.theta_null, "Calibration null point");
    cv_cmd->add_option("--alpha-upper", cv.alpha_upper, "Upper-tail level");
    cv_cmd->add_option("--alpha-lower", cv.alpha_lower, "Lower-tail level");
    cv_cmd->add_option("--prior", cv.prior, "Beta prior alpha beta")->expected(2);
    cv_cmd->add_option("--clip", cv.clip, "Allocation clip bounds lo hi")->expected(2);
    cv_cmd->add_option("--policy-tol", cv.policy_tol, "Allocation quadrature tolerance");
    cv_cmd->add_option("--stat-tol", cv.stat_tol, "Statistic quadrature tolerance");
    cv_cmd->add_option("--out", cv.out, "Output CSV path");

    sweep_options sw;
    CLI::App* sw_cmd = app.add_subcommand("sweep", "Operating characteristics across burn-ins");
    sw_cmd->fallthrough();
    sw_cmd->add_option("--n,--horizon", sw.horizon, "Trial size");
    sw_cmd->add_option("--burn-in", sw.burn_ins, "Burn-in lengths (default: tenths of n/2)")
        ->delimiter(',');
    sw_cmd->add_option("--test", sw.tests, "Tests: calibrated, ux, cxs, asymptotic")
        ->delimiter(',');
    sw_cmd->add_option("--stat", sw.stats, "Statistics: ppcs, wald, wald-plugin")->delimiter(',');
    sw_cmd->add_option("--kind", sw.kinds, "Kinds: rejection, epasa, piwd, bias")->delimiter(',');
    sw_cmd->add_option("--metric", sw.metric, "Shorthand kind (max-rejection adds rejection)");
    sw_cmd->add_option("--delta", sw.deltas, "Treatment-effect slices")->delimiter(',');
    sw_cmd->add_option("--phi", sw.phi, "Imbalance threshold");
    sw_cmd->add_option("--grid-step", sw.grid_step, "Theta grid step");
    sw_cmd->add_option("--theta-null", sw.theta_null, "Calibration null point");
    sw_cmd->add_option("--alpha-upper", sw.alpha_upper, "Upper-tail level");
    sw_cmd->add_option("--alpha-lower", sw.alpha_lower, "Lower-tail level");
    sw_cmd->add_option("--asymptotic-crit", sw.asymptotic_crit, "Fixed two-sided critical value");
    sw_cmd->add_option("--prior", sw.prior, "Beta prior alpha beta")->expected(2);
    sw_cmd->add_option("--clip", sw.clip, "Allocation clip bounds lo hi")->expected(2);
    sw_cmd->add_option("--policy-tol", sw.policy_tol, "Allocation quadrature tolerance");
    sw_cmd->add_option("--stat-tol", sw.stat_tol, "Statistic quadrature tolerance");
    sw_cmd->add_option("--out", sw.out, "Output CSV path");

    pobp_options pb;
    CLI::App* pb_cmd = app.add_subcommand("pobp", "Optimal burn-in map over a theta grid");
    pb_cmd->fallthrough();
    pb_cmd->add_option("--n,--horizon", pb.horizon, "Trial size");
    pb_cmd->add_option("--test", pb.test, "Test: calibrated, ux, cxs, asymptotic");
    pb_cmd->add_option("--stat", pb.stat, "Statistic: ppcs, wald, wald-plugin");
    pb_cmd->add_option("--grid-step", pb.grid_step, "Theta grid step");
    pb_cmd->add_option("--theta-null", pb.theta_null, "Calibration null point");
    pb_cmd->add_option("--alpha-upper", pb.alpha_upper, "Upper-tail level");
    pb_cmd->add_option("--alpha-lower", pb.alpha_lower, "Lower-tail level");
    pb_cmd->add_option("--asymptotic-crit", pb.asymptotic_crit, "Fixed two-sided critical value");
    pb_cmd->add_option("--prior", pb.prior, "Beta prior alpha beta")->expected(2);
    pb_cmd->add_option("--clip", pb.clip, "Allocation clip bounds lo hi")->expected(2);
    pb_cmd->add_option("--policy-tol", pb.policy_tol, "Allocation quadrature tolerance");
    pb_cmd->add_option("--stat-tol", pb.stat_tol, "Statistic quadrature tolerance");
    pb_cmd->add_option("--out", pb.out, "Output CSV path");

    priors_options pr;
    CLI::App* pr_cmd = app.add_subcommand("priors", "Prior sensitivity panels");
    pr_cmd->fallthrough();
    pr_cmd->add_option("--n,--horizon", pr.horizon, "Trial size");
    pr_cmd->add_option("--burn-in", pr.burn_ins, "Burn-in lengths")->delimiter(',');
    pr_cmd->add_option("--priors", pr.priors, "Flattened alpha,beta pairs")->delimiter(',');
    pr_cmd->add_option("--test", pr.tests, "Tests: calibrated, ux, cxs, asymptotic")
        ->delimiter(',');
    pr_cmd->add_option("--stat", pr.stats, "Statistics: ppcs, wald, wald-plugin")->delimiter(',');
    pr_cmd->add_option("--kind", pr.kinds, "Kinds: rejection, epasa, piwd, bias")->delimiter(',');
    pr_cmd->add_option("--delta", pr.deltas, "Treatment-effect slices")->delimiter(',');
    pr_cmd->add_option("--phi", pr.phi, "Imbalance threshold");
    pr_cmd->add_option("--grid-step", pr.grid_step, "Theta grid step");
    pr_cmd->add_option("--theta-null", pr.theta_null, "Calibration null point");
    pr_cmd->add_option("--alpha-upper", pr.alpha_upper, "Upper-tail level");
    pr_cmd->add_option("--alpha-lower", pr.alpha_lower, "Lower-tail level");
    pr_cmd->add_option("--asymptotic-crit", pr.asymptotic_crit, "Fixed two-sided critical value");
    pr_cmd->add_option("--clip", pr.clip, "Allocation clip bounds lo hi")->expected(2);
    pr_cmd->add_option("--policy-tol", pr.policy_tol, "Allocation quadrature tolerance");
    pr_cmd->add_option("--stat-tol", pr.stat_tol, "Statistic quadrature tolerance");
    pr_cmd->add_option("--out", pr.out, "Output CSV path");

    arrest_options ar;
    CLI::App* ar_cmd = app.add_subcommand("arrest", "Group-sequential design summaries");
    ar_cmd->fallthrough();
    ar_cmd->add_option("--n,--horizon", ar.horizon, "Maximum trial size");
    ar_cmd->add_option("--block", ar.block, "Block size");
    ar_cmd->add_option("--burn-in", ar.burn_ins, "Burn-in menu")->delimiter(',');
    ar_cmd->add_option("--ost-set", ar.ost_set, "Thresholds to evaluate: c, ux, both");
    ar_cmd->add_option("--b15-ost", ar.b15_ost,
                       "Fixed calibrated threshold used at b=15 (nonpositive recalibrates)");
    ar_cmd->add_option("--alpha", ar.alpha, "Type I error budget");
    ar_cmd->add_option("--theta-null", ar.theta_null, "Calibration null success rate");
    ar_cmd->add_option("--null-lo", ar.null_lo, "Null grid lower bound");
    ar_cmd->add_option("--null-hi", ar.null_hi, "Null grid upper bound");
    ar_cmd->add_option("--null-step", ar.null_step, "Null grid step");
    ar_cmd->add_option("--delta", ar.delta, "Alternative effect size");
    ar_cmd->add_option("--block-rule", ar.block_rule, "deterministic or binomial");
    ar_cmd->add_option("--pniwd-scope", ar.pniwd_scope, "full or realized");
    ar_cmd->add_option("--phi", ar.phi, "Imbalance threshold");
    ar_cmd->add_option("--clip", ar.clip, "Allocation clip bounds lo hi")->expected(2);
    ar_cmd->add_option("--prior", ar.prior, "Beta prior alpha beta")->expected(2);
    ar_cmd->add_option("--stat-tol", ar.stat_tol, "Statistic quadrature tolerance");
    ar_cmd->add_option("--out", ar.out, "Output CSV path");

    mc_check_options mc;
    CLI::App* mc_cmd = app.add_subcommand("mc-check", "Monte Carlo agreement with the exact engine");
    mc_cmd->fallthrough();
    mc_cmd->add_option("--n,--horizon", mc.horizon, "Trial size");
    mc_cmd->add_option("--burn-in", mc.burn_in, "Burn-in length");
    mc_cmd->add_option("--theta-c", mc.theta_c, "Control success rate");
    mc_cmd->add_option("--theta-d", mc.theta_d, "Developmental success rate");
    mc_cmd->add_option("--reps", mc.reps, "Replications");
    mc_cmd->add_option("--seed", mc.seed, "Base seed");
    mc_cmd->add_option("--rule", mc.rule, "Burn-in order: alternating or random");
    mc_cmd->add_option("--kind", mc.kinds, "Kinds: rejection, epasa, piwd, bias")->delimiter(',');
    mc_cmd->add_option("--test", mc.test, "Test for rejection rows");
    mc_cmd->add_option("--stat", mc.stat, "Statistic for rejection rows");
    mc_cmd->add_option("--random", mc.random, "Check this many seeded random designs instead");
    mc_cmd->add_flag("--gs", mc.gs, "Check the group-sequential engine instead");
    mc_cmd->add_option("--block", mc.block, "Block size (with --gs)");
    mc_cmd->add_option("--ost", mc.ost, "Stopping threshold (with --gs)");
    mc_cmd->add_option("--block-rule", mc.block_rule, "deterministic or binomial (with --gs)");
    mc_cmd->add_option("--pniwd-scope", mc.pniwd_scope, "full or realized (with --gs)");
    mc_cmd->add_option("--phi", mc.phi, "Imbalance threshold");
    mc_cmd->add_option("--clip", mc.clip, "Allocation clip bounds lo hi")->expected(2);
    mc_cmd->add_option("--prior", mc.prior, "Beta prior alpha beta")->expected(2);
    mc_cmd->add_option("--policy-tol", mc.policy_tol, "Allocation quadrature tolerance");
    mc_cmd->add_option("--stat-tol", mc.stat_tol, "Statistic quadrature tolerance");
    mc_cmd->add_option("--out", mc.out, "Output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const json config = load_config(shared.config_path);
        try {
            if (app.get_option("--cache-dir")->count() == 0 && config.contains("cache_dir"))
                shared.cache_dir = config.at("cache_dir").get<std::string>();
            if (app.get_option("--large")->count() == 0 && config.contains("large"))
                shared.large = config.at("large").get<bool>();
            if (app.get_option("--workers")->count() == 0 && config.contains("workers"))
                shared.workers = config.at("workers").get<int>();
        } catch (const json::exception& e) {
            throw brar::config_error(std::string("config field: ") + e.what());
        }
        if (shared.cache_dir.empty()) {
            if (const char* env = std::getenv("BRAR_CACHE_DIR")) shared.cache_dir = env;
        }

        if (cv_cmd->parsed()) {
            const option_overlay o(cv_cmd, config);
            o.fill("--n", "n", cv.horizon);
            o.fill("--burn-in", "burn_in", cv.burn_ins);
            o.fill("--stat", "stats", cv.stats);
            o.fill("--s-values", "s_values", cv.s_values);
            o.fill("--theta-null", "theta_null", cv.theta_null);
            o.fill("--alpha-upper", "alpha_upper", cv.alpha_upper);
            o.fill("--alpha-lower", "alpha_lower", cv.alpha_lower);
            o.fill("--prior", "prior", cv.prior);
            o.fill("--clip", "clip", cv.clip);
            o.fill("--policy-tol", "policy_tol", cv.policy_tol);
            o.fill("--stat-tol", "stat_tol", cv.stat_tol);
            o.fill("--out", "out", cv.out);
            run_critvals(shared, cv);
        } else if (sw_cmd->parsed()) {
            const option_overlay o(sw_cmd, config);
            o.fill("--n", "n", sw.horizon);
            o.fill("--burn-in", "burn_in", sw.burn_ins);
            o.fill("--test", "tests", sw.tests);
            o.fill("--stat", "stats", sw.stats);
            o.fill("--kind", "kinds", sw.kinds);
            o.fill("--metric", "metric", sw.metric);
            o.fill("--delta", "deltas", sw.deltas);
            o.fill("--phi", "phi", sw.phi);
            o.fill("--grid-step", "grid_step", sw.grid_step);
            o.fill("--theta-null", "theta_null", sw.theta_null);
            o.fill("--alpha-upper", "alpha_upper", sw.alpha_upper);
            o.fill("--alpha-lower", "alpha_lower", sw.alpha_lower);
            o.fill("--asymptotic-crit", "asymptotic_crit", sw.asymptotic_crit);
            o.fill("--prior", "prior", sw.prior);
            o.fill("--clip", "clip", sw.clip);
            o.fill("--policy-tol", "policy_tol", sw.policy_tol);
            o.fill("--stat-tol", "stat_tol", sw.stat_tol);
            o.fill("--out", "out", sw.out);
            run_sweep(shared, sw);
        } else if (pb_cmd->parsed()) {
            const option_overlay o(pb_cmd, config);
            o.fill("--n", "n", pb.horizon);
            o.fill("--test", "test", pb.test);
            o.fill("--stat", "stat", pb.stat);
            o.fill("--grid-step", "grid_step", pb.grid_step);
            o.fill("--theta-null", "theta_null", pb.theta_null);
            o.fill("--alpha-upper", "alpha_upper", pb.alpha_upper);
            o.fill("--alpha-lower", "alpha_lower", pb.alpha_lower);
            o.fill("--asymptotic-crit", "asymptotic_crit", pb.asymptotic_crit);
            o.fill("--prior", "prior", pb.prior);
            o.fill("--clip", "clip", pb.clip);
            o.fill("--policy-tol", "policy_tol", pb.policy_tol);
            o.fill("--stat-tol", "stat_tol", pb.stat_tol);
            o.fill("--out", "out", pb.out);
            run_pobp(shared, pb);
        } else if (pr_cmd->parsed()) {
            const option_overlay o(pr_cmd, config);
            o.fill("--n", "n", pr.horizon);
            o.fill("--burn-in", "burn_in", pr.burn_ins);
            o.fill("--priors", "priors", pr.priors);
            o.fill("--test", "tests", pr.tests);
            o.fill("--stat", "stats", pr.stats);
            o.fill("--kind", "kinds", pr.kinds);
            o.fill("--delta", "deltas", pr.deltas);
            o.fill("--phi", "phi", pr.phi);
            o.fill("--grid-step", "grid_step", pr.grid_step);
            o.fill("--theta-null", "theta_null", pr.theta_null);
            o.fill("--alpha-upper", "alpha_upper", pr.alpha_upper);
            o.fill("--alpha-lower", "alpha_lower", pr.alpha_lower);
            o.fill("--asymptotic-crit", "asymptotic_crit", pr.asymptotic_crit);
            o.fill("--clip", "clip", pr.clip);
            o.fill("--policy-tol", "policy_tol", pr.policy_tol);
            o.fill("--stat-tol", "stat_tol", pr.stat_tol);
            o.fill("--out", "out", pr.out);
            run_priors(shared, pr);
        } else if (ar_cmd->parsed()) {
            const option_overlay o(ar_cmd, config);
            o.fill("--n", "n", ar.horizon);
            o.fill("--block", "block", ar.block);
            o.fill("--burn-in", "burn_in", ar.burn_ins);
            o.fill("--ost-set", "ost_set", ar.ost_set);
            o.fill("--b15-ost", "b15_ost", ar.b15_ost);
            o.fill("--alpha", "alpha", ar.alpha);
            o.fill("--theta-null", "theta_null", ar.theta_null);
            o.fill("--null-lo", "null_lo", ar.null_lo);
            o.fill("--null-hi", "null_hi", ar.null_hi);
            o.fill("--null-step", "null_step", ar.null_step);
            o.fill("--delta", "delta", ar.delta);
            o.fill("--block-rule", "block_rule", ar.block_rule);
            o.fill("--pniwd-scope", "pniwd_scope", ar.pniwd_scope);
            o.fill("--phi", "phi", ar.phi);
            o.fill("--clip", "clip", ar.clip);
            o.fill("--prior", "prior", ar.prior);
            o.fill("--stat-tol", "stat_tol", ar.stat_tol);
            o.fill("--out", "out", ar.out);
            run_arrest(shared, ar);
        } else if (mc_cmd->parsed()) {
            const option_overlay o(mc_cmd, config);
            o.fill("--n", "n", mc.horizon);
            o.fill("--burn-in", "burn_in", mc.burn_in);
            o.fill("--theta-c", "theta_c", mc.theta_c);
            o.fill("--theta-d", "theta_d", mc.theta_d);
            o.fill("--reps", "reps", mc.reps);
            o.fill("--seed", "seed", mc.seed);
            o.fill("--rule", "rule", mc.rule);
            o.fill("--kind", "kinds", mc.kinds);
            o.fill("--test", "test", mc.test);
            o.fill("--stat", "stat", mc.stat);
            o.fill("--random", "random", mc.random);
            o.fill("--gs", "gs", mc.gs);
            o.fill("--block", "block", mc.block);
            o.fill("--ost", "ost", mc.ost);
            o.fill("--block-rule", "block_rule", mc.block_rule);
            o.fill("--pniwd-scope", "pniwd_scope", mc.pniwd_scope);
            o.fill("--phi", "phi", mc.phi);
            o.fill("--clip", "clip", mc.clip);
            o.fill("--prior", "prior", mc.prior);
            o.fill("--policy-tol", "policy_tol", mc.policy_tol);
            o.fill("--stat-tol", "stat_tol", mc.stat_tol);
            o.fill("--out", "out", mc.out);
            run_mc_check(shared, mc);
        }
    } catch (const brar::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const brar::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const brar::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
