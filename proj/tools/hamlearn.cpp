// hamlearn CLI: dataset generation, likelihood recovery, Fisher scans,
// scheduling/ensemble sweeps, and scaling-law prediction.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hamlearn/dataset.hpp"
#include "hamlearn/fisher.hpp"
#include "hamlearn/harness.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/recovery.hpp"
#include "hamlearn/rng.hpp"

namespace {

using namespace hamlearn;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file_atomic(out_path, text);
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        vals.push_back(std::stod(item));
    }
    if (vals.empty()) throw std::invalid_argument("empty list: " + csv);
    return vals;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> vals;
    for (double v : parse_double_list(csv)) vals.push_back(static_cast<int>(std::lround(v)));
    return vals;
}

struct SweepOpts {
    std::string preset = "desk";
    std::string family = "xyz";
    int n = 3;
    double dt = 0.01;
    double alpha = 1.0;
    int m_t = 8;
    int spreads = 32;
    int bases = 25;
    int shots = 1;
    int realizations = 5;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::optional<double> disorder_mean;
    double disorder_sigma = 0.1;
    std::string out;
    std::string points_out;
};

void add_sweep_options(CLI::App* cmd, SweepOpts& o, bool& n_set, bool& realizations_set) {
    cmd->add_option("--preset", o.preset, "Named preset: desk (3 qubits, 5 realizations) or paper (5 qubits, 10 realizations)")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--family", o.family, "Model family: xyz, xyz2, xyz3, xxz");
    auto* n_opt = cmd->add_option("--n", o.n, "Number of qubits");
    cmd->add_option("--dt", o.dt, "Schedule time step");
    cmd->add_option("--mt", o.m_t, "Number of schedule slots");
    cmd->add_option("--spreads", o.spreads, "Spread states per dataset (R)");
    cmd->add_option("--bases", o.bases, "Measurement bases per dataset (K)");
    cmd->add_option("--shots", o.shots, "Shots per (state, time, basis) cell (S)");
    auto* r_opt = cmd->add_option("--realizations", o.realizations, "Independent model draws");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--jobs", o.jobs, "Parallel worker threads");
    cmd->add_option("--disorder-mean", o.disorder_mean,
                    "Draw couplings from a normal distribution centred here instead of uniform");
    cmd->add_option("--disorder-sigma", o.disorder_sigma, "Std dev for --disorder-mean");
    cmd->add_option("--out", o.out, "Sweep CSV path (stdout when omitted)");
    cmd->add_option("--points-out", o.points_out, "Raw (T_tot, epsilon) points CSV path");
    cmd->final_callback([&o, &n_set, &realizations_set, n_opt, r_opt] {
        n_set = n_opt->count() > 0;
        realizations_set = r_opt->count() > 0;
    });
}

ExperimentConfig sweep_config(const SweepOpts& o, bool n_set, bool realizations_set) {
    ExperimentConfig cfg;
    cfg.family = family_from_name(o.family);
    cfg.n = o.n;
    cfg.realizations = o.realizations;
    if (o.preset == "paper") {
        if (!n_set) cfg.n = 5;
        if (!realizations_set) cfg.realizations = 10;
    }
    cfg.schedule = Schedule{o.dt, o.alpha, o.m_t};
    cfg.R = o.spreads;
    cfg.K = o.bases;
    cfg.S = o.shots;
    cfg.master_seed = o.seed;
    cfg.jobs = o.jobs;
    if (o.disorder_mean) cfg.disorder = GaussianDisorder{*o.disorder_mean, o.disorder_sigma};
    return cfg;
}

void print_sweep_config(const char* name, const ExperimentConfig& cfg, const std::string& axis) {
    std::cerr << name << ": family=" << family_name(cfg.family) << " n=" << cfg.n
              << " dt=" << cfg.schedule.dt << " alpha=" << cfg.schedule.alpha
              << " mt=" << cfg.schedule.m_t << " R=" << cfg.R << " K=" << cfg.K << " S=" << cfg.S
              << " realizations=" << cfg.realizations << " seed=" << cfg.master_seed
              << " jobs=" << cfg.jobs << " axis=[" << axis << "]\n";
}

void emit_sweep(const SweepOpts& o, const SweepResult& result) {
    emit(o.out, sweep_csv(result));
    if (!o.points_out.empty()) write_file_atomic(o.points_out, sweep_points_csv(result));
    for (const auto& cell : result.cells)
        if (!cell.ok)
            std::cerr << "warning: fit failed at axis value " << cell.axis_value << ": "
                      << cell.error << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Trajectory-based Hamiltonian learning toolkit"};
    app.require_subcommand(1);

    // generate
    std::string g_family = "xyz", g_out;
    int g_n = 3, g_mt = 8, g_spreads = 32, g_bases = 25, g_shots = 1;
    double g_dt = 0.01, g_alpha = 1.0, g_disorder_sigma = 0.1;
    std::optional<double> g_disorder_mean;
    std::uint64_t g_seed = 1;
    auto* gen = app.add_subcommand("generate", "Draw a model and simulate a measurement dataset");
    gen->add_option("--family", g_family, "Model family: xyz, xyz2, xyz3, xxz");
    gen->add_option("--n", g_n, "Number of qubits");
    gen->add_option("--alpha", g_alpha, "Schedule exponent");
    gen->add_option("--dt", g_dt, "Schedule time step");
    gen->add_option("--mt", g_mt, "Number of schedule slots");
    gen->add_option("--spreads", g_spreads, "Spread states (R)");
    gen->add_option("--bases", g_bases, "Measurement bases (K)");
    gen->add_option("--shots", g_shots, "Shots per cell (S)");
    gen->add_option("--seed", g_seed, "Master seed");
    gen->add_option("--disorder-mean", g_disorder_mean,
                    "Draw couplings from a normal distribution centred here instead of uniform");
    gen->add_option("--disorder-sigma", g_disorder_sigma, "Std dev for --disorder-mean");
    gen->add_option("--out", g_out, "Dataset JSON path (stdout when omitted)");

    // recover
    std::string r_dataset, r_config, r_out;
    auto* rec = app.add_subcommand("recover", "Maximum-likelihood recovery from a dataset");
    rec->add_option("--dataset", r_dataset, "Dataset JSON path")->required();
    rec->add_option("--config", r_config, "Recovery config JSON path (defaults when omitted)");
    rec->add_option("--out", r_out, "Result JSON path (stdout when omitted)");

    // fisher-scan
    std::string f_family = "xyz", f_out;
    int f_n = 3, f_points = 10, f_spreads = 32, f_bases = 16;
    double f_tmin = 1e-3, f_tmax = 3e-2;
    std::uint64_t f_seed = 1;
    auto* fis = app.add_subcommand("fisher-scan",
                                   "Ensemble-averaged classical Fisher information vs probe time");
    fis->add_option("--family", f_family, "Model family: xyz, xyz2, xyz3, xxz");
    fis->add_option("--n", f_n, "Number of qubits");
    fis->add_option("--tmin", f_tmin, "Smallest probe time");
    fis->add_option("--tmax", f_tmax, "Largest probe time");
    fis->add_option("--points", f_points, "Number of log-spaced probe times");
    fis->add_option("--spreads", f_spreads, "Spread states (R)");
    fis->add_option("--bases", f_bases, "Bases per state (K)");
    fis->add_option("--seed", f_seed, "Master seed");
    fis->add_option("--out", f_out, "CSV path (stdout when omitted)");

    // sweep-alpha
    SweepOpts a_opts;
    bool a_n_set = false, a_realizations_set = false;
    std::string a_alphas = "0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    auto* swa = app.add_subcommand("sweep-alpha",
                                   "Fit the recovery exponent beta across schedule exponents");
    add_sweep_options(swa, a_opts, a_n_set, a_realizations_set);
    swa->add_option("--alphas", a_alphas, "Comma-separated alpha values");

    // sweep-spread
    SweepOpts s_opts;
    bool s_n_set = false, s_realizations_set = false;
    std::string s_rs = "1,2,4,8,16,32";
    double s_alpha = 1.0;
    auto* sws = app.add_subcommand("sweep-spread",
                                   "Fit the recovery exponent beta across ensemble sizes");
    add_sweep_options(sws, s_opts, s_n_set, s_realizations_set);
    sws->add_option("--rs", s_rs, "Comma-separated ensemble sizes");
    sws->add_option("--alpha", s_alpha, "Schedule exponent (fixed across the sweep)");

    // predict
    double p_alpha = 1.0, p_gamma0 = 2.0;
    auto* pre = app.add_subcommand("predict", "Predicted scaling exponents for a schedule");
    pre->add_option("--alpha", p_alpha, "Schedule exponent");
    pre->add_option("--gamma0", p_gamma0, "Single-measurement Fisher time exponent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen->parsed()) {
        ParameterSpec spec;
        spec.family = family_from_name(g_family);
        spec.n = g_n;
        if (g_disorder_mean) spec.disorder = GaussianDisorder{*g_disorder_mean, g_disorder_sigma};
        spec.seed = derive_seed(g_seed, {seed_stream::model, 1});
        ModelHamiltonian model = build_model(spec);
        MeasurementDataset ds = generate_dataset(model, g_spreads, g_bases, g_shots,
                                                 Schedule{g_dt, g_alpha, g_mt}, g_seed);
        emit(g_out, dataset_to_json(ds) + "\n");
        std::cerr << "generate: family=" << family_name(ds.family) << " n=" << ds.n
                  << " R=" << ds.R << " K=" << ds.K << " S=" << ds.S
                  << " mt=" << ds.schedule.m_t << " dt=" << ds.schedule.dt
                  << " alpha=" << ds.schedule.alpha << " seed=" << g_seed
                  << " records=" << ds.records.size()
                  << " fingerprint=" << dataset_fingerprint(ds) << "\n";
        return 0;
    }

    if (rec->parsed()) {
        if (!std::filesystem::exists(r_dataset))
            throw std::invalid_argument("recover: dataset file not found: " + r_dataset);
        if (!r_config.empty() && !std::filesystem::exists(r_config))
            throw std::invalid_argument("recover: config file not found: " + r_config);
        MeasurementDataset ds = load_dataset(r_dataset);
        RecoveryConfig cfg;
        if (!r_config.empty()) cfg = recovery_config_from_json(read_file(r_config));
        RecoveryResult result = run_recovery(ds, cfg);
        emit(r_out, recovery_result_to_json(result, cfg, dataset_fingerprint(ds)) + "\n");
        std::cerr << "recover: iterations=" << result.iterations
                  << " converged=" << (result.converged ? "yes" : "no")
                  << " final_loss=" << result.loss_trace.back() << " epsilon=" << result.epsilon
                  << " seed=" << cfg.seed << "\n";
        return 0;
    }

    if (fis->parsed()) {
        if (f_points < 1 || f_tmin <= 0 || f_tmax < f_tmin)
            throw std::invalid_argument("fisher-scan: need points >= 1 and 0 < tmin <= tmax");
        ParameterSpec spec;
        spec.family = family_from_name(f_family);
        spec.n = f_n;
        spec.seed = derive_seed(f_seed, {seed_stream::model, 1});
        ModelHamiltonian model = build_model(spec);
        std::vector<double> times;
        for (int i = 0; i < f_points; ++i) {
            double frac = f_points == 1 ? 0.0 : static_cast<double>(i) / (f_points - 1);
            times.push_back(f_tmin * std::pow(f_tmax / f_tmin, frac));
        }
        std::vector<Matrix> directions;
        for (auto& [generator, label] : term_generators(model)) directions.push_back(generator);
        FisherReport report = ensemble_cfi_curve(model, directions, times, f_spreads, f_bases, f_seed);
        emit(f_out, fisher_csv(report));
        std::cerr << "fisher-scan: family=" << f_family << " n=" << f_n << " R=" << f_spreads
                  << " K=" << f_bases << " seed=" << f_seed << "\n";
        return 0;
    }

    if (swa->parsed()) {
        ExperimentConfig cfg = sweep_config(a_opts, a_n_set, a_realizations_set);
        print_sweep_config("sweep-alpha", cfg, a_alphas);
        emit_sweep(a_opts, sweep_alpha(cfg, parse_double_list(a_alphas)));
        return 0;
    }

    if (sws->parsed()) {
        ExperimentConfig cfg = sweep_config(s_opts, s_n_set, s_realizations_set);
        cfg.schedule.alpha = s_alpha;
        print_sweep_config("sweep-spread", cfg, s_rs);
        emit_sweep(s_opts, sweep_spread(cfg, parse_int_list(s_rs)));
        return 0;
    }

    if (pre->parsed()) {
        ScalingLaw law = predicted_exponents(p_alpha, p_gamma0);
        std::printf("alpha=%g gamma0=%g p=%.10g beta=%.10g\n", law.alpha, law.gamma0, law.p,
                    law.beta);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
