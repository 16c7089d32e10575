// Command-line front end: simulate, table, scan, oracle, constants, thresholds.
// Exit codes: 0 success, 1 invalid input, 2 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "majority/majority.hpp"

namespace {

using nlohmann::json;
namespace mj = majority;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Output {
  std::string format = "csv";
  std::string path = "-";
  unsigned workers = 0;
};

void add_output_flags(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", out.path, "Output file ('-' for standard output)");
  cmd->add_option("--workers", out.workers, "Worker threads (0 = all cores)");
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw mj::IoError("<stdout>", "write failed");
    return;
  }
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  if (!f) throw mj::IoError(path, "cannot open for writing");
  f << text;
  f.flush();
  if (!f) throw mj::IoError(path, "write failed");
}

json scan_to_json(const mj::PhaseScan& scan) {
  json j;
  j["points"] = json::array();
  for (const auto& pt : scan.points) j["points"].push_back(mj::to_json(pt.report));
  j["crossing"] = scan.crossing ? json::array({scan.crossing->first, scan.crossing->second}) : json(nullptr);
  return j;
}

mj::ThresholdRegime make_regime(const std::string& name, std::optional<double> L, std::optional<double> delta_param,
                                std::optional<double> d_n) {
  mj::ThresholdRegime r;
  r.kind = mj::parse_regime(name);
  const int given = (L ? 1 : 0) + (delta_param ? 1 : 0) + (d_n ? 1 : 0);
  if (given > 1) throw std::invalid_argument("give at most one of --L, --delta-param, --d-n");
  switch (r.kind) {
    case mj::RegimeKind::SecondDayWin:
    case mj::RegimeKind::UnitSecondDayWin:
      if (L || d_n) throw std::invalid_argument("regime '" + name + "' takes --delta-param");
      r.parameter = delta_param;
      break;
    case mj::RegimeKind::HaltSufficient:
      if (L || delta_param) throw std::invalid_argument("regime 'halt' takes --d-n (default ln ln n)");
      r.parameter = d_n;
      break;
    default:
      if (delta_param || d_n) throw std::invalid_argument("regime '" + name + "' takes --L");
      r.parameter = L;
      break;
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Majority dynamics on dynamic two-block stochastic block models"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run replicates of one configuration");
  std::string model = "markovian";
  std::size_t n = 0;
  std::optional<std::int64_t> delta;
  std::optional<double> sim_L;
  double p = 0.5, q = 0.3;
  std::uint64_t replicates = 1000, max_rounds = mj::kDefaultMaxRounds, seed = 0;
  std::string spec_path;
  Output sim_out;
  auto* model_opt =
      sim->add_option("--model", model, "markovian or non-markovian")->check(CLI::IsMember({"markovian", "non-markovian"}));
  auto* n_opt = sim->add_option("--n", n, "Size of the - block (the + block has n + delta)");
  auto* delta_opt = sim->add_option("--delta", delta, "Initial lead of the + block");
  auto* L_opt = sim->add_option("--L", sim_L, "Lead ceil((p-q)n/q - L sqrt(n ln n))");
  delta_opt->excludes(L_opt);
  auto* p_opt = sim->add_option("--p", p, "Edge probability inside a block");
  auto* q_opt = sim->add_option("--q", q, "Edge probability across blocks");
  auto* rep_opt = sim->add_option("--replicates", replicates, "Number of independent runs");
  auto* mr_opt = sim->add_option("--max-rounds", max_rounds, "Day limit before a run counts as a timeout");
  auto* seed_opt = sim->add_option("--seed", seed, "Master seed");
  auto* spec_opt = sim->add_option("--spec", spec_path, "JSON spec file replacing the configuration flags");
  for (auto* o : {model_opt, n_opt, delta_opt, L_opt, p_opt, q_opt, rep_opt, mr_opt, seed_opt}) spec_opt->excludes(o);
  add_output_flags(sim, sim_out);

  // table
  auto* table = app.add_subcommand("table", "Reproduce a simulation table (T1..T6)");
  std::string table_id;
  std::uint64_t table_reps = 1000, table_seed = 0, table_rounds = mj::kDefaultMaxRounds;
  Output table_out;
  table->add_option("id", table_id, "Table id")->required()->check(CLI::IsMember({"T1", "T2", "T3", "T4", "T5", "T6"}));
  table->add_option("--replicates", table_reps, "Replicates per row");
  table->add_option("--seed", table_seed, "Master seed");
  table->add_option("--max-rounds", table_rounds, "Day limit per run");
  add_output_flags(table, table_out);

  // scan
  auto* scan = app.add_subcommand("scan", "Sweep L and locate the 1/2 crossing of the + win frequency");
  mj::ScanSettings scan_settings;
  std::string scan_model = "non-markovian";
  double L_from = 0.0, L_to = 4.0, L_step = 0.5;
  Output scan_out;
  scan->add_option("--model", scan_model)->check(CLI::IsMember({"markovian", "non-markovian"}));
  scan->add_option("--n", scan_settings.n, "Size of the - block");
  scan->add_option("--p", scan_settings.p);
  scan->add_option("--q", scan_settings.q);
  scan->add_option("--L-from", L_from);
  scan->add_option("--L-to", L_to);
  scan->add_option("--L-step", L_step);
  scan->add_option("--replicates", scan_settings.replicates);
  scan->add_option("--max-rounds", scan_settings.max_rounds);
  scan->add_option("--seed", scan_settings.master_seed);
  add_output_flags(scan, scan_out);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact kernel, absorption and day-1 halt probabilities (2n + delta <= 7)");
  std::size_t or_n = 1, or_delta = 1;
  double or_p = 0.5, or_q = 0.3;
  std::string oracle_path = "-";
  oracle->add_option("--n", or_n);
  oracle->add_option("--delta", or_delta);
  oracle->add_option("--p", or_p);
  oracle->add_option("--q", or_q);
  oracle->add_option("--out", oracle_path);

  // constants
  auto* cons = app.add_subcommand("constants", "H, C and C' for (p, q)");
  double c_p = 0.5, c_q = 0.3;
  cons->add_option("--p", c_p);
  cons->add_option("--q", c_q);

  // thresholds
  auto* thr = app.add_subcommand("thresholds", "Evaluate a threshold rule delta(n)");
  std::int64_t t_n = 500;
  double t_p = 0.5, t_q = 0.3;
  std::string regime_name = "experiment";
  std::optional<double> t_L, t_delta, t_dn;
  thr->add_option("--n", t_n);
  thr->add_option("--p", t_p);
  thr->add_option("--q", t_q);
  thr->add_option("--regime", regime_name,
                  "halt, first-day, second-day, third-day, unit-p-halt, unit-p-second-day, unit-p-third-day, "
                  "conjectured-halt, experiment");
  thr->add_option("--L", t_L);
  thr->add_option("--delta-param", t_delta);
  thr->add_option("--d-n", t_dn, "Value of the divergent sequence d_n for the halt regime");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) {
      mj::ExperimentSpec spec;
      if (!spec_path.empty()) {
        spec = mj::load_spec(spec_path);
      } else {
        if (!*n_opt) throw std::invalid_argument("--n is required");
        if (!delta && !sim_L) throw std::invalid_argument("one of --delta or --L is required");
        spec.variant = mj::parse_variant(model);
        spec.n = n;
        if (delta) {
          spec.delta_rule = *delta;
        } else {
          spec.delta_rule = mj::ThresholdRegime::experiment(*sim_L);
        }
        spec.p = p;
        spec.q = q;
        spec.replicates = replicates;
        spec.max_rounds = max_rounds;
        spec.master_seed = seed;
      }
      const auto report = mj::run_experiment(spec, {sim_out.workers});
      mj::emit({report}, mj::parse_format(sim_out.format), sim_out.path);
    } else if (*table) {
      const auto reports =
          mj::reproduce_table(mj::parse_table_id(table_id), table_reps, table_seed, {table_out.workers}, table_rounds);
      mj::emit(reports, mj::parse_format(table_out.format), table_out.path);
    } else if (*scan) {
      if (!(L_step > 0.0)) throw std::invalid_argument("--L-step must be positive");
      if (L_to < L_from) throw std::invalid_argument("--L-to must not be below --L-from");
      scan_settings.variant = mj::parse_variant(scan_model);
      const auto steps = static_cast<std::int64_t>(std::floor((L_to - L_from) / L_step + 1e-9));
      for (std::int64_t i = 0; i <= steps; ++i) scan_settings.L_grid.push_back(L_from + static_cast<double>(i) * L_step);
      const auto result = mj::scan_phase(scan_settings, {scan_out.workers});
      if (scan_out.format == "json") {
        write_text(scan_to_json(result).dump(2) + "\n", scan_out.path);
      } else {
        std::vector<mj::ExperimentReport> reports;
        for (const auto& pt : result.points) reports.push_back(pt.report);
        mj::emit(reports, mj::ReportFormat::Csv, scan_out.path);
      }
      if (result.crossing) {
        std::cerr << "crossing: [" << result.crossing->first << ", " << result.crossing->second << "]\n";
      } else {
        std::cerr << "crossing: none\n";
      }
    } else if (*oracle) {
      const std::size_t total = 2 * or_n + or_delta;
      if (total > mj::kMaxOracleVertices) throw std::invalid_argument("oracle needs 2n + delta <= 7");
      mj::BlockParams(or_p, or_q);
      const auto kernel = mj::build_kernel(total, or_p, or_q);
      const auto absorption = mj::exact_absorption(or_n, or_delta, or_p, or_q);
      json j;
      j["n"] = or_n;
      j["delta"] = or_delta;
      j["p"] = or_p;
      j["q"] = or_q;
      j["kernel"] = kernel.rows;
      j["absorbing_reachable"] = absorption.absorbing_reachable;
      j["prob_plus_wins"] = absorption.absorbing_reachable ? json(absorption.prob_plus_wins) : json(nullptr);
      j["halt_day1"] = or_n > 0 ? json(mj::exact_halt_day1(or_n, or_delta, or_p, or_q)) : json(nullptr);
      write_text(j.dump(2) + "\n", oracle_path);
    } else if (*cons) {
      const auto c = mj::constants(c_p, c_q);
      json j{{"p", c_p}, {"q", c_q}, {"H", c.H}, {"C", c.C}, {"C_prime", c.C_prime}};
      write_text(j.dump(2) + "\n", "-");
    } else if (*thr) {
      const auto regime = make_regime(regime_name, t_L, t_delta, t_dn);
      json j;
      j["n"] = t_n;
      j["p"] = t_p;
      j["q"] = t_q;
      j["regime"] = mj::to_string(regime.kind);
      j["parameter"] = regime.parameter ? json(*regime.parameter) : json(nullptr);
      j["value"] = mj::threshold_value(t_n, t_p, t_q, regime);
      j["delta"] = mj::threshold_delta(t_n, t_p, t_q, regime);
      write_text(j.dump(2) + "\n", "-");
    }
  } catch (const mj::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
