// Command-line front end: gen-feeder, run, compare, sweep.
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gridbarrier/experiment.hpp"
#include "gridbarrier/output.hpp"

namespace gb = gridbarrier;

namespace {

int fail(const gb::Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return e.is_validation() ? 1 : 2;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw gb::ValidationError("bad number '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw gb::ValidationError("empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online voltage control on radial feeders with an exponential barrier controller"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-feeder", "Write a synthetic radial feeder as network CSV");
  std::size_t gen_n = 56;
  std::uint64_t gen_seed = 1;
  double gen_overload = 1.0;
  gb::FeederOptions gen_opts;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Number of non-slack buses")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--overload", gen_overload, "Solar scale; 1 puts the peak deviation at the default");
  gen->add_option("--chain-bias", gen_opts.chain_bias, "Probability a bus hangs off its predecessor");
  gen->add_option("--inverter-fraction", gen_opts.inverter_fraction, "Share of buses with an inverter");
  gen->add_option("--out", gen_out, "Output CSV")->required();

  auto* run = app.add_subcommand("run", "Run a scenario and write trajectories, plot and summary");
  std::string run_scenario, run_out;
  run->add_option("--scenario", run_scenario, "Scenario file")->required();
  run->add_option("--out", run_out, "Output directory")->required();

  auto* cmp = app.add_subcommand("compare", "Print the per-method summary of a scenario");
  std::string cmp_scenario;
  bool cmp_csv = false;
  cmp->add_option("--scenario", cmp_scenario, "Scenario file")->required();
  cmp->add_flag("--csv", cmp_csv, "Print CSV instead of a table");

  auto* sweep = app.add_subcommand("sweep", "Vary the perturbation magnitude and tabulate safety and cost");
  std::string sweep_scenario, sweep_mags = "0,0.1,0.2,0.3,0.4,0.5", sweep_out;
  unsigned sweep_threads = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--scenario", sweep_scenario, "Scenario file")->required();
  sweep->add_option("--magnitudes", sweep_mags, "Comma-separated magnitudes in [0, 1)");
  sweep->add_option("--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const gb::RadialNetwork net = gb::generate_synthetic_feeder(gen_n, gen_seed, gen_overload, gen_opts);
      gb::write_network_csv(net, gen_out);
      std::cout << "wrote " << gen_out << " (" << net.n << " buses)\n";
    } else if (*run) {
      const gb::ExperimentResult result = gb::run_experiment(gb::load_scenario(run_scenario));
      for (const std::string& p : gb::write_experiment(result, run_out)) std::cout << "wrote " << p << "\n";
      std::cout << "\n" << gb::format_summary(result);
    } else if (*cmp) {
      const gb::ExperimentResult result = gb::run_experiment(gb::load_scenario(cmp_scenario));
      std::cout << (cmp_csv ? gb::format_summary_csv(result) : gb::format_summary(result));
    } else if (*sweep) {
      const std::vector<double> mags = parse_list(sweep_mags);
      const auto rows = gb::run_sweep(gb::load_scenario(sweep_scenario), mags, sweep_threads);
      const std::string table = gb::format_sweep_csv(rows);
      if (sweep_out.empty()) {
        std::cout << table;
      } else {
        gb::write_text(sweep_out, table);
        std::cout << "wrote " << sweep_out << "\n";
      }
    }
  } catch (const gb::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
