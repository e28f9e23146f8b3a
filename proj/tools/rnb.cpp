// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

// rnb: simulate, cost, compare, train-toy and emit-plot-data.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rnb/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> params;
  std::string out = ".";
  bool no_timestamp = false;

  rnb::ComponentParams load_params() const {
    return rnb::cli::load_params(params ? std::optional<fs::path>(*params) : std::nullopt);
  }
};

void write_csv_to(const std::string& path, const std::string& text) {
  if (path == "-") std::cout << text;
  else rnb::cli::write_text(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reuse-and-blend photonic accelerator simulator and cost model", "rnb"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed overriding the scenario or command default");
  app.add_option("--params", g.params, "JSON file of component parameter overrides")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit the generated_at field from reports");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a scenario through program, infer and account");
  std::string scenario_path;
  std::optional<bool> reuse_override;
  sim->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sim->add_option("--reuse", reuse_override, "Override the scenario reuse toggle (true/false)");

  // cost
  auto* cost = app.add_subcommand("cost", "Closed-form architecture comparison");
  bool all_archs = false;
  std::string arch;
  rnb::ArchFormulaInputs in;
  std::optional<std::uint64_t> m_rows;
  std::string cost_csv;
  auto* all_opt = cost->add_flag("--all", all_archs, "Print every architecture");
  cost->add_option("--arch", arch, "Single architecture")
      ->check(CLI::IsMember({"mzi", "crosslight", "holylight", "rnb"}))
      ->excludes(all_opt);
  cost->add_option("-M", m_rows, "Matrix rows (defaults to N)");
  cost->add_option("-N", in.N, "Matrix columns")->capture_default_str();
  cost->add_option("-K", in.K, "Reuse times")->capture_default_str();
  cost->add_option("-C", in.C, "Calibration iterations")->capture_default_str();
  cost->add_option("-B", in.B, "DWDM capacity")->capture_default_str();
  cost->add_option("--beta-a", in.beta_a, "MZI area factor")->capture_default_str();
  cost->add_option("--beta-p", in.beta_p, "MZI power factor")->capture_default_str();
  cost->add_option("--beta-t", in.beta_t, "Thermal tuning speedup")->capture_default_str();
  cost->add_option("--csv", cost_csv, "Also write the rows as CSV (- for stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Savings of a scenario report against a baseline report");
  std::string base_path, scen_path, cmp_csv = "compare.csv";
  cmp->add_option("baseline", base_path, "Baseline report")->required()->check(CLI::ExistingFile);
  cmp->add_option("scenario", scen_path, "Scenario report")->required()->check(CLI::ExistingFile);
  cmp->add_option("--csv", cmp_csv, "Plot CSV name inside --out (- for stdout)")->capture_default_str();

  // train-toy
  auto* tr = app.add_subcommand("train-toy", "Train a small network on the float engine");
  rnb::cli::TrainToyOptions topt;
  topt.train.lr = 0.01;
  topt.train.epochs = 20;
  std::string net_path, images, labels, init;
  bool no_cosine = false;
  tr->add_option("--net", net_path, "Network JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--dataset", topt.dataset, "blobs or idx")
      ->check(CLI::IsMember({"blobs", "idx"}))
      ->capture_default_str();
  tr->add_option("--samples", topt.samples, "Sample count (idx: limit, 0 for all)")->capture_default_str();
  tr->add_option("--data-seed", topt.data_seed, "Seed of the blob generator")->capture_default_str();
  tr->add_option("--separation", topt.separation, "Distance between blob centers")->capture_default_str();
  tr->add_option("--images", images, "IDX image file");
  tr->add_option("--labels", labels, "IDX label file");
  tr->add_option("--init", init, "Start from these RNBW weights");
  tr->add_option("--epochs", topt.train.epochs, "Epochs")->capture_default_str();
  tr->add_option("--lr", topt.train.lr, "Peak learning rate")->capture_default_str();
  tr->add_option("--min-lr", topt.train.min_lr, "Final cosine learning rate")->capture_default_str();
  tr->add_option("--weight-decay", topt.train.weight_decay, "L2 weight decay")->capture_default_str();
  tr->add_option("--batch", topt.train.batch_size, "Mini-batch size")->capture_default_str();
  tr->add_flag("--no-cosine", no_cosine, "Keep the learning rate constant");

  // emit-plot-data
  auto* emit = app.add_subcommand("emit-plot-data", "Write the sweep and fit CSVs and paired reports");
  int emit_c = 10;
  emit->add_option("-C", emit_c, "Calibration iterations used to split write energy")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const fs::path out = g.out;
    const bool stamp = !g.no_timestamp;
    if (*sim) {
      rnb::cli::Scenario sc = rnb::cli::load_scenario(scenario_path);
      if (reuse_override) sc.reuse = *reuse_override;
      if (g.seed) sc.seed = *g.seed;
      const auto result = rnb::cli::simulate(sc, g.load_params(), stamp);
      rnb::cli::write_simulation(result, out);
      for (const auto& run : result.report["runs"]) {
        const auto& p = run["programming"];
        std::cout << "run " << run["label"].get<std::string>() << ": element_writes "
                  << p["element_writes"].get<std::uint64_t>();
        if (p.contains("write_ratio") && !p["write_ratio"].is_null()) {
          std::cout << " (ratio to unshared " << p["write_ratio"].get<double>() << ")";
        }
        std::cout << ", energy " << run["cost"]["total_energy_uj"].get<double>() << " uJ, latency "
                  << run["cost"]["latency_ns"].get<double>() << " ns";
        const auto& dev = run["equivalence"]["max_deviation"];
        if (!dev.is_null()) std::cout << ", max deviation " << dev.get<double>();
        std::cout << "\n";
      }
      std::cout << "wrote " << (out / "report.json").string() << "\n";
    } else if (*cost) {
      in.M = m_rows.value_or(in.N);
      std::vector<rnb::Arch> archs;
      if (!arch.empty()) archs.push_back(rnb::parse_arch(arch));
      else archs.assign(rnb::kAllArchs.begin(), rnb::kAllArchs.end());
      in.validate();
      std::cout << rnb::cli::format_cost_table(archs, in);
      if (!cost_csv.empty()) {
        std::ostringstream os;
        rnb::cli::write_cost_table_csv(os, archs, {in});
        write_csv_to(cost_csv == "-" ? cost_csv : (out / cost_csv).string(), os.str());
      }
    } else if (*cmp) {
      const auto runs = rnb::cli::compare_reports(rnb::cli::read_json(base_path, "baseline report"),
                                                  rnb::cli::read_json(scen_path, "scenario report"));
      std::cout << rnb::cli::format_comparison(runs);
      std::ostringstream os;
      rnb::cli::write_comparison_csv(os, runs);
      write_csv_to(cmp_csv == "-" ? cmp_csv : (out / cmp_csv).string(), os.str());
    } else if (*tr) {
      topt.net_path = net_path;
      if (!images.empty()) topt.images = images;
      if (!labels.empty()) topt.labels = labels;
      if (!init.empty()) topt.initial_weights = init;
      topt.train.cosine = !no_cosine;
      topt.train.seed = g.seed.value_or(0);
      const auto outcome = rnb::cli::train_toy(topt);
      fs::create_directories(out);
      rnb::save_weights((out / "weights.rnbw").string(), outcome.result.weights);
      std::ostringstream os;
      rnb::cli::write_metrics_csv(os, outcome.result.history);
      rnb::cli::write_text(out / "metrics.csv", os.str());
      std::cout << "epochs " << outcome.result.history.size() << ", final train accuracy "
                << outcome.final_accuracy << "\n";
    } else if (*emit) {
      rnb::cli::emit_plot_data(out, emit_c, stamp);
      std::cout << "wrote plot data to " << out.string() << "\n";
    }
  } catch (const rnb::Error& e) {
    std::cerr << "error (" << rnb::to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
