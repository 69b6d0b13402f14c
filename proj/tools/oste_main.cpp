// Command-line front end: run, sweep, importance, simulate.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oste/csv.hpp"
#include "oste/error.hpp"
#include "oste/forest.hpp"
#include "oste/harness.hpp"
#include "oste/random.hpp"
#include "oste/serialize.hpp"
#include "oste/simulate.hpp"

namespace {

struct ExperimentFlags {
  oste::ExperimentConfig config;
  std::vector<std::string> methods{"oste", "rsf", "bagging"};
  std::size_t mtry = 0;
  bool no_tune_p = false;
  std::string ibs_weighting = "points";
  std::string out;
  std::string csv;
  bool timing = false;
};

void add_data_flags(CLI::App* cmd, oste::ExperimentConfig& config) {
  cmd->add_option("--data", config.data_path, "CSV file with one row per subject")->required();
  cmd->add_option("--columns", config.config_path, "column config (time_col, status_col, feature kinds)")->required();
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  add_data_flags(cmd, f.config);
  cmd->add_option("--methods", f.methods, "any of oste, rsf, bagging")->delimiter(',');
  cmd->add_option("--runs", f.config.runs, "random train/test splits")->capture_default_str();
  cmd->add_option("--train-fraction", f.config.train_fraction)->capture_default_str();
  cmd->add_option("--lb-fraction", f.config.lb_fraction, "share of train used to grow the OSTE forest")
      ->capture_default_str();
  cmd->add_option("-B,--trees", f.config.num_trees)->capture_default_str();
  cmd->add_option("-M,--m-fraction", f.config.m_fraction, "share of ranked trees eligible for selection")
      ->capture_default_str();
  cmd->add_option("-p,--mtry", f.mtry, "features tried per split (default round(sqrt(d)))");
  cmd->add_option("--node-size", f.config.min_node_size, "minimum members per child")->capture_default_str();
  cmd->add_option("--seed", f.config.master_seed)->capture_default_str();
  cmd->add_option("--max-attempts", f.config.max_attempts, "re-draws per run before giving up")->capture_default_str();
  cmd->add_option("--tune-folds", f.config.tuning.folds, "cross-validate B (and p for rsf); 0 disables")
      ->capture_default_str();
  cmd->add_option("--tune-trees", f.config.tuning.tree_grid, "B values tried when tuning")->delimiter(',');
  cmd->add_flag("--no-tune-p", f.no_tune_p, "tune only B for rsf");
  cmd->add_option("--ibs-weighting", f.ibs_weighting, "points (equal weight per event time) or time")
      ->check(CLI::IsMember({"points", "time"}))
      ->capture_default_str();
  cmd->add_option("--out", f.out, "JSON report path (stdout when omitted)");
  cmd->add_option("--csv", f.csv, "flat CSV table path");
  cmd->add_flag("--timing", f.timing, "include wall-clock figures (output then varies between invocations)");
}

void finish_config(ExperimentFlags& f) {
  f.config.methods.clear();
  for (const auto& m : f.methods) f.config.methods.push_back(oste::method_from_string(m));
  if (f.mtry > 0) f.config.mtry = f.mtry;
  f.config.tuning.tune_mtry = !f.no_tune_p;
  f.config.ibs_weighting = f.ibs_weighting == "time" ? oste::IbsWeighting::time : oste::IbsWeighting::points;
}

void emit_json(const oste::Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    oste::write_file(path, text);
  }
}

int fail(const std::string& kind, const std::string& message) {
  const oste::Json record = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal survival tree ensembles: experiments and tools"};
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "repeated train/test comparison of OSTE, RSF and bagging");
  add_experiment_flags(run_cmd, run_flags);

  ExperimentFlags sweep_flags;
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat an experiment over values of B, M or p");
  add_experiment_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--parameter", sweep_param, "B, M or p")->required();
  sweep_cmd->add_option("--values", sweep_values, "values to try (M as a fraction)")->delimiter(',')->required();

  oste::ExperimentConfig imp_data;
  oste::ForestParams imp_params;
  std::size_t imp_mtry = 0;
  std::string imp_out;
  std::string imp_forest_dir;
  auto* imp_cmd = app.add_subcommand("importance", "permutation importance from a forest grown on all rows");
  add_data_flags(imp_cmd, imp_data);
  imp_cmd->add_option("-B,--trees", imp_params.num_trees)->capture_default_str();
  imp_cmd->add_option("-p,--mtry", imp_mtry, "features tried per split (default round(sqrt(d)))");
  imp_cmd->add_option("--node-size", imp_params.min_node_size)->capture_default_str();
  imp_cmd->add_option("--seed", imp_params.master_seed)->capture_default_str();
  imp_cmd->add_option("--out", imp_out, "JSON report path (stdout when omitted)");
  imp_cmd->add_option("--save-forest", imp_forest_dir, "directory to write the grown forest to");

  oste::SimulationSpec sim;
  std::string sim_model = "exponential";
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  std::string sim_columns;
  auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic proportional-hazards dataset");
  sim_cmd->add_option("-n,--rows", sim.n)->capture_default_str();
  sim_cmd->add_option("-d,--features", sim.d)->capture_default_str();
  sim_cmd->add_option("--informative", sim.informative, "leading features with an effect")->capture_default_str();
  sim_cmd->add_option("--coef", sim.coefficients, "log-hazard coefficients of the informative features")
      ->delimiter(',');
  sim_cmd->add_option("--model", sim_model, "exponential or weibull")->capture_default_str();
  sim_cmd->add_option("--shape", sim.weibull_shape)->capture_default_str();
  sim_cmd->add_option("--base-rate", sim.base_rate)->capture_default_str();
  sim_cmd->add_option("--censoring", sim.censoring_rate, "target censored fraction")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed)->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "CSV path")->required();
  sim_cmd->add_option("--columns-out", sim_columns, "where to write the matching column config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*run_cmd) {
      finish_config(run_flags);
      const auto report = oste::run_experiment(run_flags.config);
      emit_json(oste::to_json(report, run_flags.timing), run_flags.out);
      if (!run_flags.csv.empty()) oste::write_file(run_flags.csv, oste::report_csv(report, run_flags.timing));
    } else if (*sweep_cmd) {
      finish_config(sweep_flags);
      const auto parameter = oste::sweep_parameter_from_string(sweep_param);
      const auto ds = oste::load_dataset(sweep_flags.config.data_path, sweep_flags.config.config_path);
      const auto points = oste::sweep(ds, sweep_flags.config, parameter, sweep_values);
      emit_json(oste::sweep_to_json(parameter, points, sweep_flags.timing), sweep_flags.out);
      if (!sweep_flags.csv.empty()) {
        oste::write_file(sweep_flags.csv, oste::sweep_csv(parameter, points, sweep_flags.timing));
      }
    } else if (*imp_cmd) {
      const auto ds = oste::load_dataset(imp_data.data_path, imp_data.config_path);
      imp_params.mtry = imp_mtry > 0 ? imp_mtry : oste::default_mtry(ds.num_features());
      if (imp_params.mtry > ds.num_features()) throw oste::ConfigError("p exceeds the number of features");
      if (imp_params.num_trees < 1) throw oste::ConfigError("B must be at least 1");
      std::vector<std::size_t> all(ds.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      const auto forest = oste::grow_forest(ds, all, imp_params);
      const auto report = oste::permutation_importance(forest, ds, oste::derive_seed(imp_params.master_seed, 1));
      if (!imp_forest_dir.empty()) oste::save_forest(forest, imp_forest_dir);
      oste::Json j = oste::to_json(report);
      j["B"] = imp_params.num_trees;
      j["p"] = imp_params.mtry;
      j["seed"] = imp_params.master_seed;
      emit_json(j, imp_out);
    } else if (*sim_cmd) {
      if (sim_model == "exponential") {
        sim.model = oste::HazardModel::exponential;
      } else if (sim_model == "weibull") {
        sim.model = oste::HazardModel::weibull;
      } else {
        throw oste::ConfigError("unknown hazard model '" + sim_model + "'");
      }
      oste::Rng rng(sim_seed);
      const auto ds = oste::simulate_dataset(sim, rng);
      oste::write_file(sim_out, oste::serialize_csv(ds));
      if (!sim_columns.empty()) {
        oste::write_file(sim_columns, oste::serialize_config(oste::csv_config_for(ds.schema())));
      }
    }
  } catch (const oste::Error& e) {
    return fail(oste::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
