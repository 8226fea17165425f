#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "fae/checkpoint.hpp"
#include "fae/dataset.hpp"
#include "fae/errors.hpp"
#include "fae/pipeline.hpp"
#include "fae/reports.hpp"
#include "fae/rng.hpp"
#include "json.hpp"

namespace fae::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitNonFinite = 3;

/// Raised when an artifact would contain non-finite numbers.
class NonFiniteOutput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string path;
  std::string format = "csv";
  std::string labels;
  std::string label_column;
  bool header = false;
  std::string scaling = "auto";
  std::vector<double> ratios{0.72, 0.08, 0.20};
  std::uint64_t split_seed = 0;
  std::string name;
  Index synth_n = 500;
  Index synth_blocks = 4;
  Index synth_per_block = 3;
  double synth_noise = 0.01;
  std::uint64_t synth_seed = 0;
};

struct ModelOptions {
  std::string method = "fae";
  Hyperparams hp;
  std::string l1_mode = "mean";
  bool final_weights = false;
  std::string profile;
  std::string family = "standard";
  int repeats = 1;
  HierarchyParams hier;
  std::vector<double> lambdas{1.5, 2.0, 3.0};
};

struct EvalOptions {
  std::string metrics;
  int trees = 100;
  std::uint64_t forest_seed = 0;
  std::string on = "test";
};

void add_data_options(CLI::App* app, DataOptions& o) {
  app->add_option("--dataset", o.path, "CSV file or IDX image file");
  app->add_option("--format", o.format, "Input format")->check(CLI::IsMember({"csv", "idx", "synth"}));
  app->add_option("--labels", o.labels, "IDX label file");
  app->add_option("--label-column", o.label_column, "CSV label column, by header name or 0-based index");
  app->add_flag("--header", o.header, "CSV has a header row");
  app->add_option("--scaling", o.scaling, "Feature scaling fitted on the training split (auto: none for idx, minmax otherwise)")
      ->check(CLI::IsMember({"auto", "none", "minmax", "zscore"}));
  app->add_option("--split", o.ratios, "Train, validation and test fractions")->expected(3)->delimiter(',');
  app->add_option("--split-seed", o.split_seed, "Seed of the row shuffle before splitting");
  app->add_option("--dataset-name", o.name, "Name written to metrics rows (default: file stem)");
  app->add_option("--synth-n", o.synth_n, "synth: samples");
  app->add_option("--synth-blocks", o.synth_blocks, "synth: feature blocks");
  app->add_option("--synth-per-block", o.synth_per_block, "synth: features per block");
  app->add_option("--synth-noise", o.synth_noise, "synth: noise standard deviation");
  app->add_option("--synth-seed", o.synth_seed, "synth: generator seed");
}

void add_model_options(CLI::App* app, ModelOptions& o, bool with_method) {
  // --h is the group count, so help is long-form only.
  app->set_help_flag("--help", "Print this help message and exit");
  if (with_method) {
    app->add_option("--method", o.method, "Selector to train")->check(CLI::IsMember({"fae", "iae", "ae", "hfae"}));
  }
  app->add_option("--k", o.hp.k, "Features to select (per group for hfae)");
  app->add_option("--latent-dim", o.hp.d, "Latent width (default: k)");
  app->add_option("--lambda1", o.hp.lambda1, "fae: masked-path weight; iae: L1 weight");
  app->add_option("--lambda2", o.hp.lambda2, "fae: L1 weight");
  app->add_option("--epochs", o.hp.epochs, "Training epochs");
  app->add_option("--lr", o.hp.lr, "Adam learning rate");
  app->add_option("--batch", o.hp.batch, "Mini-batch size, 0 for full batch");
  app->add_option("--seed", o.hp.seed, "Initialization seed (repeats use seed, seed+1, ...)");
  app->add_option("--l1-mode", o.l1_mode, "L1 normalization")->check(CLI::IsMember({"mean", "sum"}));
  app->add_flag("--final-weights", o.final_weights, "Keep last-epoch weights instead of the best validation epoch");
  app->add_option("--profile", o.profile, "Preset k: opt1 or opt2")->check(CLI::IsMember({"opt1", "opt2"}));
  app->add_option("--family", o.family, "Dataset family for --profile")
      ->check(CLI::IsMember({"mice", "standard", "highdim"}));
  app->add_option("--repeats", o.repeats, "Number of seeds to run")->check(CLI::PositiveNumber);
  app->add_option("--h", o.hier.h, "hfae: number of groups");
  app->add_option("--lambda0", o.hier.lambda0, "hfae: L1 weight");
  app->add_option("--lambdas", o.lambdas, "hfae: per-group weights")->delimiter(',');
}

void add_eval_options(CLI::App* app, EvalOptions& o) {
  app->add_option("--trees", o.trees, "Extra-trees ensemble size")->check(CLI::PositiveNumber);
  app->add_option("--forest-seed", o.forest_seed, "Extra-trees seed");
  app->add_option("--on", o.on, "Split to score")->check(CLI::IsMember({"test", "train"}));
}

/// Applies --profile when --k was not given explicitly.
void resolve_model_options(CLI::App* app, ModelOptions& o) {
  if (!o.profile.empty() && app->count("--k") == 0) {
    const bool opt1 = o.profile == "opt1";
    if (o.family == "mice") o.hp.k = opt1 ? 10 : 8;
    if (o.family == "standard") o.hp.k = opt1 ? 50 : 36;
    if (o.family == "highdim") o.hp.k = opt1 ? 64 : 50;
  }
  o.hp.l1_mode = parse_l1_mode(o.l1_mode);
  o.hp.restore_best = !o.final_weights;
  o.hier.k = o.hp.k;
  o.hier.lambdas = o.lambdas;
  if (o.method == "hfae") o.hier.validate();
}

Dataset load_data(const DataOptions& o) {
  Dataset d;
  if (o.format == "synth") {
    d = synth_blocks(o.synth_n, o.synth_blocks, o.synth_per_block, o.synth_noise, o.synth_seed);
  } else if (o.path.empty()) {
    throw ContractError("--dataset is required for format " + o.format);
  } else if (o.format == "idx") {
    d = o.labels.empty() ? load_idx_images(o.path) : load_idx(o.path, o.labels);
  } else {
    std::optional<ColumnRef> col;
    if (!o.label_column.empty()) {
      const bool numeric = std::all_of(o.label_column.begin(), o.label_column.end(), ::isdigit);
      col = numeric ? ColumnRef{static_cast<Index>(std::stoll(o.label_column))} : ColumnRef{o.label_column};
    }
    d = load_csv(o.path, o.header, col);
  }
  return d;
}

std::string dataset_name(const DataOptions& o) {
  if (!o.name.empty()) return o.name;
  if (o.format == "synth") return "synth";
  return fs::path(o.path).stem().string();
}

ScalingMode scaling_mode(const DataOptions& o) {
  if (o.scaling == "auto") return o.format == "idx" ? ScalingMode::kNone : ScalingMode::kMinMax;
  return parse_scaling_mode(o.scaling);
}

SplitSpec split_spec(const DataOptions& o) {
  SplitSpec s;
  s.train = o.ratios.at(0);
  s.val = o.ratios.at(1);
  s.test = o.ratios.at(2);
  s.seed = o.split_seed;
  return s;
}

json hyperparams_json(const Hyperparams& hp) {
  return {{"k", hp.k},           {"d", hp.latent_dim()},   {"lambda1", hp.lambda1},
          {"lambda2", hp.lambda2}, {"lr", hp.lr},          {"epochs", hp.epochs},
          {"batch", hp.batch},   {"seed", hp.seed},        {"l1_mode", std::string(to_string(hp.l1_mode))},
          {"loss_scale", std::string(to_string(hp.loss_scale))},
          {"restore_best", hp.restore_best}};
}

json data_json(const DataOptions& o, const Dataset& d) {
  json j = {{"name", dataset_name(o)},
            {"format", o.format},
            {"source", d.provenance.source},
            {"samples", d.samples()},
            {"features", d.features()},
            {"missing_cells", d.provenance.missing_cells},
            {"scaling", to_string(scaling_mode(o))},
            {"split", {{"train", o.ratios[0]}, {"val", o.ratios[1]}, {"test", o.ratios[2]}, {"seed", o.split_seed}}}};
  if (o.format == "csv") {
    j["header"] = o.header;
    j["label_column"] = o.label_column;
  }
  if (o.format == "idx") j["labels"] = o.labels;
  if (o.format == "synth") {
    j["synth"] = {{"n", o.synth_n},
                  {"blocks", o.synth_blocks},
                  {"per_block", o.synth_per_block},
                  {"noise_std", o.synth_noise},
                  {"seed", o.synth_seed}};
  }
  return j;
}

json runtime_json(const std::vector<std::string>& args) {
  return {{"version", FAE_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"threads", Eigen::nbThreads()},
          {"rng_algorithm", SeededRng::kAlgorithm},
          {"argv", args}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

bool params_finite(const ModelParams& p) {
  return p.w.allFinite() && p.ed.enc.allFinite() && p.ed.dec.allFinite();
}

void check_metrics(const MetricsRow& row, bool labelled) {
  if (!std::isfinite(row.recon_mse) || (labelled && !std::isfinite(row.accuracy))) {
    throw NonFiniteOutput("non-finite metric for " + row.method + " k=" + std::to_string(row.k));
  }
}

struct Prepared {
  Dataset full;
  DatasetSplits splits;
};

Prepared prepare(const DataOptions& o) {
  Prepared p;
  p.full = load_data(o);
  p.splits = split(p.full, split_spec(o), scaling_mode(o));
  return p;
}

/// Metrics rows for every subset the checkpoint selects; hfae adds the union.
std::vector<MetricsRow> evaluate_checkpoint(const Checkpoint& ckpt, const Prepared& data, const DataOptions& dopt,
                                            const EvalOptions& eopt) {
  if (ckpt.params.w.size() != data.full.features()) {
    throw ContractError("checkpoint has " + std::to_string(ckpt.params.w.size()) + " features, dataset has " +
                        std::to_string(data.full.features()));
  }
  const Dataset& scored = eopt.on == "train" ? data.splits.train : data.splits.test;
  ExtraTreesParams forest;
  forest.n_trees = eopt.trees;
  forest.seed = eopt.forest_seed;
  const std::vector<SelectionResult> groups = checkpoint_selections(ckpt);
  std::vector<std::pair<std::string, SelectionResult>> named;
  if (groups.size() == 1) {
    named.emplace_back(ckpt.method, groups.front());
  } else {
    for (std::size_t g = 0; g < groups.size(); ++g) named.emplace_back(ckpt.method + "-g" + std::to_string(g + 1), groups[g]);
    named.emplace_back(ckpt.method + "-union", union_selection(groups));
  }
  std::vector<MetricsRow> rows;
  for (const auto& [name, sel] : named) {
    const SelectionMetrics m = evaluate_selection(data.splits.train, scored, sel, forest);
    MetricsRow row{dataset_name(dopt), name, static_cast<Index>(sel.indices.size()), ckpt.hp.seed, m.recon_mse,
                   m.accuracy};
    check_metrics(row, data.full.labels.has_value());
    rows.push_back(row);
  }
  return rows;
}

struct RunArtifacts {
  Checkpoint checkpoint;
  fs::path dir;
};

/// Trains one seed and writes its checkpoint, loss curve, selection and sidecar.
RunArtifacts train_one(const ModelOptions& mopt, const Hyperparams& hp, const Prepared& data, const DataOptions& dopt,
                       const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                       bool quiet) {
  fs::create_directories(dir);
  const std::optional<HierarchyParams> hier =
      mopt.method == "hfae" ? std::optional<HierarchyParams>(mopt.hier) : std::nullopt;
  TrainedModel trained;
  try {
    trained = train_method(mopt.method, data.splits.train.x, data.splits.val.x, hp, hier);
  } catch (const TrainingError& e) {
    write_loss_csv((dir / "loss.csv").string(), e.report());
    throw;
  }
  if (!params_finite(trained.checkpoint.params)) throw NonFiniteOutput("trained parameters are not finite");

  const fs::path ckpt_path = dir / "model.ckpt";
  write_checkpoint(ckpt_path.string(), trained.checkpoint);
  write_loss_csv((dir / "loss.csv").string(), trained.report);
  const std::vector<SelectionResult> groups = checkpoint_selections(trained.checkpoint);
  std::string selection_file;
  if (mopt.method == "hfae") {
    selection_file = "hierarchy.csv";
    write_hierarchy_csv((dir / selection_file).string(), HierarchicalSelection{groups});
  } else {
    selection_file = "selection.csv";
    write_selection_csv((dir / selection_file).string(), groups.front());
  }

  json meta = {{"command", command},
               {"method", mopt.method},
               {"hyperparams", hyperparams_json(hp)},
               {"dataset", data_json(dopt, data.full)},
               {"runtime", runtime_json(args)},
               {"training",
                {{"epochs_run", trained.report.epochs.size()},
                 {"best_epoch", trained.report.best_epoch < 0
                                    ? 0
                                    : trained.report.epochs[static_cast<std::size_t>(trained.report.best_epoch)].epoch},
                 {"checkpoint_epoch", trained.checkpoint.epoch},
                 {"initial_train_total", trained.report.initial_train_total},
                 {"initial_val_total", trained.report.initial_val_total},
                 {"final_train_total", trained.report.epochs.empty() ? trained.report.initial_train_total
                                                                     : trained.report.epochs.back().total},
                 {"final_val_total", trained.report.epochs.empty() ? trained.report.initial_val_total
                                                                   : trained.report.epochs.back().val_total},
                 {"wall_seconds", trained.report.wall_seconds}}},
               {"outputs", {{"checkpoint", "model.ckpt"}, {"loss", "loss.csv"}, {"selection", selection_file}}}};
  if (hier) {
    meta["hierarchy"] = {{"h", hier->h}, {"k", hier->k}, {"lambda0", hier->lambda0}, {"lambdas", hier->lambdas}};
  }
  write_json(dir / "metadata.json", meta);
  if (!quiet) {
    std::cerr << mopt.method << " seed " << hp.seed << ": " << trained.report.epochs.size() << " epochs in "
              << trained.report.wall_seconds << " s, wrote " << dir.string() << '\n';
  }
  return {trained.checkpoint, dir};
}

void emit_rows(const std::vector<MetricsRow>& rows, const std::string& metrics_path) {
  for (const auto& row : rows) {
    if (!metrics_path.empty()) append_metrics_row(metrics_path, row);
    std::cout << format_metrics_row(row) << '\n';
  }
}

int cmd_train(CLI::App* app, ModelOptions& mopt, const DataOptions& dopt, const EvalOptions& eopt,
              const std::string& out, const std::string& command, const std::vector<std::string>& args, bool quiet) {
  resolve_model_options(app, mopt);
  const Prepared data = prepare(dopt);
  for (int r = 0; r < mopt.repeats; ++r) {
    Hyperparams hp = mopt.hp;
    hp.seed = mopt.hp.seed + static_cast<std::uint64_t>(r);
    const fs::path dir = mopt.repeats > 1 ? fs::path(out) / ("seed-" + std::to_string(hp.seed)) : fs::path(out);
    const RunArtifacts run = train_one(mopt, hp, data, dopt, dir, command, args, quiet);
    if (!eopt.metrics.empty()) emit_rows(evaluate_checkpoint(run.checkpoint, data, dopt, eopt), eopt.metrics);
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const DataOptions& dopt, const EvalOptions& eopt) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const Prepared data = prepare(dopt);
  emit_rows(evaluate_checkpoint(ckpt, data, dopt, eopt), eopt.metrics);
  return 0;
}

int cmd_sweep(CLI::App* app, ModelOptions& mopt, const DataOptions& dopt, const EvalOptions& eopt,
              const std::vector<Index>& ks, const std::string& out, const std::vector<std::string>& args, bool quiet) {
  resolve_model_options(app, mopt);
  const Prepared data = prepare(dopt);
  const bool explicit_d = app->count("--latent-dim") > 0;
  fs::create_directories(out);
  std::ostringstream csv;
  csv << "k,recon_mse,accuracy,seed\n";
  for (const Index k : ks) {
    for (int r = 0; r < mopt.repeats; ++r) {
      Hyperparams hp = mopt.hp;
      hp.k = k;
      if (!explicit_d) hp.d = k;
      hp.seed = mopt.hp.seed + static_cast<std::uint64_t>(r);
      ModelOptions per_k = mopt;
      per_k.hier.k = k;
      if (per_k.method == "hfae") per_k.hier.validate();
      const fs::path dir = fs::path(out) / ("k" + std::to_string(k)) / ("seed-" + std::to_string(hp.seed));
      const RunArtifacts run = train_one(per_k, hp, data, dopt, dir, "sweep-k", args, quiet);
      const std::vector<MetricsRow> rows = evaluate_checkpoint(run.checkpoint, data, dopt, eopt);
      emit_rows(rows, eopt.metrics);
      // The sweep table carries one line per run: the union for hfae.
      const MetricsRow& row = rows.back();
      csv << k << ',' << format_real(row.recon_mse) << ',' << format_real(row.accuracy) << ',' << hp.seed << '\n';
    }
  }
  std::ofstream sweep(fs::path(out) / "sweep.csv");
  sweep << csv.str();
  if (!sweep) throw ParseError("cannot write sweep.csv in '" + out + "'");
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Linear fractal autoencoders for unsupervised feature selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FAE_VERSION);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "No progress output on stderr");

  DataOptions dopt;
  ModelOptions mopt;
  EvalOptions eopt;
  std::string out = "run";
  std::string checkpoint;
  std::vector<Index> ks;

  CLI::App* train = app.add_subcommand("train", "Train a selector and write its artifacts");
  add_data_options(train, dopt);
  add_model_options(train, mopt, true);
  add_eval_options(train, eopt);
  train->add_option("--metrics", eopt.metrics, "Also evaluate and append rows to this CSV");
  train->add_option("--out", out, "Output directory");

  CLI::App* hfae = app.add_subcommand("hfae", "Train an h-group hierarchical selector");
  add_data_options(hfae, dopt);
  add_model_options(hfae, mopt, false);
  add_eval_options(hfae, eopt);
  hfae->add_option("--metrics", eopt.metrics, "Also evaluate and append rows to this CSV");
  hfae->add_option("--out", out, "Output directory");

  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint's selection on a dataset split");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  add_data_options(eval, dopt);
  add_eval_options(eval, eopt);
  eval->add_option("--metrics", eopt.metrics, "Metrics CSV to append to")->required();

  CLI::App* sweep = app.add_subcommand("sweep-k", "Train and evaluate for several k");
  add_data_options(sweep, dopt);
  add_model_options(sweep, mopt, true);
  add_eval_options(sweep, eopt);
  sweep->add_option("--k-list", ks, "Values of k")->delimiter(',')->required();
  sweep->add_option("--metrics", eopt.metrics, "Also append full metrics rows here");
  sweep->add_option("--out", out, "Output directory (sweep.csv plus one run per k and seed)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(train, mopt, dopt, eopt, out, "train", args, quiet);
    if (*hfae) {
      mopt.method = "hfae";
      return cmd_train(hfae, mopt, dopt, eopt, out, "hfae", args, quiet);
    }
    if (*eval) return cmd_eval(checkpoint, dopt, eopt);
    if (*sweep) return cmd_sweep(sweep, mopt, dopt, eopt, ks, out, args, quiet);
  } catch (const NonFiniteOutput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonFinite;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace fae::cli
