#include "oapel/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oapel/error.hpp"
#include "oapel/evaluation.hpp"
#include "oapel/ontology.hpp"
#include "oapel/spectral.hpp"
#include "oapel/stats.hpp"

#ifndef OAPEL_VERSION
#define OAPEL_VERSION "unknown"
#endif

namespace oapel::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path, ErrorKind kind) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    const std::string msg = "'" + path + "' is not valid JSON: " + e.what();
    if (kind == ErrorKind::kUsage) throw UsageError(msg);
    throw DataError(msg);
  }
}

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void text(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw DataError("cannot write '" + path(name) + "'");
    out << content;
    std::cout << path(name) << '\n';
  }

  void json(const std::string& name, const nlohmann::json& j) const { text(name, j.dump(2) + "\n"); }

 private:
  std::string dir_;
};

void require_path(const std::string& value, const std::string& what) {
  if (value.empty()) throw UsageError("missing " + what);
}

Dataset load_data(const RunConfig& cfg) {
  require_path(cfg.features, "--features");
  require_path(cfg.labels, "--labels");
  return ingest_csv(cfg.features, cfg.labels, cfg.label_threshold);
}

ontology::OntologyGraph load_graph(const RunConfig& cfg, const std::vector<std::string>& feature_ids) {
  require_path(cfg.parcellation, "--parcellation (ontology of regions)");
  const auto parcellation = ontology::load_ontology(cfg.parcellation);
  const auto features = ontology::resolve_features(parcellation, feature_ids);
  if (!cfg.metrics.empty()) ontology::check_metrics_declared(ontology::load_ontology(cfg.metrics), features);
  return ontology::build_graph(features);
}

pipeline::HyperParams fixed_hyper(const RunConfig& cfg) { return {cfg.ensemble.meta.l2, cfg.ensemble.boost.max_depth}; }

baselines::BaselineConfig baseline_config(const RunConfig& cfg) {
  auto b = cfg.baselines;
  b.ensemble = cfg.ensemble;
  return b;
}

evaluation::ReplicationOptions replication_options(const RunConfig& cfg) {
  evaluation::ReplicationOptions o;
  o.replications = cfg.replications;
  o.nested = cfg.nested;
  o.grid.meta_l2 = cfg.lambda_grid;
  o.grid.max_depth = cfg.depth_grid;
  o.fixed = fixed_hyper(cfg);
  o.threshold = cfg.decision_threshold;
  o.threads = cfg.threads;
  return o;
}

// Config snapshot embedded in reports; the output location is left out so
// reruns into another directory produce identical files.
nlohmann::json report_config(const RunConfig& cfg) {
  auto j = to_json(cfg);
  j["paths"].erase("out_dir");
  return j;
}

bool needs_graph(const std::string& model) { return model == "OAP-EL"; }

struct ModelContext {
  std::optional<ontology::OntologyGraph> graph;
  std::optional<FeatureSubsets> forced;
};

ModelContext model_context(const RunConfig& cfg, const Dataset& data, const std::vector<std::string>& models) {
  ModelContext ctx;
  if (!cfg.forced_partition.empty()) {
    const auto p = spectral::partition_from_json(read_json(cfg.forced_partition, ErrorKind::kData), data.feature_ids);
    ctx.forced = p.subsets();
    return ctx;
  }
  for (const auto& m : models)
    if (needs_graph(m)) {
      ctx.graph = load_graph(cfg, data.feature_ids);
      break;
    }
  return ctx;
}

evaluation::Trainer trainer_for(const std::string& name, const RunConfig& cfg, const ModelContext& ctx) {
  return evaluation::make_trainer(name, baseline_config(cfg), ctx.graph ? &*ctx.graph : nullptr, cfg.k,
                                  ctx.forced ? &*ctx.forced : nullptr);
}

pipeline::EnsembleModel train_model(const RunConfig& cfg, const Dataset& data) {
  if (cfg.model != "OAP-EL" && cfg.model != "AB-EL")
    throw UsageError("train: only OAP-EL and AB-EL models can be saved (got '" + cfg.model + "')");
  const auto ctx = model_context(cfg, data, {cfg.model});
  if (ctx.forced) return pipeline::train_with_subsets(data, *ctx.forced, "forced", cfg.ensemble, cfg.seed);
  if (cfg.model == "AB-EL") return pipeline::train_ab_el(data, cfg.k, cfg.ensemble.ab_subset_size, cfg.ensemble, cfg.seed);
  return pipeline::train_oap_el(data, *ctx.graph, cfg.k, cfg.ensemble, cfg.seed);
}

pipeline::EnsembleModel load_model(const RunConfig& cfg) {
  require_path(cfg.model_path, "--model-file");
  return pipeline::ensemble_from_json(read_json(cfg.model_path, ErrorKind::kData));
}

void cmd_synth(const RunConfig& cfg, const Outputs& out) {
  auto spec = cfg.synth;
  spec.seed = cfg.seed;
  const auto s = synthdata::generate(spec);
  write_csv(s.data, out.path("features.csv"), out.path("labels.csv"));
  std::cout << out.path("features.csv") << '\n' << out.path("labels.csv") << '\n';
  out.text("parcellation.onto", ontology::serialize_ontology(s.parcellation));
  out.text("metrics.onto", ontology::serialize_ontology(s.metrics));
  out.json("graph.json", ontology::graph_to_json(s.graph));
}

void cmd_graph(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  out.json("graph.json", ontology::graph_to_json(load_graph(cfg, data.feature_ids)));
}

void cmd_partition(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  const auto graph = load_graph(cfg, data.feature_ids);
  const auto p = spectral::spectral_partition(graph, cfg.k, pipeline::spectral_seed(cfg.seed), cfg.ensemble.laplacian);
  out.json("partition.json", spectral::partition_to_json(p, graph.ids()));
}

void cmd_train(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  out.json("model.json", pipeline::to_json(train_model(cfg, data)));
}

std::string ranking_csv(const std::vector<pipeline::RankedFeature>& ranked) {
  std::ostringstream s;
  s << "feature_id,region,metric,score\n";
  for (const auto& r : ranked) s << r.id << ',' << r.region << ',' << r.metric << ',' << format_double(r.score) << '\n';
  return s.str();
}

void cmd_rank(const RunConfig& cfg, const Outputs& out) {
  const auto model = cfg.model_path.empty() ? train_model(cfg, load_data(cfg)) : load_model(cfg);
  out.text("ranking.csv", ranking_csv(pipeline::rank_features(model)));
}

void cmd_evaluate(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  const auto ctx = model_context(cfg, data, {cfg.model});
  auto report = evaluation::run_replications(cfg.model, data, trainer_for(cfg.model, cfg, ctx), replication_options(cfg), cfg.seed);
  report.config = report_config(cfg);
  out.json("report.json", evaluation::to_json(report));
}

void cmd_sweep_k(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  const auto graph = load_graph(cfg, data.feature_ids);
  const auto k_max = std::min(cfg.k_max, data.features());
  if (k_max < cfg.k_max)
    std::cerr << "note: k range capped at the feature count " << k_max << '\n';
  if (cfg.k_min > k_max) throw UsageError("k_min exceeds the usable k range");
  std::vector<std::size_t> ks;
  for (auto k = cfg.k_min; k <= k_max; ++k) ks.push_back(k);
  const auto s = evaluation::sweep_k(data, graph, ks, cfg.sweep_replications, cfg.ensemble, fixed_hyper(cfg), cfg.seed,
                                     cfg.threads);
  std::ostringstream csv;
  csv << "k,mean_auc,sd_auc\n";
  for (std::size_t i = 0; i < s.ks.size(); ++i)
    csv << s.ks[i] << ',' << format_double(s.mean_auc[i]) << ',' << format_double(s.sd_auc[i]) << '\n';
  out.text("sweep.csv", csv.str());
  out.json("sweep.json", {{"k", s.ks}, {"mean_auc", s.mean_auc}, {"sd_auc", s.sd_auc}, {"best_k", s.best_k}});
}

void cmd_kappa(const RunConfig& cfg, const Outputs& out) {
  const auto data = load_data(cfg);
  std::vector<Labels> preds;
  Labels labels;
  if (!cfg.model_path.empty()) {
    const auto model = load_model(cfg);
    const auto aligned = pipeline::align_features(data, model.feature_ids);
    preds.assign(model.k(), Labels(aligned.size()));
    for (Eigen::Index r = 0; r < aligned.x.rows(); ++r) {
      const auto p = pipeline::base_probabilities(model, row_span(aligned.x, r));
      for (std::size_t i = 0; i < p.size(); ++i) preds[i][static_cast<std::size_t>(r)] = p[i] >= cfg.decision_threshold;
    }
    labels = aligned.y;
  } else {
    const auto ctx = model_context(cfg, data, {cfg.model});
    const auto res = evaluation::loocv(data, trainer_for(cfg.model, cfg, ctx), fixed_hyper(cfg), cfg.seed, cfg.threads);
    preds = evaluation::base_predictions(res, cfg.decision_threshold);
    labels = res.labels;
  }
  if (preds.size() < 2) throw UsageError("kappa: model '" + cfg.model + "' has fewer than 2 base classifiers");
  const auto cloud = evaluation::kappa_error_cloud(preds, labels);
  out.text("kappa.csv", evaluation::kappa_cloud_csv(cloud));
  out.json("kappa.json", {{"pairs", cloud.size()}, {"mean_kappa", evaluation::mean_kappa(cloud)}});
}

void cmd_compare(const RunConfig& cfg, const Outputs& out) {
  if (cfg.models.size() < 2) throw UsageError("compare: need at least two models");
  const auto data = load_data(cfg);
  const auto ctx = model_context(cfg, data, cfg.models);
  const auto opts = replication_options(cfg);
  std::vector<evaluation::ExperimentReport> reports;
  for (const auto& m : cfg.models) {
    reports.push_back(evaluation::run_replications(m, data, trainer_for(m, cfg, ctx), opts, cfg.seed));
    std::cerr << m << ": mean AUC " << reports.back().summary.mean.auc << '\n';
  }
  using Getter = double (*)(const evaluation::Replication&);
  const std::vector<std::pair<std::string, Getter>> metrics = {
      {"accuracy", [](const evaluation::Replication& r) { return r.metrics.accuracy; }},
      {"sensitivity", [](const evaluation::Replication& r) { return r.metrics.sensitivity; }},
      {"specificity", [](const evaluation::Replication& r) { return r.metrics.specificity; }},
      {"auc", [](const evaluation::Replication& r) { return r.metrics.auc; }},
  };
  nlohmann::json tests = nlohmann::json::array();
  const auto& ref = reports.front();
  for (std::size_t m = 1; m < reports.size(); ++m) {
    for (const auto& [name, get] : metrics) {
      std::vector<double> a, b;
      for (std::size_t r = 0; r < ref.replications.size(); ++r) {
        a.push_back(get(ref.replications[r]));
        b.push_back(get(reports[m].replications[r]));
      }
      nlohmann::json t{{"a", ref.model}, {"b", reports[m].model}, {"metric", name}};
      if (a.size() < 2) {
        t["error"] = "paired t-test needs at least 2 replications";
      } else {
        try {
          const auto res = stats::t_test_paired(a, b);
          t["t"] = res.statistic;
          t["p"] = res.p_value;
          t["df"] = res.df;
        } catch (const NumericalError& e) {
          t["error"] = e.what();
        }
      }
      tests.push_back(std::move(t));
    }
  }
  nlohmann::json reps = nlohmann::json::array();
  for (auto& r : reports) reps.push_back(evaluation::to_json(r));
  out.json("compare.json", {{"config", report_config(cfg)}, {"reports", std::move(reps)}, {"paired_t_tests", std::move(tests)}});
}

void cmd_external_validate(const RunConfig& cfg, const Outputs& out) {
  const auto model = load_model(cfg);
  const auto data = pipeline::align_features(load_data(cfg), model.feature_ids);
  const auto probs = pipeline::predict_batch(model, data.x);
  std::ostringstream csv;
  csv << "subject_id,probability,label\n";
  for (std::size_t i = 0; i < probs.size(); ++i) csv << data.subject_ids[i] << ',' << format_double(probs[i]) << ',' << data.y[i] << '\n';
  out.text("predictions.csv", csv.str());
  out.json("external.json", {{"subjects", data.size()},
                             {"metrics", evaluation::to_json(evaluation::classify_metrics(probs, data.y, cfg.decision_threshold))}});
}

using Command = void (*)(const RunConfig&, const Outputs&);

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table = {
      {"synth", cmd_synth},       {"graph", cmd_graph},     {"partition", cmd_partition},
      {"train", cmd_train},       {"evaluate", cmd_evaluate}, {"sweep-k", cmd_sweep_k},
      {"rank", cmd_rank},         {"kappa", cmd_kappa},     {"compare", cmd_compare},
      {"external-validate", cmd_external_validate},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  ensemble.validate();
  baseline_config(*this).validate();
  synth.validate();
  if (k < 1) throw UsageError("k must be >= 1");
  if (lambda_grid.empty() || depth_grid.empty()) throw UsageError("hyperparameter grids must not be empty");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw UsageError("lambda grid values must be >= 0");
  for (int d : depth_grid)
    if (d < 1) throw UsageError("depth grid values must be >= 1");
  if (replications < 1 || sweep_replications < 1) throw UsageError("replications must be >= 1");
  if (k_min < 1 || k_min > k_max) throw UsageError("k range must satisfy 1 <= k_min <= k_max");
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) throw UsageError("decision_threshold must be in (0, 1)");
  if (!std::isfinite(label_threshold)) throw UsageError("label_threshold must be finite");
  if (threads < 1) throw UsageError("threads must be >= 1");
  const auto names = evaluation::model_names();
  for (const auto& m : models)
    if (std::find(names.begin(), names.end(), m) == names.end()) throw UsageError("unknown model '" + m + "'");
  if (std::find(names.begin(), names.end(), model) == names.end()) throw UsageError("unknown model '" + model + "'");
}

nlohmann::json to_json(const RunConfig& c) {
  auto synth = synthdata::to_json(c.synth);
  synth.erase("seed");
  return {{"seed", c.seed},
          {"k", c.k},
          {"model", c.model},
          {"models", c.models},
          {"lambda_grid", c.lambda_grid},
          {"depth_grid", c.depth_grid},
          {"nested", c.nested},
          {"replications", c.replications},
          {"k_min", c.k_min},
          {"k_max", c.k_max},
          {"sweep_replications", c.sweep_replications},
          {"label_threshold", c.label_threshold},
          {"decision_threshold", c.decision_threshold},
          {"threads", c.threads},
          {"ensemble", pipeline::to_json(c.ensemble)},
          {"baselines", baselines::to_json(c.baselines)},
          {"synth", std::move(synth)},
          {"paths",
           {{"features", c.features},
            {"labels", c.labels},
            {"parcellation", c.parcellation},
            {"metrics", c.metrics},
            {"model", c.model_path},
            {"forced_partition", c.forced_partition},
            {"out_dir", c.out_dir}}}};
}

RunConfig run_config_from_json(const nlohmann::json& in) {
  if (!in.is_object()) throw UsageError("config must be a JSON object");
  const auto& j = in.contains("command") && in.contains("config") ? in.at("config") : in;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig c;
  if (j.contains("ensemble")) c.ensemble = pipeline::ensemble_config_from_json(j.at("ensemble"));
  if (j.contains("baselines")) c.baselines = baselines::baseline_config_from_json(j.at("baselines"), c.ensemble);
  for (const auto& [key, v] : j.items()) {
    if (key == "ensemble" || key == "baselines") continue;
    if (key == "seed")
      c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "k")
      c.k = get_as<std::size_t>(v, key);
    else if (key == "model")
      c.model = get_as<std::string>(v, key);
    else if (key == "models")
      c.models = get_as<std::vector<std::string>>(v, key);
    else if (key == "lambda_grid")
      c.lambda_grid = get_as<std::vector<double>>(v, key);
    else if (key == "depth_grid")
      c.depth_grid = get_as<std::vector<int>>(v, key);
    else if (key == "nested")
      c.nested = get_as<bool>(v, key);
    else if (key == "replications")
      c.replications = get_as<std::size_t>(v, key);
    else if (key == "k_min")
      c.k_min = get_as<std::size_t>(v, key);
    else if (key == "k_max")
      c.k_max = get_as<std::size_t>(v, key);
    else if (key == "sweep_replications")
      c.sweep_replications = get_as<std::size_t>(v, key);
    else if (key == "label_threshold")
      c.label_threshold = get_as<double>(v, key);
    else if (key == "decision_threshold")
      c.decision_threshold = get_as<double>(v, key);
    else if (key == "threads")
      c.threads = get_as<int>(v, key);
    else if (key == "synth") {
      if (v.is_object() && v.contains("seed")) throw UsageError("config key 'synth.seed': the top-level seed drives generation");
      c.synth = synthdata::synth_spec_from_json(v);
    } else if (key == "paths") {
      if (!v.is_object()) throw UsageError("config key 'paths' must be an object");
      for (const auto& [pk, pv] : v.items()) {
        const auto val = get_as<std::string>(pv, "paths." + pk);
        if (pk == "features")
          c.features = val;
        else if (pk == "labels")
          c.labels = val;
        else if (pk == "parcellation")
          c.parcellation = val;
        else if (pk == "metrics")
          c.metrics = val;
        else if (pk == "model")
          c.model_path = val;
        else if (pk == "forced_partition")
          c.forced_partition = val;
        else if (pk == "out_dir")
          c.out_dir = val;
        else
          throw UsageError("unknown config key 'paths." + pk + "'");
      }
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : commands()) n.push_back(name);
    return n;
  }();
  return names;
}

std::string version() { return OAPEL_VERSION; }

int run(int argc, char** argv) {
  CLI::App app{"Ontology-guided attribute partitioning ensemble learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  struct Flags {
    std::string config, out, model, features, labels, parcellation, metrics, model_file, forced, stacking;
    std::vector<std::string> models;
    std::uint64_t seed = 0;
    std::size_t k = 0, replications = 0, k_min = 0, k_max = 0, sweep_reps = 0;
    int threads = 0;
    double label_threshold = 0.0;
    bool nested = false, no_nested = false;
  } f;

  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const auto& name : command_names()) {
    auto* s = app.add_subcommand(name);
    s->add_option("--config", f.config, "JSON config or a previous run's manifest.json")->check(CLI::ExistingFile);
    s->add_option("--out", f.out, "output directory");
    s->add_option("--seed", f.seed, "master seed");
    s->add_option("--k", f.k, "number of feature subsets");
    s->add_option("--model", f.model, "model name (OAP-EL, AB-EL, KNN, LR, SVM, DT, RF, NN, Voting, Bagging, Stacking)");
    s->add_option("--models", f.models, "models to compare; the first is the reference")->delimiter(',');
    s->add_option("--replications", f.replications, "experiment replications");
    s->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
    s->add_option("--features", f.features, "features CSV");
    s->add_option("--labels", f.labels, "labels CSV");
    s->add_option("--parcellation", f.parcellation, "region ontology");
    s->add_option("--metrics", f.metrics, "metric ontology");
    s->add_option("--model-file", f.model_file, "saved model JSON");
    s->add_option("--forced-partition", f.forced, "partition JSON used by both ensemble arms");
    s->add_option("--k-min", f.k_min, "first k of the sweep");
    s->add_option("--k-max", f.k_max, "last k of the sweep");
    s->add_option("--sweep-replications", f.sweep_reps, "replications per k in the sweep");
    s->add_option("--label-threshold", f.label_threshold, "score at or below which a subject is positive");
    s->add_option("--stacking", f.stacking, "in_fold or out_of_fold");
    s->add_flag("--nested", f.nested, "nested LOOCV hyperparameter selection");
    s->add_flag("--no-nested", f.no_nested, "plain LOOCV at the configured hyperparameters");
    subs.emplace_back(name, s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  try {
    std::string command;
    CLI::App* sub = nullptr;
    for (const auto& [name, s] : subs)
      if (s->parsed()) {
        command = name;
        sub = s;
      }
    const auto given = [&](const char* opt) { return sub->count(opt) > 0; };

    RunConfig cfg = f.config.empty() ? RunConfig{} : run_config_from_json(read_json(f.config, ErrorKind::kUsage));
    if (given("--out")) cfg.out_dir = f.out;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--k")) cfg.k = f.k;
    if (given("--model")) cfg.model = f.model;
    if (given("--models")) cfg.models = f.models;
    if (given("--replications")) cfg.replications = f.replications;
    if (given("--threads")) cfg.threads = f.threads;
    if (given("--features")) cfg.features = f.features;
    if (given("--labels")) cfg.labels = f.labels;
    if (given("--parcellation")) cfg.parcellation = f.parcellation;
    if (given("--metrics")) cfg.metrics = f.metrics;
    if (given("--model-file")) cfg.model_path = f.model_file;
    if (given("--forced-partition")) cfg.forced_partition = f.forced;
    if (given("--k-min")) cfg.k_min = f.k_min;
    if (given("--k-max")) cfg.k_max = f.k_max;
    if (given("--sweep-replications")) cfg.sweep_replications = f.sweep_reps;
    if (given("--label-threshold")) cfg.label_threshold = f.label_threshold;
    if (given("--stacking")) cfg.ensemble.stacking = pipeline::parse_stacking_mode(f.stacking);
    if (f.nested && f.no_nested) throw UsageError("--nested and --no-nested are exclusive");
    if (f.nested) cfg.nested = true;
    if (f.no_nested) cfg.nested = false;
    cfg.baselines.ensemble = cfg.ensemble;
    cfg.validate();

    const Outputs out(cfg.out_dir);
    out.json("manifest.json", {{"command", command}, {"version", version()}, {"config", to_json(cfg)}});
    for (const auto& [name, fn] : commands())
      if (name == command) fn(cfg, out);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kNumerical);
  }
}

}  // namespace oapel::cli
