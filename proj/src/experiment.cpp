#include "astprobe/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "astprobe/binarize.hpp"
#include "astprobe/byte_io.hpp"
#include "astprobe/checkpoint.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/predict.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace astprobe {

namespace {

std::string fixed(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

ExitStatus status_for(std::size_t skipped) {
  return skipped == 0 ? ExitStatus::kSuccess : ExitStatus::kPartial;
}

void log_exclusions(std::ostream& log, std::string_view what, std::span<const Exclusion> list) {
  for (const auto& x : list) log << what << ": skipped " << x.sample_id << " (" << x.reason << ")\n";
}

std::vector<TrainingSample> to_training(std::span<const LoadedSample> samples,
                                        const LabelVocab& c_vocab, const LabelVocab& u_vocab,
                                        std::vector<Exclusion>* excluded) {
  std::vector<TrainingSample> out;
  for (const auto& s : samples) {
    if (!covered_by(s.tuple, c_vocab, u_vocab)) {
      if (excluded) excluded->push_back({s.sample_id, "unseen_label"});
      continue;
    }
    out.push_back({s.sample_id, s.words, encode_labels(s.tuple, c_vocab, u_vocab)});
  }
  return out;
}

json train_config_json(const TrainConfig& c) {
  return {{"lr", c.lr},         {"lr_decay", c.lr_decay},     {"max_epochs", c.max_epochs},
          {"patience", c.patience}, {"lambda", c.lambda},     {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

json prf_json(const PrfScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"hits", s.hits},           {"n_pred", s.n_pred}, {"n_gold", s.n_gold}};
}

struct Splits {
  LoadedSplit train, validation, eval;
};

Splits load_splits(const fs::path& manifest_path, std::string_view eval_split, std::uint32_t layer) {
  const CorpusManifest manifest = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  return {load_split(manifest, dir, kTrainSplit, layer),
          load_split(manifest, dir, kValidationSplit, layer),
          load_split(manifest, dir, eval_split, layer)};
}

Eigen::Index ambient_dim_of(const Splits& splits) {
  for (const auto* split : {&splits.train, &splits.validation, &splits.eval}) {
    if (!split->samples.empty()) return split->samples.front().words.cols();
  }
  throw EmptyDataset("no samples could be loaded from the manifest");
}

/// Writes probe.astk + train_log.json; returns the number of skipped samples.
std::size_t write_training(const fs::path& out, const FittedProbe& fitted, const Splits& splits,
                           const TrainOptions& options, std::ostream& log) {
  log_exclusions(log, "train", splits.train.skipped);
  log_exclusions(log, "validation", splits.validation.skipped);
  log_exclusions(log, "validation", fitted.excluded);

  Checkpoint checkpoint{fitted.params, fitted.c_vocab, fitted.u_vocab, fitted.log, json::object()};
  checkpoint.meta = {{"manifest", options.manifest.generic_string()},
                     {"layer", options.layer},
                     {"subspace_dim", options.subspace_dim},
                     {"train_samples", splits.train.samples.size()},
                     {"train_config", train_config_json(options.train)}};
  write_checkpoint(out / "probe.astk", checkpoint);
  write_text_file(out / "train_log.json", to_json(fitted.log).dump(2) + "\n");
  log << "trained m2=" << options.subspace_dim << " layer=" << options.layer
      << " best_epoch=" << fitted.log.best_epoch << " (" << fitted.log.stop_reason << ")\n";
  return splits.train.skipped.size() + splits.validation.skipped.size() + fitted.excluded.size();
}

json summary_json(const Evaluation& e, std::string_view split, std::uint32_t layer,
                  Eigen::Index subspace_dim) {
  return {{"split", split},
          {"layer", layer},
          {"subspace_dim", subspace_dim},
          {"samples", e.corpus.samples()},
          {"excluded", e.excluded.size()},
          {"micro", prf_json(e.corpus.micro())},
          {"macro", prf_json(e.corpus.macro())}};
}

/// Writes scores.jsonl, metrics.csv and summary.json.
void write_evaluation(const fs::path& out, const Evaluation& e, std::string_view split,
                      std::uint32_t layer, Eigen::Index subspace_dim) {
  std::string scores;
  for (const auto& s : e.samples) scores += score_record(s.sample_id, s.score).dump() + "\n";
  write_text_file(out / "scores.jsonl", scores);

  std::string csv = "average,precision,recall,f1\n";
  const PrfScore micro = e.corpus.micro(), macro = e.corpus.macro();
  csv += "micro," + fixed(micro.precision) + "," + fixed(micro.recall) + "," + fixed(micro.f1) + "\n";
  csv += "macro," + fixed(macro.precision) + "," + fixed(macro.recall) + "," + fixed(macro.f1) + "\n";
  write_text_file(out / "metrics.csv", csv);
  write_text_file(out / "summary.json", summary_json(e, split, layer, subspace_dim).dump(2) + "\n");
}

struct SweepPoint {
  std::string name;  // subdirectory
  double x = 0;
  std::uint32_t layer = 0;
  Eigen::Index subspace_dim = 0;
  PrfScore micro;
  std::size_t skipped = 0;
};

std::size_t run_point(SweepPoint& point, const Splits& splits, const SweepOptions& options,
                      int inner_jobs, std::ostream& log) {
  TrainOptions t = options.base;
  t.layer = point.layer;
  t.subspace_dim = point.subspace_dim;
  t.train.jobs = inner_jobs;
  const fs::path dir = options.out / point.name;
  std::ostringstream point_log;
  const FittedProbe fitted = fit_probe(splits.train.samples, splits.validation.samples,
                                       t.subspace_dim, t.train);
  std::size_t skipped = write_training(dir, fitted, splits, t, point_log);
  const Evaluation e = evaluate(fitted.params, fitted.c_vocab, fitted.u_vocab, splits.eval.samples);
  write_evaluation(dir, e, options.split, t.layer, t.subspace_dim);
  log_exclusions(point_log, options.split, splits.eval.skipped);
  log_exclusions(point_log, options.split, e.excluded);
  skipped += splits.eval.skipped.size() + e.excluded.size();
  point.micro = e.corpus.micro();
  point_log << point.name << ": F1=" << fixed(point.micro.f1) << "\n";
  write_text_file(dir / "log.txt", point_log.str());
  log << point_log.str();
  return skipped;
}

void write_sweep(const fs::path& out, std::string_view x_name, const std::vector<SweepPoint>& points) {
  std::string csv = std::string(x_name) + ",precision,recall,f1\n";
  json x = json::array(), p = json::array(), r = json::array(), f = json::array();
  for (const auto& pt : points) {
    csv += pt.name.substr(pt.name.find('_') + 1) + "," + fixed(pt.micro.precision) + "," +
           fixed(pt.micro.recall) + "," + fixed(pt.micro.f1) + "\n";
    x.push_back(pt.x);
    p.push_back(pt.micro.precision);
    r.push_back(pt.micro.recall);
    f.push_back(pt.micro.f1);
  }
  write_text_file(out / "sweep.csv", csv);
  const json plot = {{"x_label", x_name}, {"x", x}, {"precision", p}, {"recall", r}, {"f1", f}};
  write_text_file(out / "plot.json", plot.dump(2) + "\n");
}

ExitStatus run_sweep(std::vector<SweepPoint> points, const SweepOptions& options,
                     std::string_view x_name, bool per_layer, std::ostream& log) {
  if (points.empty()) throw std::invalid_argument("sweep needs at least one point");
  const int jobs = std::max(options.jobs, 1);
  const int outer = std::min<int>(jobs, static_cast<int>(points.size()));
  const int inner = std::max(1, jobs / outer);

  std::vector<std::ostringstream> logs(points.size());
  std::vector<std::size_t> skipped(points.size(), 0);
  if (per_layer) {
    parallel_for(points.size(), outer, [&](std::size_t k) {
      const Splits splits = load_splits(options.base.manifest, options.split, points[k].layer);
      if (points[k].subspace_dim > ambient_dim_of(splits)) {
        throw DimensionError("subspace dimension exceeds the embedding dimension");
      }
      skipped[k] = run_point(points[k], splits, options, inner, logs[k]);
    });
  } else {
    const Splits splits = load_splits(options.base.manifest, options.split, options.base.layer);
    const Eigen::Index m1 = ambient_dim_of(splits);
    for (const auto& pt : points) {
      if (pt.subspace_dim > m1) {
        throw DimensionError("subspace dimension " + std::to_string(pt.subspace_dim) +
                             " exceeds the embedding dimension " + std::to_string(m1));
      }
    }
    parallel_for(points.size(), outer, [&](std::size_t k) {
      skipped[k] = run_point(points[k], splits, options, inner, logs[k]);
    });
  }
  std::size_t total_skipped = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    log << logs[k].str();
    total_skipped += skipped[k];
  }
  write_sweep(options.out, x_name, points);
  return status_for(total_skipped);
}

}  // namespace

ExitStatus combine(ExitStatus a, ExitStatus b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

FittedProbe fit_probe(std::span<const LoadedSample> train_split,
                      std::span<const LoadedSample> validation_split, Eigen::Index subspace_dim,
                      const TrainConfig& config) {
  if (train_split.empty()) throw EmptyDataset("training split is empty");
  std::vector<LabeledTuple> tuples;
  tuples.reserve(train_split.size());
  for (const auto& s : train_split) tuples.push_back(s.tuple);

  FittedProbe fitted;
  std::tie(fitted.c_vocab, fitted.u_vocab) = build_vocabs(tuples);
  const auto train_samples = to_training(train_split, fitted.c_vocab, fitted.u_vocab, nullptr);
  const auto validation_samples =
      to_training(validation_split, fitted.c_vocab, fitted.u_vocab, &fitted.excluded);

  const ProbeShape shape{train_split.front().words.cols(), subspace_dim,
                         static_cast<Eigen::Index>(fitted.c_vocab.size()),
                         static_cast<Eigen::Index>(fitted.u_vocab.size())};
  TrainResult result = train(train_samples, validation_samples, shape, config);
  fitted.params = std::move(result.params);
  fitted.log = std::move(result.log);
  return fitted;
}

Evaluation evaluate(const ProbeParams<float>& params, const LabelVocab& c_vocab,
                    const LabelVocab& u_vocab, std::span<const LoadedSample> samples,
                    bool gold_as_prediction) {
  Evaluation e;
  std::vector<const LoadedSample*> kept;
  for (const auto& s : samples) {
    if (covered_by(s.tuple, c_vocab, u_vocab)) {
      kept.push_back(&s);
    } else {
      e.excluded.push_back({s.sample_id, "unseen_label"});
    }
  }
  e.samples.resize(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const LoadedSample& s = *kept[k];
    const Ast gold = unbinarize(tuple_to_tree(s.tuple));
    const Ast pred = gold_as_prediction
                         ? gold
                         : predict_ast(params, s.words, c_vocab, u_vocab, s.tuple.tokens);
    e.samples[k] = {s.sample_id, score(pred, gold)};
  }
  for (const auto& s : e.samples) e.corpus.add(s.score);
  return e;
}

// ---------------------------------------------------------------------------

ExitStatus cmd_encode(const EncodeOptions& options, std::ostream& log) {
  ScanOptions scan_options;
  scan_options.embeddings_dir = options.embeddings_dir;
  scan_options.max_subwords = options.max_subwords;
  ScanResult scan = scan_corpus(options.corpus_dir, options.language, scan_options);
  log_exclusions(log, "encode", scan.excluded);
  if (scan.accepted.empty()) throw EmptyDataset("no sample of the corpus could be encoded");

  std::vector<std::string> ids;
  for (const auto& s : scan.accepted) ids.push_back(s.sample_id);
  const auto splits = assign_splits(ids, options.sizes, options.seed);

  CorpusManifest manifest;
  manifest.language = options.language;
  manifest.sizes = options.sizes;
  manifest.seed = options.seed;
  manifest.excluded = scan.excluded;
  for (std::size_t i = 0; i < scan.accepted.size(); ++i) {
    const auto& s = scan.accepted[i];
    const std::string tuples = "tuples/" + s.sample_id + ".json";
    write_sidecar(options.out / tuples, Sidecar{s.sample_id, s.tuple, s.parsed.token_ranges});
    if (splits[i].empty()) continue;
    manifest.samples.push_back({s.sample_id, splits[i], s.source.generic_string(), tuples,
                                s.embedding.generic_string(), fingerprint(s.parsed.ast),
                                s.parsed.token_ranges.size()});
  }
  write_manifest(options.out / "manifest.jsonl", manifest);
  log << "encoded " << scan.accepted.size() << " samples, excluded " << scan.excluded.size() << "\n";
  return status_for(scan.excluded.size());
}

ExitStatus cmd_train(const TrainOptions& options, std::ostream& log) {
  options.train.validate();
  const Splits splits = load_splits(options.manifest, kTestSplit, options.layer);
  const FittedProbe fitted = fit_probe(splits.train.samples, splits.validation.samples,
                                       options.subspace_dim, options.train);
  return status_for(write_training(options.out, fitted, splits, options, log));
}

ExitStatus cmd_eval(const EvalOptions& options, std::ostream& log) {
  const Checkpoint checkpoint = read_checkpoint(options.checkpoint);
  const std::uint32_t layer =
      options.layer.value_or(checkpoint.meta.value("layer", std::uint32_t{0}));
  const CorpusManifest manifest = read_manifest(options.manifest);
  const LoadedSplit split =
      load_split(manifest, options.manifest.parent_path(), options.split, layer);
  log_exclusions(log, options.split, split.skipped);

  const Evaluation e = evaluate(checkpoint.params, checkpoint.c_vocab, checkpoint.u_vocab,
                                split.samples, options.gold_as_prediction);
  log_exclusions(log, options.split, e.excluded);
  write_evaluation(options.out, e, options.split, layer, checkpoint.params.subspace_dim());
  const PrfScore micro = e.corpus.micro();
  log << options.split << ": " << e.corpus.samples() << " samples, micro P=" << fixed(micro.precision)
      << " R=" << fixed(micro.recall) << " F1=" << fixed(micro.f1) << "\n";
  return status_for(split.skipped.size() + e.excluded.size());
}

ExitStatus cmd_sweep_layers(const SweepOptions& options, std::ostream& log) {
  std::vector<SweepPoint> points;
  for (auto layer : options.layers) {
    points.push_back({"layer_" + std::to_string(layer), static_cast<double>(layer), layer,
                      options.base.subspace_dim, {}, 0});
  }
  return run_sweep(std::move(points), options, "layer", true, log);
}

ExitStatus cmd_sweep_dims(const SweepOptions& options, std::ostream& log) {
  std::vector<SweepPoint> points;
  for (auto m2 : options.subspace_dims) {
    if (m2 < 1) throw DimensionError("subspace dimensions must be positive");
    points.push_back({"dim_" + std::to_string(m2), static_cast<double>(m2), options.base.layer, m2,
                      {}, 0});
  }
  return run_sweep(std::move(points), options, "subspace_dim", false, log);
}

ExitStatus cmd_report(const fs::path& runs_dir, const fs::path& out, std::ostream& log) {
  std::vector<fs::path> summaries;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") {
      summaries.push_back(entry.path());
    }
  }
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty()) throw EmptyDataset("no summary.json below " + runs_dir.string());

  std::string csv = "run,split,layer,subspace_dim,samples,micro_p,micro_r,micro_f1,macro_p,macro_r,macro_f1\n";
  std::string md =
      "| run | split | layer | m2 | samples | P (micro) | R (micro) | F1 (micro) | F1 (macro) |\n"
      "|---|---|---|---|---|---|---|---|---|\n";
  ExitStatus status = ExitStatus::kSuccess;
  for (const auto& path : summaries) {
    std::string run = fs::relative(path.parent_path(), runs_dir).generic_string();
    if (run.empty()) run = ".";
    json s;
    try {
      s = json::parse(read_text_file(path));
      const auto& mi = s.at("micro");
      const auto& ma = s.at("macro");
      const std::string split = s.at("split").get<std::string>();
      const std::string layer = std::to_string(s.at("layer").get<std::uint32_t>());
      const std::string m2 = std::to_string(s.at("subspace_dim").get<long>());
      const std::string n = std::to_string(s.at("samples").get<std::size_t>());
      const auto v = [](const json& j, const char* key) { return fixed(j.at(key).get<double>()); };
      csv += run + "," + split + "," + layer + "," + m2 + "," + n + "," + v(mi, "precision") + "," +
             v(mi, "recall") + "," + v(mi, "f1") + "," + v(ma, "precision") + "," +
             v(ma, "recall") + "," + v(ma, "f1") + "\n";
      md += "| " + run + " | " + split + " | " + layer + " | " + m2 + " | " + n + " | " +
            v(mi, "precision") + " | " + v(mi, "recall") + " | " + v(mi, "f1") + " | " +
            v(ma, "f1") + " |\n";
    } catch (const json::exception& e) {
      log << "report: skipped " << path.generic_string() << " (" << e.what() << ")\n";
      status = ExitStatus::kPartial;
    }
  }
  write_text_file(out / "report.csv", csv);
  write_text_file(out / "report.md", md);
  log << "report: " << summaries.size() << " runs\n";
  return status;
}

void write_resolved_config(const fs::path& out, const std::map<std::string, std::string>& values) {
  std::string text;
  for (const auto& [key, value] : values) text += key + "=" + value + "\n";
  write_text_file(out / "config.resolved", text);
}

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> values;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  const auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw FormatError("config line " + std::to_string(number) + " is not key=value");
    }
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

}  // namespace astprobe
