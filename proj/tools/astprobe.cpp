// astprobe: batch front-end for encoding corpora, training and evaluating
// syntactic-subspace probes, and sweeping layers or subspace dimensions.
//
// Every setting has a built-in default, can be set through an environment
// variable ASTPROBE_<NAME> (dashes become underscores), overridden by a
// command-line flag, and finally by a key=value --config file. The resolved
// settings are echoed to <out>/config.resolved.

#include <CLI11.hpp>

#include <cctype>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "astprobe/byte_io.hpp"
#include "astprobe/errors.hpp"
#include "astprobe/experiment.hpp"
#include "astprobe/synthetic.hpp"

namespace fs = std::filesystem;
using namespace astprobe;

namespace {

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
  bool flag = false;
};

const std::vector<Key> kTrainKeys = {
    {"manifest", "", "corpus manifest (manifest.jsonl)"},
    {"layer", "0", "embedding layer to probe"},
    {"subspace-dim", "128", "dimension m2 of the syntactic subspace"},
    {"lambda", "5", "orthogonality penalty weight"},
    {"lr", "0.001", "initial learning rate"},
    {"lr-decay", "0.1", "learning-rate factor after a non-improving epoch"},
    {"max-epochs", "20", "epoch limit"},
    {"patience", "5", "non-improving epochs before stopping"},
    {"batch-size", "32", "sequences per mini-batch"},
    {"seed", "0", "random seed"},
    {"jobs", "1", "worker threads"},
    {"out", "", "output directory"},
};

std::vector<Key> with(std::vector<Key> keys, const std::vector<Key>& extra) {
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

const std::map<std::string, std::string> kSummaries = {
    {"encode", "parse a source corpus into gold tuples and a split manifest"},
    {"train", "fit a probe on one embedding layer"},
    {"eval", "predict trees for one split and score them"},
    {"sweep-layers", "train and evaluate one probe per layer"},
    {"sweep-dim", "train and evaluate one probe per subspace dimension"},
    {"report", "collect eval summaries into one table"},
    {"synth", "write a synthetic corpus with a planted syntactic subspace"},
};

const std::map<std::string, std::vector<Key>> kCommands = {
    {"encode",
     {{"corpus", "", "directory of source files"},
      {"language", "python", "grammar: python, go or javascript"},
      {"embeddings", "", "directory of <id>.astp containers to check against"},
      {"max-subwords", "512", "exclude samples with more subwords"},
      {"sizes", "20000,4000,2000", "train,test,validation sample counts"},
      {"seed", "0", "split seed"},
      {"out", "", "output directory"}}},
    {"train", kTrainKeys},
    {"eval",
     {{"checkpoint", "", "probe checkpoint (probe.astk)"},
      {"manifest", "", "corpus manifest"},
      {"split", "test", "split to evaluate"},
      {"layer", "", "embedding layer (default: the checkpoint's)"},
      {"gold-as-prediction", "false", "bypass the probe and decode the gold tuples", true},
      {"jobs", "1", "worker threads"},
      {"out", "", "output directory"}}},
    {"sweep-layers", with(kTrainKeys, {{"layers", "0", "comma-separated layer list"},
                                       {"split", "test", "split to evaluate"}})},
    {"sweep-dim", with(kTrainKeys, {{"dims", "8,16,32,64,128,256,512", "comma-separated m2 list"},
                                    {"split", "test", "split to evaluate"}})},
    {"report",
     {{"runs", "", "directory searched for summary.json files"},
      {"out", "", "output directory"}}},
    {"synth",
     {{"ambient-dim", "64", "word vector dimension m1"},
      {"planted-dim", "16", "dimension of the planted subspace"},
      {"unary-dims", "8", "planted coordinates reserved for unary labels"},
      {"noise-sigma", "0.1", "noise outside the planted subspace"},
      {"max-leaves", "30", "largest generated tree"},
      {"sizes", "600,100,100", "train,test,validation sample counts"},
      {"seed", "7", "generator seed"},
      {"noise-only", "false", "emit pure Gaussian vectors instead", true},
      {"out", "", "output directory"}}},
};

std::string env_name(const std::string& key) {
  std::string name = "ASTPROBE_";
  for (char ch : key) name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

std::string normalize_key(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return key;
}

class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const { return values_.at(key); }
  const std::string& required(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) throw std::invalid_argument("--" + key + " is required");
    return v;
  }
  long long integer(const std::string& key) const { return std::stoll(str(key)); }
  std::uint64_t u64(const std::string& key) const { return std::stoull(str(key)); }
  double real(const std::string& key) const { return std::stod(str(key)); }
  bool boolean(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    throw std::invalid_argument("--" + key + " expects true or false, got '" + v + "'");
  }
  std::vector<long long> list(const std::string& key) const {
    std::vector<long long> out;
    std::stringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) out.push_back(std::stoll(item));
    }
    return out;
  }
  SplitSizes sizes(const std::string& key) const {
    const auto v = list(key);
    if (v.size() != 3 || v[0] < 0 || v[1] < 0 || v[2] < 0) {
      throw std::invalid_argument("--" + key + " expects train,test,validation");
    }
    return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
            static_cast<std::size_t>(v[2])};
  }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

TrainOptions train_options(const Settings& s) {
  TrainOptions o;
  o.manifest = s.required("manifest");
  o.layer = static_cast<std::uint32_t>(s.integer("layer"));
  o.subspace_dim = static_cast<Eigen::Index>(s.integer("subspace-dim"));
  o.train.lambda = s.real("lambda");
  o.train.lr = s.real("lr");
  o.train.lr_decay = s.real("lr-decay");
  o.train.max_epochs = static_cast<int>(s.integer("max-epochs"));
  o.train.patience = static_cast<int>(s.integer("patience"));
  o.train.batch_size = static_cast<int>(s.integer("batch-size"));
  o.train.seed = s.u64("seed");
  o.train.jobs = static_cast<int>(s.integer("jobs"));
  o.out = s.required("out");
  o.train.validate();
  return o;
}

SweepOptions sweep_options(const Settings& s) {
  SweepOptions o;
  o.base = train_options(s);
  o.jobs = o.base.train.jobs;
  o.split = s.str("split");
  o.out = o.base.out;
  return o;
}

ExitStatus run(const std::string& command, const Settings& s) {
  if (command == "encode") {
    EncodeOptions o;
    o.corpus_dir = s.required("corpus");
    o.language = s.str("language");
    if (!s.str("embeddings").empty()) o.embeddings_dir = fs::path(s.str("embeddings"));
    o.max_subwords = static_cast<std::size_t>(s.integer("max-subwords"));
    o.sizes = s.sizes("sizes");
    o.seed = s.u64("seed");
    o.out = s.required("out");
    write_resolved_config(o.out, s.values());
    return cmd_encode(o, std::cerr);
  }
  if (command == "train") {
    const TrainOptions o = train_options(s);
    write_resolved_config(o.out, s.values());
    return cmd_train(o, std::cerr);
  }
  if (command == "eval") {
    EvalOptions o;
    o.checkpoint = s.required("checkpoint");
    o.manifest = s.required("manifest");
    o.split = s.str("split");
    if (!s.str("layer").empty()) o.layer = static_cast<std::uint32_t>(s.integer("layer"));
    o.gold_as_prediction = s.boolean("gold-as-prediction");
    o.jobs = static_cast<int>(s.integer("jobs"));
    o.out = s.required("out");
    write_resolved_config(o.out, s.values());
    return cmd_eval(o, std::cerr);
  }
  if (command == "sweep-layers") {
    SweepOptions o = sweep_options(s);
    for (auto layer : s.list("layers")) o.layers.push_back(static_cast<std::uint32_t>(layer));
    write_resolved_config(o.out, s.values());
    return cmd_sweep_layers(o, std::cerr);
  }
  if (command == "sweep-dim") {
    SweepOptions o = sweep_options(s);
    for (auto m2 : s.list("dims")) o.subspace_dims.push_back(static_cast<Eigen::Index>(m2));
    write_resolved_config(o.out, s.values());
    return cmd_sweep_dims(o, std::cerr);
  }
  if (command == "report") {
    const fs::path out = s.required("out");
    write_resolved_config(out, s.values());
    return cmd_report(s.required("runs"), out, std::cerr);
  }
  // synth
  PlantedOptions o;
  o.ambient_dim = static_cast<Eigen::Index>(s.integer("ambient-dim"));
  o.planted_dim = static_cast<Eigen::Index>(s.integer("planted-dim"));
  o.unary_dims = static_cast<Eigen::Index>(s.integer("unary-dims"));
  o.noise_sigma = s.real("noise-sigma");
  o.trees.max_leaves = static_cast<std::size_t>(s.integer("max-leaves"));
  o.sizes = s.sizes("sizes");
  o.seed = s.u64("seed");
  o.noise_only = s.boolean("noise-only");
  const fs::path out = s.required("out");
  write_resolved_config(out, s.values());
  const auto manifest = write_planted_corpus(out, make_planted_corpus(o), o);
  std::cerr << "synth: wrote " << manifest.samples.size() << " samples\n";
  return ExitStatus::kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover syntax trees from language-model hidden states with a linear probe"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value file overriding flags")->check(CLI::ExistingFile);

  // Defaults, then environment, then flags (bound below), then the config file.
  std::map<std::string, std::map<std::string, std::string>> values;
  for (const auto& [command, keys] : kCommands) {
    CLI::App* sub = app.add_subcommand(command, kSummaries.at(command));
    sub->add_option("--config", config_path, "key=value file overriding flags")
        ->check(CLI::ExistingFile);
    auto& v = values[command];
    for (const auto& key : keys) {
      const char* env = std::getenv(env_name(key.name).c_str());
      v[key.name] = env ? env : key.fallback;
      if (key.flag) {
        sub->add_flag_callback("--" + key.name, [&v, name = key.name] { v[name] = "true"; }, key.help);
      } else {
        sub->add_option("--" + key.name, v[key.name], key.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::kFatal);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  auto& v = values[command];
  try {
    if (!config_path.empty()) {
      for (const auto& [raw_key, value] : parse_config(read_text_file(config_path))) {
        const std::string key = normalize_key(raw_key);
        if (!v.contains(key)) throw FormatError("unknown config key '" + key + "' for " + command);
        v[key] = value;
      }
    }
    return static_cast<int>(run(command, Settings(v)));
  } catch (const std::exception& e) {
    std::cerr << "astprobe " << command << ": " << e.what() << "\n";
    return static_cast<int>(ExitStatus::kFatal);
  }
}
