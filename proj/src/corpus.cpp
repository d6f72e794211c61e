#include "astprobe/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "astprobe/binarize.hpp"
#include "astprobe/byte_io.hpp"
#include "astprobe/embedding_io.hpp"
#include "astprobe/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace astprobe {

std::pair<LabelVocab, LabelVocab> build_vocabs(std::span<const LabeledTuple> training) {
  LabelVocab c_vocab, u_vocab;
  for (const auto& tuple : training) {
    for (const auto& label : tuple.c) c_vocab.intern(label);
    for (const auto& label : tuple.u) u_vocab.intern(label);
  }
  c_vocab.freeze();
  u_vocab.freeze();
  return {std::move(c_vocab), std::move(u_vocab)};
}

bool covered_by(const LabeledTuple& tuple, const LabelVocab& c_vocab, const LabelVocab& u_vocab) {
  return std::all_of(tuple.c.begin(), tuple.c.end(),
                     [&](const std::string& l) { return c_vocab.contains(l); }) &&
         std::all_of(tuple.u.begin(), tuple.u.end(),
                     [&](const std::string& l) { return u_vocab.contains(l); });
}

// ---------------------------------------------------------------------------

std::string encode_sidecar(const Sidecar& sidecar) {
  json ranges = json::array();
  for (const auto& r : sidecar.token_ranges) ranges.push_back({r.begin, r.end});
  json j = {{"sample_id", sidecar.sample_id},
            {"tokens", sidecar.tuple.tokens},
            {"d", sidecar.tuple.distances},
            {"c", sidecar.tuple.c},
            {"u", sidecar.tuple.u},
            {"height", sidecar.tuple.height},
            {"token_ranges", ranges}};
  return j.dump() + "\n";
}

Sidecar decode_sidecar(std::string_view text) {
  try {
    const json j = json::parse(text);
    Sidecar s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.tuple.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.tuple.distances = j.at("d").get<std::vector<int>>();
    s.tuple.c = j.at("c").get<std::vector<std::string>>();
    s.tuple.u = j.at("u").get<std::vector<std::string>>();
    s.tuple.height = j.at("height").get<int>();
    for (const auto& r : j.value("token_ranges", json::array())) {
      s.token_ranges.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
    }
    const auto& t = s.tuple;
    if (t.u.empty() || t.distances.size() != t.c.size() || t.c.size() + 1 != t.u.size() ||
        t.tokens.size() != t.u.size()) {
      throw LengthMismatch("sidecar '" + s.sample_id + "' has inconsistent tuple lengths");
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("sidecar: ") + e.what());
  }
}

void write_sidecar(const fs::path& path, const Sidecar& sidecar) {
  write_text_file(path, encode_sidecar(sidecar));
}

Sidecar read_sidecar(const fs::path& path) { return decode_sidecar(read_text_file(path)); }

// ---------------------------------------------------------------------------

std::vector<ManifestEntry> CorpusManifest::split(std::string_view name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : samples) {
    if (e.split == name) out.push_back(e);
  }
  return out;
}

bool CorpusManifest::operator==(const CorpusManifest& other) const {
  return language == other.language && sizes.train == other.sizes.train &&
         sizes.test == other.sizes.test && sizes.validation == other.sizes.validation &&
         seed == other.seed && samples == other.samples && excluded == other.excluded;
}

std::string encode_manifest(const CorpusManifest& m) {
  std::string out;
  const json header = {{"kind", "header"},
                       {"language", m.language},
                       {"seed", m.seed},
                       {"sizes", {{"train", m.sizes.train},
                                  {"test", m.sizes.test},
                                  {"validation", m.sizes.validation}}}};
  out += header.dump() + "\n";
  for (const auto& e : m.samples) {
    const json line = {{"kind", "sample"},           {"sample_id", e.sample_id},
                       {"split", e.split},           {"source", e.source},
                       {"tuples", e.tuples},         {"embedding", e.embedding},
                       {"ast_fingerprint", e.ast_fingerprint}, {"n_tokens", e.n_tokens}};
    out += line.dump() + "\n";
  }
  for (const auto& x : m.excluded) {
    out += json{{"kind", "excluded"}, {"sample_id", x.sample_id}, {"reason", x.reason}}.dump() + "\n";
  }
  return out;
}

CorpusManifest decode_manifest(std::string_view text) {
  CorpusManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        m.language = j.at("language").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        const auto& sizes = j.at("sizes");
        m.sizes = {sizes.at("train").get<std::size_t>(), sizes.at("test").get<std::size_t>(),
                   sizes.at("validation").get<std::size_t>()};
        have_header = true;
      } else if (kind == "sample") {
        ManifestEntry e;
        e.sample_id = j.at("sample_id").get<std::string>();
        e.split = j.at("split").get<std::string>();
        e.source = j.at("source").get<std::string>();
        e.tuples = j.at("tuples").get<std::string>();
        e.embedding = j.at("embedding").get<std::string>();
        e.ast_fingerprint = j.at("ast_fingerprint").get<std::string>();
        e.n_tokens = j.at("n_tokens").get<std::size_t>();
        m.samples.push_back(std::move(e));
      } else if (kind == "excluded") {
        m.excluded.push_back({j.at("sample_id").get<std::string>(), j.at("reason").get<std::string>()});
      } else {
        throw FormatError("manifest line of unknown kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (!have_header) throw FormatError("manifest has no header line");
  return m;
}

void write_manifest(const fs::path& path, const CorpusManifest& manifest) {
  write_text_file(path, encode_manifest(manifest));
}

CorpusManifest read_manifest(const fs::path& path) {
  return decode_manifest(read_text_file(path));
}

// ---------------------------------------------------------------------------

ScanResult scan_corpus(const fs::path& corpus_dir, std::string_view language,
                       const ScanOptions& options) {
  const std::string ext = "." + std::string(source_extension(language));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  ScanResult result;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    EncodedSample sample;
    sample.sample_id = id;
    sample.source = fs::absolute(file).lexically_normal();
    try {
      sample.parsed = parse_source_with_ranges(read_text_file(file), language);
    } catch (const ParseError& e) {
      result.excluded.push_back({id, std::string("parse_error: ") + e.what()});
      continue;
    }
    const auto tokens = sample.parsed.token_ranges.size();
    if (tokens < 2) {
      result.excluded.push_back({id, "too_few_tokens"});
      continue;
    }
    if (options.embeddings_dir) {
      sample.embedding = fs::absolute(*options.embeddings_dir / (id + ".astp")).lexically_normal();
      if (!fs::exists(sample.embedding)) {
        result.excluded.push_back({id, "missing_embedding"});
        continue;
      }
      EmbeddingRecord record;
      try {
        record = read_embeddings(sample.embedding);
        if (!record.layers.empty()) validate_spans(record.word_spans, record.layers[0].subwords.rows());
      } catch (const Error& e) {
        result.excluded.push_back({id, std::string("bad_embedding: ") + e.what()});
        continue;
      }
      const auto subwords = record.layers.empty() ? 0 : record.layers[0].subwords.rows();
      if (static_cast<std::size_t>(subwords) > options.max_subwords) {
        result.excluded.push_back({id, "subword_limit"});
        continue;
      }
      if (record.word_spans.size() != tokens) {
        result.excluded.push_back({id, "alignment_mismatch"});
        continue;
      }
    }
    sample.tuple = tree_to_labels(binarize(sample.parsed.ast));
    result.accepted.push_back(std::move(sample));
  }
  return result;
}

std::vector<std::string> assign_splits(std::span<const std::string> ids, const SplitSizes& sizes,
                                       std::uint64_t seed) {
  if (ids.size() < sizes.total()) {
    throw InsufficientData("need " + std::to_string(sizes.total()) + " samples, have " +
                           std::to_string(ids.size()));
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::string> splits(ids.size());
  for (std::size_t k = 0; k < sizes.total(); ++k) {
    const auto& name = k < sizes.train                ? kTrainSplit
                       : k < sizes.train + sizes.test ? kTestSplit
                                                      : kValidationSplit;
    splits[order[k]] = std::string(name);
  }
  return splits;
}

CorpusManifest make_manifest(const fs::path& corpus_dir, std::string_view language,
                             const SplitSizes& sizes, std::uint64_t seed,
                             const ScanOptions& options) {
  ScanResult scan = scan_corpus(corpus_dir, language, options);
  std::vector<std::string> ids;
  for (const auto& s : scan.accepted) ids.push_back(s.sample_id);
  const auto splits = assign_splits(ids, sizes, seed);

  CorpusManifest manifest;
  manifest.language = std::string(language);
  manifest.sizes = sizes;
  manifest.seed = seed;
  manifest.excluded = std::move(scan.excluded);
  for (std::size_t i = 0; i < scan.accepted.size(); ++i) {
    if (splits[i].empty()) continue;
    const auto& s = scan.accepted[i];
    ManifestEntry e;
    e.sample_id = s.sample_id;
    e.split = splits[i];
    e.source = s.source.string();
    e.tuples = "tuples/" + s.sample_id + ".json";
    e.embedding = s.embedding.string();
    e.ast_fingerprint = fingerprint(s.parsed.ast);
    e.n_tokens = s.parsed.token_ranges.size();
    manifest.samples.push_back(std::move(e));
  }
  return manifest;
}

LoadedSplit load_split(const CorpusManifest& manifest, const fs::path& manifest_dir,
                       std::string_view split, std::uint32_t layer) {
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : manifest_dir / path;
  };
  LoadedSplit out;
  for (const auto& entry : manifest.split(split)) {
    LoadedSample sample;
    sample.sample_id = entry.sample_id;
    sample.tuple = read_sidecar(resolve(entry.tuples)).tuple;
    if (entry.embedding.empty()) {
      out.skipped.push_back({entry.sample_id, "no_embedding"});
      continue;
    }
    try {
      sample.words = align_subwords(read_embeddings(resolve(entry.embedding)), layer);
    } catch (const Error& e) {
      out.skipped.push_back({entry.sample_id, std::string("bad_embedding: ") + e.what()});
      continue;
    }
    if (static_cast<std::size_t>(sample.words.rows()) != sample.tuple.tokens.size()) {
      out.skipped.push_back({entry.sample_id, "alignment_mismatch"});
      continue;
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

}  // namespace astprobe
