#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "bpcite/errors.hpp"
#include "bpcite/store.hpp"

namespace bpcite {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDocuments = "documents.jsonl";
constexpr std::string_view kPrecedents = "precedents.jsonl";
constexpr std::string_view kReport = "ingest_report.json";
constexpr std::string_view kModel = "model.json";
constexpr std::string_view kCitations = "citations.jsonl";
constexpr std::string_view kCitationsMeta = "citations.meta.json";
constexpr std::string_view kManifest = "manifest.json";
constexpr std::string_view kExplanations = "explanations";

}  // namespace

StoreLock::StoreLock(const fs::path& root, Mode mode) {
  fs::create_directories(root);
  const auto path = root / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open lock file " + path.string());
  if (::flock(fd_, mode == Mode::Exclusive ? LOCK_EX : LOCK_SH) != 0) {
    ::close(fd_);
    throw Error("cannot lock " + path.string());
  }
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json ModelArtifact::to_json() const {
  return {{"format", kFormat},
          {"pipeline", pipeline.to_json()},
          {"classifier", classifier.to_json()},
          {"metadata", metadata}};
}

ModelArtifact ModelArtifact::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormat) throw ModelError("not a model artifact (format tag mismatch)");
  auto pipeline = EmbeddingPipeline::from_json(j.at("pipeline"));
  auto classifier = CalibratedClassifier::from_json(j.at("classifier"));
  if (classifier.embedding_fingerprint != pipeline.fingerprint())
    throw ModelError("model artifact mixes a classifier and a pipeline with different fingerprints");
  return {std::move(pipeline), std::move(classifier), j.value("metadata", nlohmann::json::object())};
}

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {}

bool ProjectStore::has_corpus() const { return fs::exists(path(kDocuments)) && fs::exists(path(kPrecedents)); }
bool ProjectStore::has_model() const { return fs::exists(path(kModel)); }
bool ProjectStore::has_citations() const { return fs::exists(path(kCitations)) && fs::exists(path(kCitationsMeta)); }

void ProjectStore::save_corpus(std::span<const Document> docs, std::span<const BindingPrecedent> precedents,
                               const nlohmann::json& report) {
  std::string d, p;
  for (const auto& doc : docs) d += to_json(doc).dump() + "\n";
  for (const auto& bp : precedents) p += to_json(bp).dump() + "\n";
  write_file_atomic(path(kDocuments), d);
  write_file_atomic(path(kPrecedents), p);
  write_file_atomic(path(kReport), dump_json(report));
  update_manifest("corpus", text::fingerprint(d + p));
}

Corpus ProjectStore::load_corpus() const {
  if (!has_corpus()) throw ConfigError("store " + root_.string() + " has no corpus; run `engine ingest` first");
  auto corpus = bpcite::load_corpus(path(kDocuments), path(kPrecedents));
  if (!corpus.report.clean()) throw DataError("stored corpus has invalid lines; re-run `engine ingest`");
  return corpus;
}

std::string ProjectStore::corpus_fingerprint() const {
  return text::fingerprint(read_file(path(kDocuments)) + read_file(path(kPrecedents)));
}

void ProjectStore::save_model(const ModelArtifact& model) {
  const auto text = dump_json(model.to_json());
  write_file_atomic(path(kModel), text);
  update_manifest("model", text::fingerprint(text));
}

ModelArtifact ProjectStore::load_model() const {
  if (!has_model()) throw ConfigError("store " + root_.string() + " has no model; run `engine train` first");
  try {
    return ModelArtifact::from_json(nlohmann::json::parse(read_file(path(kModel))));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model.json: ") + e.what());
  }
}

std::string ProjectStore::model_fingerprint() const { return text::fingerprint(read_file(path(kModel))); }

void ProjectStore::save_citations(std::span<const CitationRecord> records, const nlohmann::json& meta) {
  std::ostringstream ss;
  write_citations(ss, records);
  write_file_atomic(path(kCitations), ss.str());
  write_file_atomic(path(kCitationsMeta), dump_json(meta));
  update_manifest("citations", text::fingerprint(ss.str()));
}

std::vector<CitationRecord> ProjectStore::load_citations() const {
  if (!has_citations()) throw ConfigError("store " + root_.string() + " has no citation index; run `engine infer` first");
  std::ifstream in(path(kCitations), std::ios::binary);
  return read_citations(in);
}

nlohmann::json ProjectStore::load_citations_meta() const {
  return nlohmann::json::parse(read_file(path(kCitationsMeta)));
}

fs::path ProjectStore::explanation_path(const std::string& key) const {
  return root_ / std::string(kExplanations) / (key + ".json");
}

nlohmann::json ProjectStore::manifest() const {
  if (!fs::exists(path(kManifest))) return nlohmann::json::object();
  return nlohmann::json::parse(read_file(path(kManifest)));
}

void ProjectStore::update_manifest(const std::string& field, const std::string& value) {
  auto m = manifest();
  m["format"] = "bpcite.store/1";
  m[field] = value;
  write_file_atomic(path(kManifest), dump_json(m));
}

}  // namespace bpcite
