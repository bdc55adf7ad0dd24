#pragma once

#include <atomic>
#include <set>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bpcite/corpus.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bpcite-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline bpcite::Document make_doc(std::string id, std::string body, std::vector<bpcite::BpId> bps = {},
                                 std::optional<bpcite::Date> date = std::nullopt) {
  bpcite::Document d;
  d.id = std::move(id);
  d.title = "t";
  d.body = std::move(body);
  d.date = date;
  d.doc_type = "Rcl";
  d.explicit_bps = std::move(bps);
  return d;
}

}  // namespace testing_support

#include "bpcite/classifier.hpp"
#include "bpcite/embedding.hpp"
#include "bpcite/synth.hpp"

namespace testing_support {

/// Small synthetic corpus with a pipeline and classifier trained on its labeled part.
struct SmallWorld {
  bpcite::SynthCorpus corpus;
  bpcite::EmbeddingPipeline pipeline;
  bpcite::CalibratedClassifier classifier;
};

inline bpcite::SynthConfig small_config() {
  bpcite::SynthConfig cfg;
  cfg.classes = 3;
  cfg.docs_per_class = 40;
  cfg.multi_label = 4;
  cfg.duplicates = 3;
  cfg.unlabeled = 30;
  cfg.out_of_scope = 3;
  cfg.seed = 42;
  return cfg;
}

inline const SmallWorld& small_world() {
  static const SmallWorld world = [] {
    auto corpus = bpcite::generate_corpus(small_config());
    std::vector<std::string> bodies;
    std::vector<bpcite::BpId> labels;
    const std::set<bpcite::BpId> classes(corpus.class_ids.begin(), corpus.class_ids.end());
    for (const auto& d : corpus.documents)
      if (d.single_label() && classes.count(d.explicit_bps[0])) {
        bodies.push_back(d.body);
        labels.push_back(d.explicit_bps[0]);
      }
    auto pipeline = bpcite::EmbeddingPipeline::fit(bodies, bpcite::Normalizer{}, bpcite::CitationPatterns::defaults(),
                                                   {10, 2, 42});
    auto clf = bpcite::train_calibrated(pipeline.embed_all(bodies), labels, {}, pipeline.fingerprint());
    return SmallWorld{std::move(corpus), std::move(pipeline), std::move(clf)};
  }();
  return world;
}

}  // namespace testing_support
