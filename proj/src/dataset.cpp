#include "dislogen/dataset.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "dislogen/errors.hpp"
#include "dislogen/rng.hpp"

namespace dislogen::dataset {

using nlohmann::json;

const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

void DatasetConfig::validate() const {
  if (train < 1 || test < 1) throw ConfigError("train and test counts must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  generator.validate();
}

void to_json(json& j, const DatasetConfig& c) {
  j = c.generator;
  j["train"] = c.train;
  j["test"] = c.test;
  j["seed"] = c.seed;
}

void from_json(const json& j, DatasetConfig& c) {
  c = DatasetConfig{};
  j.get_to(c.generator);
  c.train = j.value("train", c.train);
  c.test = j.value("test", c.test);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
}

DatasetConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file", path.string());
  DatasetConfig c;
  try {
    c = json::parse(in).get<DatasetConfig>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  auto& lib = c.generator.background_library;
  if (!lib.empty() && std::filesystem::path(lib).is_relative()) {
    lib = (path.parent_path() / lib).lexically_normal().string();
  }
  const auto& dist = c.generator.distribution;
  if (dist != "M1" && dist != "M2" && dist != "m1" && dist != "m2" &&
      std::filesystem::path(dist).is_relative()) {
    c.generator.distribution = (path.parent_path() / dist).lexically_normal().string();
  }
  return c;
}

std::uint64_t image_seed(std::uint64_t global_seed, Split split, std::size_t index) {
  return derive_seed(derive_seed(global_seed, static_cast<std::uint64_t>(split)), index);
}

namespace {

struct Task {
  Split split;
  std::size_t index;
};

std::vector<std::string> file_names(const raster::BundleFiles& f) {
  std::vector<std::string> out;
  for (const auto& p : f.all()) out.push_back(p.filename().string());
  return out;
}

// Entry for a bundle already on disk, or nothing when it must be (re)generated.
std::optional<BundleEntry> existing_bundle(const std::filesystem::path& dir, std::size_t index,
                                           std::uint64_t seed) {
  const auto params = dir / ("params_" + std::to_string(index) + ".json");
  if (!std::filesystem::exists(params)) return std::nullopt;
  try {
    std::ifstream in(params);
    const json record = json::parse(in);
    if (record.at("seeds").at("scene").get<std::uint64_t>() != seed) return std::nullopt;
    std::size_t count = 0;
    for (const auto& p : record.at("microstructure").at("pileups")) count += p.at("dislocations").size();
    const auto files = raster::bundle_files(dir, index, count);
    for (const auto& f : files.all())
      if (!std::filesystem::exists(f)) return std::nullopt;
    return BundleEntry{index, seed, count, file_names(files)};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

json entries_json(const std::vector<BundleEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"index", e.index}, {"seed", e.seed}, {"dislocations", e.dislocations}, {"files", e.files}});
  }
  return out;
}

}  // namespace

GenerateSummary generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                                 const Progress& progress) {
  config.validate();
  const auto dist = microstructure::FeatureDistributions::resolve(config.generator.distribution);
  std::optional<background::BackgroundLibrary> library;
  if (config.generator.background_mode == background::Mode::real) {
    library = background::BackgroundLibrary::load(config.generator.background_library);
  }
  const background::BackgroundLibrary* lib = library ? &*library : nullptr;

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < config.train; ++i) tasks.push_back({Split::train, i});
  for (std::size_t i = 0; i < config.test; ++i) tasks.push_back({Split::test, i});
  for (Split s : {Split::train, Split::test}) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / to_string(s), ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message(), (out_dir / to_string(s)).string());
  }

  std::vector<BundleEntry> entries(tasks.size());
  std::vector<bool> skipped(tasks.size(), false);
  std::atomic<std::size_t> next{0}, done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size() || failed) return;
      try {
        const auto [split, index] = tasks[t];
        const auto dir = out_dir / to_string(split);
        const std::uint64_t seed = image_seed(config.seed, split, index);
        if (auto e = existing_bundle(dir, index, seed)) {
          entries[t] = std::move(*e);
          skipped[t] = true;
        } else {
          const auto bundle = raster::generate_scene(config.generator, dist, seed, lib);
          const auto files = raster::emit(bundle, dir, index);
          entries[t] = {index, seed, bundle.instance_masks.size(), file_names(files)};
        }
        const std::size_t n = ++done;
        if (progress) {
          std::lock_guard lock(mutex);
          progress(n, tasks.size());
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const unsigned n_threads = std::min<std::size_t>(config.workers, std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> threads;
  for (unsigned i = 1; i < n_threads; ++i) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);

  GenerateSummary summary;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    (skipped[t] ? summary.skipped : summary.generated) += 1;
    (tasks[t].split == Split::train ? summary.train : summary.test).push_back(entries[t]);
  }

  const json manifest{
      {"schema", kManifestSchema},
      {"global_seed", config.seed},
      {"config", config},
      {"splits",
       {{"train", {{"count", summary.train.size()}, {"dir", "train"}, {"bundles", entries_json(summary.train)}}},
        {"test", {{"count", summary.test.size()}, {"dir", "test"}, {"bundles", entries_json(summary.test)}}}}}};
  const auto path = out_dir / "manifest.json";
  const auto tmp = out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("cannot write manifest", tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write manifest: " + ec.message(), path.string());
  return summary;
}

}  // namespace dislogen::dataset
