#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "dislogen/raster.hpp"

namespace dislogen::dataset {

inline constexpr const char* kManifestSchema = "dislogen.manifest/1";

enum class Split : std::uint64_t { train = 1, test = 2 };
const char* to_string(Split s);

struct DatasetConfig {
  raster::GeneratorConfig generator;
  std::size_t train = 4000;
  std::size_t test = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const DatasetConfig& c);
void from_json(const nlohmann::json& j, DatasetConfig& c);

// Reads a JSON config; a relative background library path is taken relative
// to the config file.
DatasetConfig load_config(const std::filesystem::path& path);

// Seed of one image, independent of worker count and generation order.
std::uint64_t image_seed(std::uint64_t global_seed, Split split, std::size_t index);

struct BundleEntry {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t dislocations = 0;
  std::vector<std::string> files;
};

struct GenerateSummary {
  std::size_t generated = 0;
  std::size_t skipped = 0;  // already complete on disk
  std::vector<BundleEntry> train, test;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// Writes out/train, out/test and out/manifest.json. Bundles whose params
// record already exists with the expected seed and complete file set are kept.
GenerateSummary generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                                 const Progress& progress = {});

}  // namespace dislogen::dataset
