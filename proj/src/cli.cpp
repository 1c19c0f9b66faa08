#include "dislogen/cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <regex>

#include "CLI11.hpp"
#include "json.hpp"
#include "dislogen/dataset.hpp"
#include "dislogen/dataset_stats.hpp"
#include "dislogen/errors.hpp"
#include "dislogen/eval.hpp"
#include "dislogen/png_io.hpp"
#include "dislogen/raster.hpp"
#include "dislogen/tracking.hpp"

namespace dislogen::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Thrown when a replayed bundle differs from the files next to its record.
class MismatchError : public Error {
 public:
  MismatchError(const std::string& m, std::vector<std::string> files)
      : Error("mismatch", m), files_(std::move(files)) {}
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::vector<std::string> files_;
};

json error_json(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open", path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

struct GenerateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  auto config = dataset::load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.workers) config.workers = *a.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = dataset::generate_dataset(config, a.out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << json{{"out", a.out},
              {"train", s.train.size()},
              {"test", s.test.size()},
              {"generated", s.generated},
              {"skipped", s.skipped},
              {"seconds", secs}}
             .dump()
      << "\n";
}

struct ReplayArgs {
  std::string params, library, out;
  std::optional<std::size_t> index;
};

// Library from --library, else from a manifest one or two levels up.
std::optional<background::BackgroundLibrary> replay_library(const json& record, const ReplayArgs& a) {
  if (record.value("background", json::object()).value("type", std::string()) != "real") return std::nullopt;
  if (!a.library.empty()) return background::BackgroundLibrary::load(a.library);
  const fs::path dir = fs::absolute(a.params).parent_path();
  for (const auto& m : {dir / "manifest.json", dir.parent_path() / "manifest.json"}) {
    if (!fs::exists(m)) continue;
    const auto lib = read_json(m).at("config").at("background").value("library", std::string());
    if (!lib.empty()) return background::BackgroundLibrary::load(lib);
  }
  return std::nullopt;
}

void cmd_replay(const ReplayArgs& a, std::ostream& out) {
  const json record = read_json(a.params);
  std::size_t index = 0;
  if (a.index) {
    index = *a.index;
  } else {
    static const std::regex name(R"(params_(\d+)\.json)");
    std::smatch m;
    const auto fname = fs::path(a.params).filename().string();
    if (!std::regex_match(fname, m, name)) throw ConfigError("cannot infer bundle index from " + fname + "; pass --index");
    index = std::stoul(m[1]);
  }
  const auto lib = replay_library(record, a);
  const auto bundle = raster::replay(record, lib ? &*lib : nullptr);

  if (!a.out.empty()) {
    const auto files = raster::emit(bundle, a.out, index);
    json names = json::array();
    for (const auto& f : files.all()) names.push_back(f.string());
    out << json{{"index", index}, {"files", names}}.dump() << "\n";
    return;
  }
  // Verify against the files stored next to the record.
  const fs::path dir = fs::path(a.params).parent_path();
  const auto files = raster::bundle_files(dir, index, bundle.instance_masks.size());
  std::vector<std::string> differ;
  const auto check_png = [&](const fs::path& p, const png::Gray8& expected) {
    if (!fs::exists(p) || png::read_gray8(p) != expected) differ.push_back(p.string());
  };
  check_png(files.image, png::quantize(bundle.image));
  for (std::size_t k = 0; k < files.masks.size(); ++k) {
    check_png(files.masks[k], png::mask_to_gray8(bundle.instance_masks[k]));
  }
  check_png(files.combined, png::mask_to_gray8(bundle.combined_mask));
  {
    std::ifstream in(files.params, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text != raster::record_text(bundle.record)) differ.push_back(files.params.string());
  }
  // A mask file beyond the replayed count means the stored bundle has extra instances.
  const auto extra = raster::bundle_files(dir, index, bundle.instance_masks.size() + 1).masks.back();
  if (fs::exists(extra)) differ.push_back(extra.string());
  if (!differ.empty()) throw MismatchError("replayed bundle differs from stored files", differ);
  out << json{{"index", index}, {"identical", true}, {"files", files.all().size()}}.dump() << "\n";
}

void cmd_evaluate(const std::string& gt, const std::string& pred, const std::string& out_dir, std::ostream& out) {
  const auto report = eval::score_dataset(gt, pred);
  eval::write_report(report, out_dir);
  out << json{{"images", report.images.size()},
              {"mean_metric", report.mean_metric},
              {"median_metric", report.median_metric},
              {"mean_loss", report.mean_loss},
              {"report", (fs::path(out_dir) / "report.json").string()}}
             .dump()
      << "\n";
}

void cmd_track(const std::string& frames, const std::string& pairs, const std::string& csv, double gate,
               std::ostream& out) {
  tracking::TrackOptions options;
  options.gate = gate;
  const auto rows = tracking::track_directory(frames, tracking::parse_pairs(pairs), options);
  if (const auto parent = fs::path(csv).parent_path(); !parent.empty()) fs::create_directories(parent);
  tracking::write_csv(csv, rows);
  std::size_t gaps = 0;
  for (const auto& r : rows) gaps += !r.distance;
  out << json{{"rows", rows.size()}, {"gaps", gaps}, {"csv", csv}}.dump() << "\n";
}

void cmd_stats(const std::string& data, const std::string& dist_name, const std::string& out_dir,
               std::ostream& out) {
  const auto samples = stats::collect_features(data);
  std::optional<microstructure::FeatureDistributions> dist;
  if (!dist_name.empty()) {
    dist = microstructure::FeatureDistributions::resolve(dist_name);
  } else if (samples.distributions.size() == 1) {
    try {
      dist = microstructure::FeatureDistributions::resolve(samples.distributions.front());
    } catch (const Error&) {
      // unknown reference: histograms only
    }
  }
  const auto report = stats::summarize(samples, dist ? &*dist : nullptr);
  if (!out_dir.empty()) stats::write_stats(report, out_dir);
  out << stats::to_json(report).dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic dislocation image generator and evaluation tools", "dislogen"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a train/test dataset");
  generate->add_option("--config", gen.config, "JSON generator config")->required();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--seed", gen.seed, "Global seed (overrides the config)");
  generate->add_option("--workers", gen.workers, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Re-render a bundle from its params record");
  replay->add_option("--params", rep.params, "params_<i>.json record")->required();
  replay->add_option("--out", rep.out, "Write the bundle here instead of verifying it");
  replay->add_option("--library", rep.library, "Background patch library for real backgrounds");
  replay->add_option("--index", rep.index, "Bundle index (default: from the file name)");

  std::string gt_dir, pred_dir, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted masks against ground truth");
  evaluate->add_option("--gt", gt_dir, "Ground-truth bundle directory")->required();
  evaluate->add_option("--pred", pred_dir, "Prediction directory")->required();
  evaluate->add_option("--out", eval_out, "Report directory")->required();

  std::string frames, pairs, track_csv;
  double gate = tracking::kDefaultGate;
  auto* track = app.add_subcommand("track", "Track distances between dislocation pairs over frames");
  track->add_option("--frames", frames, "Directory of mask_<frame>_<k>.png files")->required();
  track->add_option("--pairs", pairs, "Pairs of first-frame mask ids, e.g. 0-1,2-3")->required();
  track->add_option("--out", track_csv, "Output CSV")->required();
  track->add_option("--gate", gate, "Max centroid jump between frames, px")->check(CLI::PositiveNumber);

  std::string data_dir, dist_name, stats_out;
  auto* stats = app.add_subcommand("stats", "Feature histograms and goodness of fit of a dataset");
  stats->add_option("--data", data_dir, "Dataset directory (searched recursively)")->required();
  stats->add_option("--dist", dist_name, "Reference distribution: M1, M2 or a JSON file");
  stats->add_option("--out", stats_out, "Write summary.json and histogram CSVs here");

  std::vector<const char*> argv{"dislogen"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << "\n";
    return 2;
  }

  try {
    if (*generate) cmd_generate(gen, out);
    else if (*replay) cmd_replay(rep, out);
    else if (*evaluate) cmd_evaluate(gt_dir, pred_dir, eval_out, out);
    else if (*track) cmd_track(frames, pairs, track_csv, gate, out);
    else if (*stats) cmd_stats(data_dir, dist_name, stats_out, out);
    return 0;
  } catch (const MismatchError& e) {
    auto j = error_json(e.kind(), e.what());
    j["files"] = e.files();
    err << j.dump() << "\n";
  } catch (const IoError& e) {
    auto j = error_json(e.kind(), e.what());
    j["path"] = e.path();
    err << j.dump() << "\n";
  } catch (const DependencyError& e) {
    auto j = error_json(e.kind(), e.what());
    j["missing"] = e.missing();
    err << j.dump() << "\n";
  } catch (const TopologyError& e) {
    auto j = error_json(e.kind(), e.what());
    j["points"] = json::array();
    for (const auto& p : e.points()) j["points"].push_back({p.row, p.col});
    err << j.dump() << "\n";
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what()).dump() << "\n";
  } catch (const fs::filesystem_error& e) {
    auto j = error_json("io", e.what());
    j["path"] = e.path1().string();
    err << j.dump() << "\n";
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << "\n";
  }
  return 1;
}

}  // namespace dislogen::cli
