#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epipolar/error.h"
#include "epipolar/estimators.h"
#include "epipolar/types.h"

namespace epipolar::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitNumerical = 3,
  kExitNoInliers = 4,
};

int ExitCodeFor(ErrorCode code);

inline const std::vector<std::string>& KnownMethods() {
  static const std::vector<std::string> methods = {"8point", "weighted8point",
                                                   "ransac", "irls"};
  return methods;
}

struct SynthOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  std::string name = "scene";
  std::optional<std::uint64_t> seed;
};

struct EstimateOptions {
  std::filesystem::path scene;
  std::string method;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  // "oracle" or "file:<path>"; only used by weighted8point.
  std::string weights = "oracle";
  std::optional<std::uint64_t> seed;
};

struct EvaluateOptions {
  std::filesystem::path f_est;
  std::filesystem::path f_gt;
  std::filesystem::path scene;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::string format = "kv";  // kv | json
  std::optional<std::uint64_t> seed;
};

struct BenchOptions {
  std::filesystem::path scene_dir;
  std::vector<std::string> methods;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_table;
};

struct LinesOptions {
  std::filesystem::path f_file;
  std::filesystem::path scene;
  // Selects the correspondences to draw; defaults to f_file itself.
  std::optional<std::filesystem::path> gt_file;
  double width = 0.0;
  double height = 0.0;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_svg;
};

struct ImportCalibOptions {
  std::filesystem::path calib;
  std::optional<std::filesystem::path> out;
};

struct ExportCalibOptions {
  std::optional<std::filesystem::path> config;
  std::string source_id = "synthetic";
  std::filesystem::path out;
};

// Each command writes its primary result to files, progress to `out` and
// diagnostics to `err`, and returns an ExitCode.
int CmdSynth(const SynthOptions& opts, std::ostream& out, std::ostream& err);
int CmdEstimate(const EstimateOptions& opts, std::ostream& out,
                std::ostream& err);
int CmdEvaluate(const EvaluateOptions& opts, std::ostream& out,
                std::ostream& err);
int CmdBench(const BenchOptions& opts, std::ostream& out, std::ostream& err);
int CmdLines(const LinesOptions& opts, std::ostream& out, std::ostream& err);
int CmdImportCalib(const ImportCalibOptions& opts, std::ostream& out,
                   std::ostream& err);
int CmdExportCalib(const ExportCalibOptions& opts, std::ostream& out,
                   std::ostream& err);

// Shared by estimate and bench. `weights` follows EstimateOptions::weights.
EstimationResult RunMethod(const std::string& method,
                           const CorrespondenceSet& set,
                           const EstimatorConfig& cfg,
                           const std::string& weights = "oracle");

// Clips the line to [0, width] x [0, height]; nullopt if it misses the box.
std::optional<std::pair<Vec2, Vec2>> ClipLine(const EpipolarLine& line,
                                              double width, double height);

// Dispatches argv through the CLI11 front end.
int Main(int argc, char** argv);

}  // namespace epipolar::cli
