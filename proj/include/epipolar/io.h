#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "epipolar/estimators.h"
#include "epipolar/loss.h"
#include "epipolar/metrics.h"
#include "epipolar/synthetic.h"
#include "epipolar/types.h"

namespace epipolar {

inline constexpr int kSceneFormatVersion = 1;

// %.17g
std::string FormatDouble(double value);

std::string ReadFile(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate then write.
void WriteFile(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Scene files.
//
//   # epipolar-scene
//   # format_version = 1
//   # prng = <Rng::kName>
//   # <config key> = <value>        (one per SceneConfig field)
//   # columns = x y x' y' inlier_flag
//   x y x' y' flag
//
// The flag column is optional; real data without ground truth omits it.

std::string FormatScene(const CorrespondenceSet& set, const SceneConfig* cfg);
CorrespondenceSet ParseScene(const std::string& text,
                             const std::string& source = "<scene>");

// One weight per non-comment line.
std::vector<double> ParseWeights(const std::string& text,
                                 const std::string& source = "<weights>");

// ---------------------------------------------------------------------------
// Flat key-value configuration: `key = value`, '#' comments, blank lines.

struct ConfigEntry {
  std::string value;
  int line = 0;
};

class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text,
                              const std::string& source = "<config>");

  bool Has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::map<std::string, ConfigEntry>& entries() const {
    return entries_;
  }
  const std::string& source() const { return source_; }

  // Throws kParseError with file:line diagnostics for keys not in `known`.
  void RejectUnknown(const std::vector<std::string>& known) const;

  double GetDouble(const std::string& key, double fallback) const;
  std::uint64_t GetU64(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<double> GetDoubles(const std::string& key,
                                 std::size_t expected) const;

 private:
  [[noreturn]] void Fail(const std::string& key,
                         const std::string& what) const;

  std::string source_;
  std::map<std::string, ConfigEntry> entries_;
};

// Every key accepted by some command's config file.
const std::vector<std::string>& KnownConfigKeys();

// Loads `calib_file` (resolved relative to `base_dir`) or inline rig keys
// (k1, k2 = "fx fy cx cy skew"; rotation = 9 numbers; translation = 3).
SceneConfig SceneConfigFrom(const KeyValueConfig& config,
                            const std::filesystem::path& base_dir = {});
EstimatorConfig EstimatorConfigFrom(const KeyValueConfig& config);
MetricsConfig MetricsConfigFrom(const KeyValueConfig& config);
LossConfig LossConfigFrom(const KeyValueConfig& config);

// The effective SceneConfig in config-file syntax.
std::string EchoSceneConfig(const SceneConfig& cfg);

// ---------------------------------------------------------------------------
// Calibration records (JSON):
//   {"source_id": "...",
//    "k1": {"fx":..,"fy":..,"cx":..,"cy":..,"skew":..}, "k2": {...},
//    "rotation": [9 numbers, row-major], "translation": [3 numbers]}

struct CalibRecord {
  CameraRig rig;
  std::string source_id;
};

inline constexpr double kImportRotationTolerance = 1e-6;

// Schema errors name the JSON field path. Rotations within
// kImportRotationTolerance of orthonormal are accepted; ones outside the
// strict 1e-9 tolerance are projected onto the nearest rotation.
CalibRecord ParseCalib(const std::string& text,
                       const std::string& source = "<calib>");
std::string FormatCalib(const CalibRecord& record);

// ---------------------------------------------------------------------------
// Report records.

std::string FormatReportKeyValue(const MetricsReport& report);
std::string FormatReportJson(const MetricsReport& report);
std::string FormatLossKeyValue(const LossBreakdown& loss);
std::string FormatLossJson(const LossBreakdown& loss);

// Header comments plus the nine-number F block; readable by ParseF.
std::string FormatEstimation(const EstimationResult& result,
                             const std::string& method);

}  // namespace epipolar
