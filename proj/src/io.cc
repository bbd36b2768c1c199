#include "epipolar/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "epipolar/error.h"
#include "epipolar/fundamental_matrix.h"
#include "epipolar/random.h"

namespace epipolar {
namespace {

using nlohmann::json;

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool ParseNumber(const std::string& token, double* out) {
  try {
    std::size_t consumed = 0;
    *out = std::stod(token, &consumed);
    return consumed == token.size() && std::isfinite(*out);
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> Tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

[[noreturn]] void ParseFail(const std::string& source, int line,
                            const std::string& what) {
  throw Error(ErrorCode::kParseError,
              source + ":" + std::to_string(line) + ": " + what);
}

std::string JoinDoubles(std::initializer_list<double> values) {
  std::string out;
  for (const double v : values) {
    if (!out.empty()) out += ' ';
    out += FormatDouble(v);
  }
  return out;
}

std::string IntrinsicsLine(const CameraIntrinsics& k) {
  return JoinDoubles({k.fx, k.fy, k.cx, k.cy, k.skew});
}

CameraIntrinsics IntrinsicsFrom(const std::vector<double>& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

// Projects a near-rotation onto SO(3).
Mat3 NearestRotation(const Mat3& r) {
  const Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

const json& Field(const json& parent, const std::string& key,
                  const std::string& path, const std::string& source) {
  if (!parent.is_object() || !parent.contains(key)) {
    throw Error(ErrorCode::kParseError,
                source + ": " + path + key + ": missing field");
  }
  return parent.at(key);
}

double NumberField(const json& parent, const std::string& key,
                   const std::string& path, const std::string& source) {
  const json& value = Field(parent, key, path, source);
  if (!value.is_number()) {
    throw Error(ErrorCode::kParseError,
                source + ": " + path + key + ": expected a number");
  }
  return value.get<double>();
}

std::vector<double> ArrayField(const json& parent, const std::string& key,
                               std::size_t expected, const std::string& source) {
  const json& value = Field(parent, key, "", source);
  if (!value.is_array() || value.size() != expected) {
    throw Error(ErrorCode::kParseError,
                source + ": " + key + ": expected an array of " +
                    std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < expected; ++i) {
    if (!value[i].is_number()) {
      throw Error(ErrorCode::kParseError, source + ": " + key + "[" +
                                              std::to_string(i) +
                                              "]: expected a number");
    }
    out.push_back(value[i].get<double>());
  }
  return out;
}

CameraIntrinsics IntrinsicsField(const json& root, const std::string& key,
                                 const std::string& source) {
  const json& k = Field(root, key, "", source);
  const std::string path = key + ".";
  CameraIntrinsics out{NumberField(k, "fx", path, source),
                       NumberField(k, "fy", path, source),
                       NumberField(k, "cx", path, source),
                       NumberField(k, "cy", path, source), 0.0};
  if (k.contains("skew")) out.skew = NumberField(k, "skew", path, source);
  if (!(out.fx > 0.0) || !(out.fy > 0.0)) {
    throw Error(ErrorCode::kParseError,
                source + ": " + path + "fx/fy: focal lengths must be > 0");
  }
  return out;
}

json IntrinsicsJson(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
          {"skew", k.skew}};
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------

std::string FormatScene(const CorrespondenceSet& set, const SceneConfig* cfg) {
  std::string out = "# epipolar-scene\n";
  out += "# format_version = " + std::to_string(kSceneFormatVersion) + "\n";
  out += "# prng = " + std::string(Rng::kName) + "\n";
  if (cfg) {
    std::istringstream echo(EchoSceneConfig(*cfg));
    std::string line;
    while (std::getline(echo, line)) out += "# " + line + "\n";
  }
  const bool flags = set.HasFlags();
  out += flags ? "# columns = x y x' y' inlier_flag\n"
               : "# columns = x y x' y'\n";
  for (const auto& pair : set.pairs) {
    out += JoinDoubles({pair.m.x(), pair.m.y(), pair.m_prime.x(),
                        pair.m_prime.y()});
    if (flags) out += *pair.is_true_inlier ? " 1" : " 0";
    out += '\n';
  }
  return out;
}

CorrespondenceSet ParseScene(const std::string& text,
                             const std::string& source) {
  CorrespondenceSet set;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (trimmed[0] == '#') {
      const std::string body = Trim(trimmed.substr(1));
      const std::string prefix = "format_version =";
      if (body.rfind(prefix, 0) == 0 &&
          Trim(body.substr(prefix.size())) !=
              std::to_string(kSceneFormatVersion)) {
        ParseFail(source, line_no, "unsupported scene format version");
      }
      continue;
    }
    const auto tokens = Tokens(trimmed);
    if (tokens.size() != 4 && tokens.size() != 5) {
      ParseFail(source, line_no,
                "expected 'x y x' y' [inlier_flag]', got " +
                    std::to_string(tokens.size()) + " fields");
    }
    if (columns == 0) columns = tokens.size();
    if (tokens.size() != columns) {
      ParseFail(source, line_no, "inconsistent column count");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!ParseNumber(tokens[i], &v[i])) {
        ParseFail(source, line_no, "invalid number '" + tokens[i] + "'");
      }
    }
    Correspondence pair{Vec2(v[0], v[1]), Vec2(v[2], v[3]), std::nullopt};
    if (columns == 5) {
      if (tokens[4] != "0" && tokens[4] != "1") {
        ParseFail(source, line_no, "inlier_flag must be 0 or 1");
      }
      pair.is_true_inlier = tokens[4] == "1";
    }
    set.pairs.push_back(pair);
  }
  return set;
}

std::vector<double> ParseWeights(const std::string& text,
                                 const std::string& source) {
  std::vector<double> weights;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    double w = 0.0;
    if (!ParseNumber(trimmed, &w) || w < 0.0) {
      ParseFail(source, line_no, "expected one non-negative weight per line");
    }
    weights.push_back(w);
  }
  return weights;
}

// ---------------------------------------------------------------------------

KeyValueConfig KeyValueConfig::Parse(const std::string& text,
                                     const std::string& source) {
  KeyValueConfig config;
  config.source_ = source;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      ParseFail(source, line_no, "expected 'key = value'");
    }
    const std::string key = Trim(trimmed.substr(0, eq));
    const std::string value = Trim(trimmed.substr(eq + 1));
    if (key.empty()) ParseFail(source, line_no, "empty key");
    if (config.entries_.count(key)) {
      ParseFail(source, line_no, "duplicate key '" + key + "'");
    }
    config.entries_[key] = {value, line_no};
  }
  return config;
}

void KeyValueConfig::RejectUnknown(const std::vector<std::string>& known) const {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, entry] : entries_) {
    if (!allowed.count(key)) {
      ParseFail(source_, entry.line, "unknown field '" + key + "'");
    }
  }
}

void KeyValueConfig::Fail(const std::string& key, const std::string& what) const {
  ParseFail(source_, entries_.at(key).line, "field '" + key + "': " + what);
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  if (!Has(key)) return fallback;
  double v = 0.0;
  if (!ParseNumber(entries_.at(key).value, &v)) Fail(key, "expected a number");
  return v;
}

std::uint64_t KeyValueConfig::GetU64(const std::string& key,
                                     std::uint64_t fallback) const {
  if (!Has(key)) return fallback;
  const std::string& value = entries_.at(key).value;
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    Fail(key, "expected a non-negative integer");
  }
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    Fail(key, "integer out of range");
  }
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  if (!Has(key)) return fallback;
  const std::string& value = entries_.at(key).value;
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  Fail(key, "expected true/false");
}

std::vector<double> KeyValueConfig::GetDoubles(const std::string& key,
                                               std::size_t expected) const {
  const auto tokens = Tokens(entries_.at(key).value);
  if (tokens.size() != expected) {
    Fail(key, "expected " + std::to_string(expected) + " numbers");
  }
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    if (!ParseNumber(tokens[i], &out[i])) Fail(key, "invalid number");
  }
  return out;
}

const std::vector<std::string>& KnownConfigKeys() {
  static const std::vector<std::string> keys = {
      // SceneConfig
      "seed", "num_points", "image_width", "image_height", "depth_range",
      "noise_sigma", "outlier_fraction", "calib_file", "k1", "k2", "rotation",
      "translation",
      // EstimatorConfig
      "hartley_normalization", "ransac_iterations", "ransac_inlier_threshold",
      "ransac_seed", "irls_max_iters", "irls_tolerance", "min_weight_mass",
      // MetricsConfig (seed shared with SceneConfig)
      "inlier_threshold", "sample_size", "angle_point_tolerance",
      "angle_both_directions", "sed_variant",
      // LossConfig (inlier_threshold shared with MetricsConfig)
      "alpha", "beta", "gamma", "l2_unsquared"};
  return keys;
}

SceneConfig SceneConfigFrom(const KeyValueConfig& config,
                            const std::filesystem::path& base_dir) {
  config.RejectUnknown(KnownConfigKeys());
  SceneConfig cfg;
  cfg.seed = config.GetU64("seed", cfg.seed);
  cfg.num_points = config.GetU64("num_points", cfg.num_points);
  cfg.image_width = config.GetDouble("image_width", cfg.image_width);
  cfg.image_height = config.GetDouble("image_height", cfg.image_height);
  if (config.Has("depth_range")) {
    const auto range = config.GetDoubles("depth_range", 2);
    cfg.depth_near = range[0];
    cfg.depth_far = range[1];
  }
  cfg.noise_sigma = config.GetDouble("noise_sigma", cfg.noise_sigma);
  cfg.outlier_fraction =
      config.GetDouble("outlier_fraction", cfg.outlier_fraction);
  if (config.Has("calib_file")) {
    std::filesystem::path path = config.entries().at("calib_file").value;
    if (path.is_relative()) path = base_dir / path;
    cfg.rig = ParseCalib(ReadFile(path), path.string()).rig;
  }
  if (config.Has("k1")) cfg.rig.k1 = IntrinsicsFrom(config.GetDoubles("k1", 5));
  if (config.Has("k2")) cfg.rig.k2 = IntrinsicsFrom(config.GetDoubles("k2", 5));
  if (config.Has("rotation")) {
    const auto r = config.GetDoubles("rotation", 9);
    for (int i = 0; i < 9; ++i) cfg.rig.pose.rotation(i / 3, i % 3) = r[i];
  }
  if (config.Has("translation")) {
    const auto t = config.GetDoubles("translation", 3);
    cfg.rig.pose.translation = Vec3(t[0], t[1], t[2]);
  }
  cfg.Validate();
  return cfg;
}

EstimatorConfig EstimatorConfigFrom(const KeyValueConfig& config) {
  config.RejectUnknown(KnownConfigKeys());
  EstimatorConfig cfg;
  cfg.hartley_normalization =
      config.GetBool("hartley_normalization", cfg.hartley_normalization);
  cfg.ransac_iterations =
      config.GetU64("ransac_iterations", cfg.ransac_iterations);
  cfg.ransac_inlier_threshold =
      config.GetDouble("ransac_inlier_threshold", cfg.ransac_inlier_threshold);
  cfg.ransac_seed = config.GetU64("ransac_seed", cfg.ransac_seed);
  cfg.irls_max_iters = config.GetU64("irls_max_iters", cfg.irls_max_iters);
  cfg.irls_tolerance = config.GetDouble("irls_tolerance", cfg.irls_tolerance);
  cfg.min_weight_mass = config.GetDouble("min_weight_mass", cfg.min_weight_mass);
  cfg.Validate();
  return cfg;
}

MetricsConfig MetricsConfigFrom(const KeyValueConfig& config) {
  config.RejectUnknown(KnownConfigKeys());
  MetricsConfig cfg;
  cfg.inlier_threshold = config.GetDouble("inlier_threshold", cfg.inlier_threshold);
  cfg.sample_size = config.GetU64("sample_size", cfg.sample_size);
  cfg.angle_point_tolerance =
      config.GetDouble("angle_point_tolerance", cfg.angle_point_tolerance);
  cfg.seed = config.GetU64("seed", cfg.seed);
  cfg.angle_both_directions =
      config.GetBool("angle_both_directions", cfg.angle_both_directions);
  if (config.Has("sed_variant")) {
    const std::string& v = config.entries().at("sed_variant").value;
    if (v == "transposed") {
      cfg.sed_variant = SedVariant::kTransposed;
    } else if (v == "literal") {
      cfg.sed_variant = SedVariant::kLiteral;
    } else {
      ParseFail(config.source(), config.entries().at("sed_variant").line,
                "field 'sed_variant': expected transposed|literal");
    }
  }
  cfg.Validate();
  return cfg;
}

LossConfig LossConfigFrom(const KeyValueConfig& config) {
  config.RejectUnknown(KnownConfigKeys());
  LossConfig cfg;
  cfg.alpha = config.GetDouble("alpha", cfg.alpha);
  cfg.beta = config.GetDouble("beta", cfg.beta);
  cfg.gamma = config.GetDouble("gamma", cfg.gamma);
  cfg.inlier_threshold = config.GetDouble("inlier_threshold", cfg.inlier_threshold);
  cfg.l2_unsquared = config.GetBool("l2_unsquared", cfg.l2_unsquared);
  cfg.Validate();
  return cfg;
}

std::string EchoSceneConfig(const SceneConfig& cfg) {
  const Mat3& r = cfg.rig.pose.rotation;
  const Vec3& t = cfg.rig.pose.translation;
  std::string out;
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "num_points = " + std::to_string(cfg.num_points) + "\n";
  out += "image_width = " + FormatDouble(cfg.image_width) + "\n";
  out += "image_height = " + FormatDouble(cfg.image_height) + "\n";
  out += "depth_range = " + JoinDoubles({cfg.depth_near, cfg.depth_far}) + "\n";
  out += "noise_sigma = " + FormatDouble(cfg.noise_sigma) + "\n";
  out += "outlier_fraction = " + FormatDouble(cfg.outlier_fraction) + "\n";
  out += "k1 = " + IntrinsicsLine(cfg.rig.k1) + "\n";
  out += "k2 = " + IntrinsicsLine(cfg.rig.k2) + "\n";
  out += "rotation = " +
         JoinDoubles({r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2),
                      r(2, 0), r(2, 1), r(2, 2)}) +
         "\n";
  out += "translation = " + JoinDoubles({t.x(), t.y(), t.z()}) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

CalibRecord ParseCalib(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, source + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) {
    throw Error(ErrorCode::kParseError, source + ": expected a JSON object");
  }
  CalibRecord record;
  if (root.contains("source_id")) {
    if (!root["source_id"].is_string()) {
      throw Error(ErrorCode::kParseError,
                  source + ": source_id: expected a string");
    }
    record.source_id = root["source_id"].get<std::string>();
  }
  record.rig.k1 = IntrinsicsField(root, "k1", source);
  record.rig.k2 = IntrinsicsField(root, "k2", source);
  const auto r = ArrayField(root, "rotation", 9, source);
  const auto t = ArrayField(root, "translation", 3, source);
  Mat3 rotation;
  for (int i = 0; i < 9; ++i) rotation(i / 3, i % 3) = r[i];
  try {
    ValidateRotation(rotation, kImportRotationTolerance);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, source + ": rotation: " + e.what());
  }
  try {
    ValidateRotation(rotation);
  } catch (const Error&) {
    rotation = NearestRotation(rotation);
  }
  record.rig.pose.rotation = rotation;
  record.rig.pose.translation = Vec3(t[0], t[1], t[2]);
  if (!(record.rig.pose.translation.norm() > 1e-12)) {
    throw Error(ErrorCode::kParseError,
                source + ": translation: norm must be > 0");
  }
  return record;
}

std::string FormatCalib(const CalibRecord& record) {
  const Mat3& r = record.rig.pose.rotation;
  const Vec3& t = record.rig.pose.translation;
  json root;
  root["source_id"] = record.source_id;
  root["k1"] = IntrinsicsJson(record.rig.k1);
  root["k2"] = IntrinsicsJson(record.rig.k2);
  root["rotation"] = {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1),
                      r(1, 2), r(2, 0), r(2, 1), r(2, 2)};
  root["translation"] = {t.x(), t.y(), t.z()};
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::string FormatReportKeyValue(const MetricsReport& report) {
  std::string out;
  out += "m_ec = " + FormatDouble(report.m_ec) + "\n";
  out += "m_ed = " + FormatDouble(report.m_ed) + "\n";
  out += "m_ea_degrees = " + FormatDouble(report.m_ea_degrees) + "\n";
  out += "n_used = " + std::to_string(report.n_used) + "\n";
  out += "n_angle_inliers = " + std::to_string(report.n_angle_inliers) + "\n";
  out += "n_angle_outliers = " + std::to_string(report.n_angle_outliers) + "\n";
  out += "angle_point_tolerance = " +
         FormatDouble(report.angle_point_tolerance) + "\n";
  return out;
}

std::string FormatReportJson(const MetricsReport& report) {
  json j;
  j["m_ec"] = report.m_ec;
  j["m_ed"] = report.m_ed;
  j["m_ea_degrees"] = report.m_ea_degrees;
  j["n_used"] = report.n_used;
  j["n_angle_inliers"] = report.n_angle_inliers;
  j["n_angle_outliers"] = report.n_angle_outliers;
  j["angle_point_tolerance"] = report.angle_point_tolerance;
  return j.dump();
}

std::string FormatLossKeyValue(const LossBreakdown& loss) {
  std::string out;
  out += "l1_term = " + FormatDouble(loss.l1_term) + "\n";
  out += "l2_term = " + FormatDouble(loss.l2_term) + "\n";
  out += "le_term = " + FormatDouble(loss.le_term) + "\n";
  out += "total = " + FormatDouble(loss.total) + "\n";
  return out;
}

std::string FormatLossJson(const LossBreakdown& loss) {
  json j;
  j["l1_term"] = loss.l1_term;
  j["l2_term"] = loss.l2_term;
  j["le_term"] = loss.le_term;
  j["total"] = loss.total;
  return j.dump();
}

std::string FormatEstimation(const EstimationResult& result,
                             const std::string& method) {
  std::string out = "# epipolar-estimate\n";
  out += "# method = " + method + "\n";
  out += "# score = " + FormatDouble(result.score) + "\n";
  out += "# iterations_used = " + std::to_string(result.iterations_used) + "\n";
  out += "# inlier_mask = ";
  for (const bool inlier : result.inlier_mask) out += inlier ? '1' : '0';
  out += "\n";
  out += FormatF(result.f);
  return out;
}

}  // namespace epipolar
