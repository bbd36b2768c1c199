#include "commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epipolar/epipolar.h"
#include "epipolar/io.h"
#include "epipolar/loss.h"
#include "epipolar/metrics.h"
#include "epipolar/synthetic.h"

namespace epipolar::cli {
namespace {

namespace fs = std::filesystem;

KeyValueConfig LoadConfig(const std::optional<fs::path>& path) {
  if (!path) return KeyValueConfig::Parse("", "<defaults>");
  return KeyValueConfig::Parse(ReadFile(*path), path->string());
}

fs::path ConfigDir(const std::optional<fs::path>& path) {
  return path ? path->parent_path() : fs::path{};
}

CorrespondenceSet LoadScene(const fs::path& path) {
  return ParseScene(ReadFile(path), path.string());
}

FundamentalMatrix LoadF(const fs::path& path) {
  try {
    return ParseF(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

int Report(const Error& e, std::ostream& err) {
  err << "error: " << ErrorName(e.code()) << ": " << e.what() << "\n";
  return ExitCodeFor(e.code());
}

bool IsKnownMethod(const std::string& method) {
  const auto& known = KnownMethods();
  return std::find(known.begin(), known.end(), method) != known.end();
}

std::string Fixed(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

// Guarded wrapper so every command maps library errors the same way.
template <typename Body>
int Guard(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return Report(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

struct MethodAccumulator {
  std::vector<MetricsReport> reports;
  std::size_t no_inliers = 0;
  std::size_t failed = 0;
};

double Mean(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  return PairwiseSum(values) / static_cast<double>(values.size());
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoInliers:
      return kExitNoInliers;
    case ErrorCode::kParseError:
    case ErrorCode::kIoError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMissingFlags:
    case ErrorCode::kNotRankTwo:
    case ErrorCode::kZeroMatrix:
    case ErrorCode::kNonCanonicalInput:
    case ErrorCode::kInvalidRotation:
    case ErrorCode::kSingularIntrinsics:
    case ErrorCode::kZeroTranslation:
      return kExitParse;
    default:
      return kExitNumerical;
  }
}

EstimationResult RunMethod(const std::string& method,
                           const CorrespondenceSet& set,
                           const EstimatorConfig& cfg,
                           const std::string& weights) {
  if (method == "8point") return EightPoint(set, cfg);
  if (method == "ransac") return Ransac(set, cfg);
  if (method == "irls") return IrlsSed(set, EightPoint(set, cfg).f, cfg);
  if (method == "weighted8point") {
    std::vector<double> w;
    if (weights == "oracle") {
      w = OracleWeights(set);
    } else if (weights.rfind("file:", 0) == 0) {
      const fs::path path = weights.substr(5);
      w = ParseWeights(ReadFile(path), path.string());
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "--weights must be 'oracle' or 'file:<path>'");
    }
    return WeightedEightPoint(set, w, cfg);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + method + "'");
}

std::optional<std::pair<Vec2, Vec2>> ClipLine(const EpipolarLine& line,
                                              double width, double height) {
  std::vector<Vec2> hits;
  const double eps = 1e-9 * std::max(width, height);
  auto add = [&](const Vec2& p) {
    if (p.x() < -eps || p.x() > width + eps || p.y() < -eps ||
        p.y() > height + eps) {
      return;
    }
    for (const auto& q : hits) {
      if ((q - p).norm() <= eps) return;
    }
    hits.push_back(p);
  };
  if (line.b != 0.0) {
    add(Vec2(0.0, -line.c / line.b));
    add(Vec2(width, -(line.a * width + line.c) / line.b));
  }
  if (line.a != 0.0) {
    add(Vec2(-line.c / line.a, 0.0));
    add(Vec2(-(line.b * height + line.c) / line.a, height));
  }
  if (hits.size() < 2) return std::nullopt;
  std::pair<Vec2, Vec2> best{hits[0], hits[1]};
  double best_len = -1.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    for (std::size_t j = i + 1; j < hits.size(); ++j) {
      const double len = (hits[i] - hits[j]).norm();
      if (len > best_len) {
        best_len = len;
        best = {hits[i], hits[j]};
      }
    }
  }
  return best;
}

int CmdSynth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const KeyValueConfig config = LoadConfig(opts.config);
    SceneConfig cfg = SceneConfigFrom(config, ConfigDir(opts.config));
    if (opts.seed) cfg.seed = *opts.seed;
    const Scene scene = GenerateScene(cfg);
    fs::create_directories(opts.out_dir);
    const fs::path scene_path = opts.out_dir / (opts.name + ".scene");
    const fs::path f_path = opts.out_dir / (opts.name + ".F");
    WriteFile(scene_path, FormatScene(scene.set, &cfg));
    WriteFile(f_path, FormatF(scene.f_gt));
    out << EchoSceneConfig(cfg);
    out << "wrote " << scene_path.string() << "\n";
    out << "wrote " << f_path.string() << "\n";
    return kExitSuccess;
  });
}

int CmdEstimate(const EstimateOptions& opts, std::ostream& out,
                std::ostream& err) {
  if (!IsKnownMethod(opts.method)) {
    err << "usage error: unknown method '" << opts.method
        << "' (expected 8point, weighted8point, ransac or irls)\n";
    return kExitUsage;
  }
  return Guard(err, [&] {
    EstimatorConfig cfg = EstimatorConfigFrom(LoadConfig(opts.config));
    if (opts.seed) cfg.ransac_seed = *opts.seed;
    const CorrespondenceSet set = LoadScene(opts.scene);
    const EstimationResult result =
        RunMethod(opts.method, set, cfg, opts.weights);
    WriteFile(opts.out, FormatEstimation(result, opts.method));
    out << "wrote " << opts.out.string() << "\n";
    return kExitSuccess;
  });
}

int CmdEvaluate(const EvaluateOptions& opts, std::ostream& out,
                std::ostream& err) {
  if (opts.format != "kv" && opts.format != "json") {
    err << "usage error: --format must be kv or json\n";
    return kExitUsage;
  }
  return Guard(err, [&] {
    const KeyValueConfig config = LoadConfig(opts.config);
    MetricsConfig metrics_cfg = MetricsConfigFrom(config);
    if (opts.seed) metrics_cfg.seed = *opts.seed;
    const LossConfig loss_cfg = LossConfigFrom(config);
    const FundamentalMatrix f_est = LoadF(opts.f_est);
    const FundamentalMatrix f_gt = LoadF(opts.f_gt);
    const CorrespondenceSet set = LoadScene(opts.scene);

    const MetricsReport report = Evaluate(f_est, f_gt, set, metrics_cfg);
    const LossBreakdown loss = LossTotal(f_est, f_gt, set, loss_cfg);
    const bool all_outliers = report.n_angle_inliers == 0;
    const double excluded = all_outliers ? std::nan("") : report.m_ea_degrees;
    const double as_90 = all_outliers ? 90.0 : report.m_ea_degrees;

    std::string text;
    if (opts.format == "json") {
      nlohmann::json j;
      j["metrics"] = nlohmann::json::parse(FormatReportJson(report));
      j["loss"] = nlohmann::json::parse(FormatLossJson(loss));
      j["m_ea_degrees_exclude_all_outlier"] =
          all_outliers ? nlohmann::json(nullptr) : nlohmann::json(excluded);
      j["m_ea_degrees_all_outlier_as_90"] = as_90;
      text = j.dump(2) + "\n";
    } else {
      text = FormatReportKeyValue(report) + FormatLossKeyValue(loss);
      text += "m_ea_degrees_exclude_all_outlier = " +
              (all_outliers ? std::string("nan") : FormatDouble(excluded)) +
              "\n";
      text += "m_ea_degrees_all_outlier_as_90 = " + FormatDouble(as_90) + "\n";
    }
    WriteFile(opts.out, text);
    out << text;
    return kExitSuccess;
  });
}

int CmdBench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  for (const auto& method : opts.methods) {
    if (!IsKnownMethod(method)) {
      err << "usage error: unknown method '" << method << "'\n";
      return kExitUsage;
    }
  }
  if (opts.methods.empty()) {
    err << "usage error: no methods given\n";
    return kExitUsage;
  }
  return Guard(err, [&] {
    const KeyValueConfig config = LoadConfig(opts.config);
    const EstimatorConfig est_cfg = EstimatorConfigFrom(config);
    const MetricsConfig metrics_cfg = MetricsConfigFrom(config);

    std::vector<fs::path> scenes;
    if (fs::is_directory(opts.scene_dir)) {
      for (const auto& entry : fs::directory_iterator(opts.scene_dir)) {
        if (entry.path().extension() == ".scene") scenes.push_back(entry.path());
      }
    }
    if (scenes.empty()) {
      throw Error(ErrorCode::kIoError,
                  "EmptyDirectory: no .scene files in " +
                      opts.scene_dir.string());
    }
    std::sort(scenes.begin(), scenes.end());

    std::vector<CorrespondenceSet> sets;
    std::vector<FundamentalMatrix> gts;
    for (const auto& path : scenes) {
      sets.push_back(LoadScene(path));
      fs::path gt_path = path;
      gt_path.replace_extension(".F");
      gts.push_back(LoadF(gt_path));
    }

    std::map<std::string, MethodAccumulator> results;
    for (const auto& method : opts.methods) {
      MethodAccumulator& acc = results[method];
      for (std::size_t s = 0; s < scenes.size(); ++s) {
        try {
          const EstimationResult est = RunMethod(method, sets[s], est_cfg);
          acc.reports.push_back(Evaluate(est.f, gts[s], sets[s], metrics_cfg));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kNoInliers) {
            ++acc.no_inliers;
          } else {
            ++acc.failed;
            err << "warning: " << method << " on "
                << scenes[s].filename().string() << ": " << e.what() << "\n";
          }
        }
      }
    }

    std::ostringstream table;
    std::ostringstream records;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %14s %14s %12s %12s %8s %10s\n",
                  "method", "M_EC", "M_ED", "M_EA(deg)", "M_EA90(deg)",
                  "pairs", "angle_out");
    table << line;
    for (const auto& method : opts.methods) {
      const MethodAccumulator& acc = results[method];
      std::vector<double> ec, ed, ea_excluded, ea_90;
      std::size_t pairs = 0;
      std::size_t angle_outliers = 0;
      for (const auto& r : acc.reports) {
        ec.push_back(r.m_ec);
        ed.push_back(r.m_ed);
        ea_90.push_back(r.m_ea_degrees);
        if (r.n_angle_inliers > 0) ea_excluded.push_back(r.m_ea_degrees);
        pairs += r.n_used;
        angle_outliers += r.n_angle_outliers;
      }
      const double m_ec = Mean(ec);
      const double m_ed = Mean(ed);
      const double m_ea = Mean(ea_excluded);
      const double m_ea90 = Mean(ea_90);
      std::snprintf(line, sizeof(line),
                    "%-16s %14.6g %14.6g %12.6g %12.6g %8zu %10zu\n",
                    method.c_str(), m_ec, m_ed, m_ea, m_ea90, pairs,
                    angle_outliers);
      table << line;

      nlohmann::json row;
      auto number = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
      };
      row["method_name"] = method;
      row["m_ec"] = number(m_ec);
      row["m_ed"] = number(m_ed);
      row["m_ea_degrees"] = number(m_ea);
      row["m_ea_degrees_all_outlier_as_90"] = number(m_ea90);
      row["pairs_evaluated"] = pairs;
      row["angle_outlier_pairs"] = angle_outliers;
      row["scenes_evaluated"] = acc.reports.size();
      row["scenes_no_inliers"] = acc.no_inliers;
      row["scenes_failed"] = acc.failed;
      records << row.dump() << "\n";
    }
    table << "\n# scenes: " << scenes.size() << "\n";
    table << "# M_EA excludes scenes where every pair was an angle outlier; "
             "M_EA90 counts them at 90 degrees\n";
    for (const auto& method : opts.methods) {
      const MethodAccumulator& acc = results[method];
      table << "# " << method << ": excluded " << acc.no_inliers
            << " scene(s) with NoInliers, " << acc.failed
            << " estimation failure(s)\n";
    }

    WriteFile(opts.out_table, table.str());
    fs::path json_path = opts.out_table;
    json_path += ".jsonl";
    WriteFile(json_path, records.str());
    out << table.str();
    return kExitSuccess;
  });
}

int CmdLines(const LinesOptions& opts, std::ostream& out, std::ostream& err) {
  if (!(opts.width > 0.0) || !(opts.height > 0.0)) {
    err << "usage error: image size must be positive\n";
    return kExitUsage;
  }
  return Guard(err, [&] {
    const MetricsConfig metrics_cfg = MetricsConfigFrom(LoadConfig(opts.config));
    const FundamentalMatrix f = LoadF(opts.f_file);
    const FundamentalMatrix selector = opts.gt_file ? LoadF(*opts.gt_file) : f;
    const CorrespondenceSet set = LoadScene(opts.scene);
    const CorrespondenceSet filtered = FilterInliers(set, selector, metrics_cfg);

    std::ostringstream svg;
    std::ostringstream csv;
    std::ostringstream body;
    csv << "index,a,b,c,x_prime,y_prime\n";
    std::size_t skipped = 0;
    std::size_t outside = 0;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
      const auto& pair = filtered.pairs[i];
      EpipolarLine line;
      try {
        line = ComputeEpipolarLine(f, pair.m);
      } catch (const Error&) {
        ++skipped;
        continue;
      }
      csv << i << ',' << FormatDouble(line.a) << ',' << FormatDouble(line.b)
          << ',' << FormatDouble(line.c) << ',' << FormatDouble(pair.m_prime.x())
          << ',' << FormatDouble(pair.m_prime.y()) << "\n";
      const auto clipped = ClipLine(line, opts.width, opts.height);
      if (clipped) {
        body << "  <line x1=\"" << Fixed("%.6f", clipped->first.x())
             << "\" y1=\"" << Fixed("%.6f", clipped->first.y()) << "\" x2=\""
             << Fixed("%.6f", clipped->second.x()) << "\" y2=\""
             << Fixed("%.6f", clipped->second.y())
             << "\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
      } else {
        ++outside;
      }
      body << "  <circle cx=\"" << Fixed("%.6f", pair.m_prime.x())
           << "\" cy=\"" << Fixed("%.6f", pair.m_prime.y())
           << "\" r=\"3\" fill=\"none\" stroke=\"#d62728\"/>\n";
    }
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << Fixed("%.0f", opts.width) << "\" height=\""
        << Fixed("%.0f", opts.height) << "\" viewBox=\"0 0 "
        << Fixed("%.6f", opts.width) << " " << Fixed("%.6f", opts.height)
        << "\">\n";
    svg << "  <!-- epipolar lines in image 2: " << filtered.size()
        << " filtered pairs, " << skipped << " skipped degenerate, " << outside
        << " outside the image -->\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << Fixed("%.6f", opts.width)
        << "\" height=\"" << Fixed("%.6f", opts.height)
        << "\" fill=\"white\" stroke=\"black\"/>\n";
    svg << body.str() << "</svg>\n";

    WriteFile(opts.out_svg, svg.str());
    fs::path csv_path = opts.out_svg;
    csv_path.replace_extension(".csv");
    WriteFile(csv_path, csv.str());
    out << "wrote " << opts.out_svg.string() << " and " << csv_path.string()
        << " (" << filtered.size() - skipped << " lines, " << skipped
        << " degenerate skipped)\n";
    return kExitSuccess;
  });
}

int CmdImportCalib(const ImportCalibOptions& opts, std::ostream& out,
                   std::ostream& err) {
  return Guard(err, [&] {
    const CalibRecord record =
        ParseCalib(ReadFile(opts.calib), opts.calib.string());
    const FundamentalMatrix f = FundamentalFromRig(record.rig);
    out << "# source_id = " << record.source_id << "\n";
    out << FormatF(f);
    if (opts.out) WriteFile(*opts.out, FormatF(f));
    return kExitSuccess;
  });
}

int CmdExportCalib(const ExportCalibOptions& opts, std::ostream& out,
                   std::ostream& err) {
  return Guard(err, [&] {
    const SceneConfig cfg =
        SceneConfigFrom(LoadConfig(opts.config), ConfigDir(opts.config));
    const std::string text = FormatCalib({cfg.rig, opts.source_id});
    WriteFile(opts.out, text);
    out << "wrote " << opts.out.string() << "\n";
    return kExitSuccess;
  });
}

int Main(int argc, char** argv) {
  CLI::App app{"Two-view epipolar geometry toolkit"};
  app.require_subcommand(1);

  SynthOptions synth;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene");
  synth_cmd->add_option("--config", synth.config, "scene config file");
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--name", synth.name, "output file stem");
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed);

  EstimateOptions estimate;
  std::uint64_t estimate_seed = 0;
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate F for a scene");
  estimate_cmd->add_option("scene", estimate.scene)->required();
  estimate_cmd->add_option("--method", estimate.method)->required();
  estimate_cmd->add_option("--config", estimate.config);
  estimate_cmd->add_option("--out", estimate.out)->required();
  estimate_cmd->add_option("--weights", estimate.weights,
                           "oracle | file:<path>");
  auto* estimate_seed_opt = estimate_cmd->add_option("--seed", estimate_seed);

  EvaluateOptions evaluate;
  std::uint64_t evaluate_seed = 0;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "metrics and loss of an estimate");
  evaluate_cmd->add_option("f_est", evaluate.f_est)->required();
  evaluate_cmd->add_option("f_gt", evaluate.f_gt)->required();
  evaluate_cmd->add_option("scene", evaluate.scene)->required();
  evaluate_cmd->add_option("--config", evaluate.config);
  evaluate_cmd->add_option("--out", evaluate.out)->required();
  evaluate_cmd->add_option("--format", evaluate.format, "kv | json");
  auto* evaluate_seed_opt = evaluate_cmd->add_option("--seed", evaluate_seed);

  BenchOptions bench;
  std::string bench_methods;
  auto* bench_cmd = app.add_subcommand("bench", "benchmark table over scenes");
  bench_cmd->add_option("scene_dir", bench.scene_dir)->required();
  bench_cmd->add_option("--method", bench_methods, "comma-separated methods")
      ->required();
  bench_cmd->add_option("--config", bench.config);
  bench_cmd->add_option("--out", bench.out_table)->required();

  LinesOptions lines;
  std::string size;
  auto* lines_cmd = app.add_subcommand("lines", "export epipolar lines as SVG");
  lines_cmd->add_option("f_file", lines.f_file)->required();
  lines_cmd->add_option("scene", lines.scene)->required();
  lines_cmd->add_option("--gt", lines.gt_file);
  lines_cmd->add_option("--size", size, "WIDTHxHEIGHT")->required();
  lines_cmd->add_option("--config", lines.config);
  lines_cmd->add_option("--out", lines.out_svg)->required();

  ImportCalibOptions import_calib;
  auto* import_cmd =
      app.add_subcommand("import-calib", "validate a calibration record");
  import_cmd->add_option("calib", import_calib.calib)->required();
  import_cmd->add_option("--out", import_calib.out, "write the GT F file");

  ExportCalibOptions export_calib;
  auto* export_cmd =
      app.add_subcommand("export-calib", "write the config rig as JSON");
  export_cmd->add_option("--config", export_calib.config);
  export_cmd->add_option("--source-id", export_calib.source_id);
  export_cmd->add_option("--out", export_calib.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  if (*synth_cmd) {
    if (*synth_seed_opt) synth.seed = synth_seed;
    return CmdSynth(synth, std::cout, std::cerr);
  }
  if (*estimate_cmd) {
    if (*estimate_seed_opt) estimate.seed = estimate_seed;
    return CmdEstimate(estimate, std::cout, std::cerr);
  }
  if (*evaluate_cmd) {
    if (*evaluate_seed_opt) evaluate.seed = evaluate_seed;
    return CmdEvaluate(evaluate, std::cout, std::cerr);
  }
  if (*bench_cmd) {
    std::stringstream list(bench_methods);
    std::string method;
    while (std::getline(list, method, ',')) {
      if (!method.empty()) bench.methods.push_back(method);
    }
    return CmdBench(bench, std::cout, std::cerr);
  }
  if (*lines_cmd) {
    const auto x = size.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(size);
      lines.width = std::stod(size.substr(0, x));
      lines.height = std::stod(size.substr(x + 1));
    } catch (const std::exception&) {
      std::cerr << "usage error: --size expects WIDTHxHEIGHT\n";
      return kExitUsage;
    }
    return CmdLines(lines, std::cout, std::cerr);
  }
  if (*import_cmd) return CmdImportCalib(import_calib, std::cout, std::cerr);
  if (*export_cmd) return CmdExportCalib(export_calib, std::cout, std::cerr);
  return kExitUsage;
}

}  // namespace epipolar::cli
