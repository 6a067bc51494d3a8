#include "centrex/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace centrex {

namespace jsonio {

json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based offset of the failing character.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw DataError(where + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw DataError(where + ": missing field '" + name + "'");
  return *it;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw DataError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(where + ": ragged matrix at row " + std::to_string(i + 1));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw DataError(where + ": non-numeric matrix entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<CentroidModel> kCentroidModels[] = {{CentroidModel::kSparse, "sparse"},
                                                       {CentroidModel::kNonSparse, "nonsparse"}};
constexpr EnumName<SensingKind> kSensing[] = {
    {SensingKind::kGaussianProjection, "gaussian_projection"},
    {SensingKind::kCoordinateSelection, "coordinate_selection"}};
constexpr EnumName<ProjectionVariance> kVariance[] = {
    {ProjectionVariance::kStandard, "standard"}, {ProjectionVariance::kPaperLiteral, "paper_literal"}};
constexpr EnumName<ClusterSizes> kSizes[] = {{ClusterSizes::kMultinomial, "multinomial"},
                                             {ClusterSizes::kFixed, "fixed"}};

template <typename E, std::size_t N>
const char* to_name(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E from_name(const EnumName<E> (&table)[N], const json& obj, const char* key, E fallback,
            const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto s = get<std::string>(obj, key, where);
  for (const auto& e : table)
    if (s == e.name) return e.value;
  std::string options;
  for (const auto& e : table) options += std::string(options.empty() ? "" : ", ") + e.name;
  throw DataError(where + ": field '" + key + "' must be one of " + options + " (got '" + s + "')");
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
  return json{{"d", cfg.d},
              {"m", cfg.m},
              {"sigma", cfg.sigma},
              {"b", cfg.b},
              {"centroid_model", to_name(kCentroidModels, cfg.centroid_model)},
              {"p", cfg.p},
              {"sensing", to_name(kSensing, cfg.sensing)},
              {"projection_variance", to_name(kVariance, cfg.projection_variance)},
              {"k", cfg.k},
              {"k_max", cfg.k_max},
              {"n", cfg.n},
              {"cluster_sizes", to_name(kSizes, cfg.cluster_sizes)},
              {"seed", cfg.seed}};
}

ScenarioConfig scenario_from_json(const json& j, const std::string& where) {
  ScenarioConfig cfg;
  cfg.m = get<int>(j, "m", where);
  cfg.sigma = get<double>(j, "sigma", where);
  cfg.n = get<int>(j, "n", where);
  cfg.seed = get<std::uint64_t>(j, "seed", where);
  cfg.d = get_or<int>(j, "d", cfg.d, where);
  cfg.b = get_or<double>(j, "b", cfg.b, where);
  cfg.p = get_or<double>(j, "p", cfg.p, where);
  cfg.k = get_or<int>(j, "k", cfg.k, where);
  cfg.k_max = get_or<int>(j, "k_max", cfg.k_max, where);
  cfg.centroid_model = from_name(kCentroidModels, j, "centroid_model", cfg.centroid_model, where);
  cfg.sensing = from_name(kSensing, j, "sensing", cfg.sensing, where);
  cfg.projection_variance =
      from_name(kVariance, j, "projection_variance", cfg.projection_variance, where);
  cfg.cluster_sizes = from_name(kSizes, j, "cluster_sizes", cfg.cluster_sizes, where);
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw DataError(where + ": " + e.what());
  }
  return cfg;
}

}  // namespace jsonio

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta.json";
  return p;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& csv) {
  std::string text;
  for (Eigen::Index i = 0; i < ds.data.rows(); ++i) text += "z" + std::to_string(i + 1) + ",";
  text += "label\n";
  for (Eigen::Index n = 0; n < ds.data.cols(); ++n) {
    for (Eigen::Index i = 0; i < ds.data.rows(); ++i) text += format_real(ds.data(i, n)) + ",";
    text += std::to_string(ds.labels[static_cast<std::size_t>(n)]) + "\n";
  }
  write_file(csv, text);

  jsonio::json meta{{"scenario", jsonio::scenario_to_json(ds.config)},
                    {"seed", ds.config.seed},
                    {"sensing", jsonio::matrix_to_json(ds.sensing)},
                    {"noise_cov", jsonio::matrix_to_json(ds.noise_cov)},
                    {"centroids", jsonio::matrix_to_json(ds.centroids)}};
  write_file(sidecar_path(csv), meta.dump(1) + "\n");
}

Dataset load_dataset(const std::filesystem::path& csv) {
  const auto meta_path = sidecar_path(csv);
  const std::string where = meta_path.string();
  const auto meta = jsonio::parse(read_file(meta_path), where);

  Dataset ds;
  ds.config = jsonio::scenario_from_json(jsonio::field(meta, "scenario", where), where);
  ds.sensing = jsonio::matrix_from_json(jsonio::field(meta, "sensing", where), where + " (sensing)");
  ds.noise_cov = jsonio::matrix_from_json(jsonio::field(meta, "noise_cov", where), where + " (noise_cov)");
  ds.centroids = jsonio::matrix_from_json(jsonio::field(meta, "centroids", where), where + " (centroids)");
  const int m = ds.config.m, d = ds.config.d;
  if (ds.sensing.rows() != m || ds.sensing.cols() != d) throw DataError(where + ": sensing matrix is not m x d");
  if (ds.noise_cov.rows() != d || ds.noise_cov.cols() != d) throw DataError(where + ": noise_cov is not d x d");
  if (ds.centroids.rows() != d) throw DataError(where + ": centroids do not have d rows");

  const std::string text = read_file(csv);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(csv.string() + ":" + std::to_string(lineno) + ": " + msg);
  };

  std::vector<double> values;
  ++lineno;
  if (!std::getline(in, line)) fail("empty file");
  if (std::count(line.begin(), line.end(), ',') != m) fail("header does not have m + 1 columns");

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (int i = 0; i < m; ++i) {
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || next == end || *next != ',') fail("bad value in column " + std::to_string(i + 1));
      values.push_back(v);
      p = next + 1;
    }
    int label;
    auto [next, ec] = std::from_chars(p, end, label);
    if (ec != std::errc() || next != end) fail("bad label");
    if (label < 0 || label >= ds.centroids.cols()) fail("label out of range");
    ds.labels.push_back(label);
  }
  if (ds.labels.size() != static_cast<std::size_t>(ds.config.n)) {
    throw DataError(csv.string() + ": expected " + std::to_string(ds.config.n) + " rows, found " +
                    std::to_string(ds.labels.size()));
  }
  ds.data = Eigen::Map<const MatrixXd>(values.data(), m, static_cast<Eigen::Index>(ds.labels.size()));
  return ds;
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
  return jsonio::scenario_to_json(cfg).dump(2) + "\n";
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
  const auto j = jsonio::parse(text, "config");
  if (j.is_object() && j.contains("scenario")) return jsonio::scenario_from_json(j["scenario"], "config.scenario");
  return jsonio::scenario_from_json(j, "scenario");
}

}  // namespace centrex
