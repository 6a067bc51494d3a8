#include "centrex/centrex.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <memory>
#include <fstream>
#include <limits>
#include <string>

#include "centrex/campaign.hpp"
#include "centrex/dataset_io.hpp"
#include "centrex/errors.hpp"
#include "centrex/rsq_cache.hpp"

struct cx_dataset {
  centrex::Dataset ds;
};

struct cx_result {
  centrex::AlgorithmRun run;
  double runtime = 0.0;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
cx_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CX_OK;
  } catch (const centrex::ArgumentError& e) {
    g_last_error = e.what();
    return CX_ERR_ARGUMENT;
  } catch (const centrex::DataError& e) {
    g_last_error = e.what();
    return CX_ERR_DATA;
  } catch (const centrex::NumericError& e) {
    g_last_error = e.what();
    return CX_ERR_NUMERIC;
  } catch (const centrex::IoError& e) {
    g_last_error = e.what();
    return CX_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CX_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw centrex::ArgumentError(std::string(what) + " is null");
}

void need_len(size_t have, size_t want) {
  if (have < want) {
    throw centrex::ArgumentError("output buffer too small: need " + std::to_string(want) + ", got " +
                                 std::to_string(have));
  }
}

void write_text(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw centrex::IoError(std::string("cannot write ") + path);
  out << text;
  if (!out) throw centrex::IoError(std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* cx_last_error(void) { return g_last_error.c_str(); }

const char* cx_version(void) { return "1.0.0"; }

cx_status cx_dataset_generate(const char* config_json, const uint64_t* seed_override, cx_dataset** out) {
  return guard([&] {
    need(config_json, "config_json");
    need(out, "out");
    auto cfg = centrex::scenario_from_json_text(config_json);
    if (seed_override != nullptr) cfg.seed = *seed_override;
    *out = new cx_dataset{centrex::gen_dataset(cfg)};
  });
}

cx_status cx_dataset_load(const char* csv_path, cx_dataset** out) {
  return guard([&] {
    need(csv_path, "csv_path");
    need(out, "out");
    *out = new cx_dataset{centrex::load_dataset(csv_path)};
  });
}

cx_status cx_dataset_save(const cx_dataset* ds, const char* csv_path) {
  return guard([&] {
    need(ds, "dataset");
    need(csv_path, "csv_path");
    centrex::save_dataset(ds->ds, csv_path);
  });
}

void cx_dataset_free(cx_dataset* ds) { delete ds; }

int cx_dataset_m(const cx_dataset* ds) { return ds ? static_cast<int>(ds->ds.data.rows()) : -1; }
int cx_dataset_n(const cx_dataset* ds) { return ds ? static_cast<int>(ds->ds.data.cols()) : -1; }
int cx_dataset_k_true(const cx_dataset* ds) { return ds ? ds->ds.k_true() : -1; }

cx_status cx_dataset_data(const cx_dataset* ds, double* out, size_t len) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    const auto& z = ds->ds.data;
    need_len(len, static_cast<size_t>(z.size()));
    std::copy(z.data(), z.data() + z.size(), out);
  });
}

cx_status cx_dataset_labels(const cx_dataset* ds, int* out, size_t len) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    need_len(len, ds->ds.labels.size());
    std::copy(ds->ds.labels.begin(), ds->ds.labels.end(), out);
  });
}

void cx_run_options_init(cx_run_options* opts) {
  if (opts == nullptr) return;
  opts->algorithm = "centrex";
  opts->seed = 1;
  opts->k = 0;
  opts->eps = 0.0;
  opts->min_pts = 0;
  opts->config_path = nullptr;
}

cx_status cx_run(const cx_dataset* ds, const cx_run_options* opts, cx_result** out) {
  return guard([&] {
    need(ds, "dataset");
    need(opts, "options");
    need(opts->algorithm, "algorithm");
    need(out, "out");
    const std::string algo = opts->algorithm;
    if (!centrex::is_known_algorithm(algo)) throw centrex::ArgumentError("unknown algorithm '" + algo + "'");
    if (algo == "kmeans" && opts->k > ds->ds.data.cols()) throw centrex::ArgumentError("k exceeds the data size");

    centrex::ExperimentConfig cfg;
    if (opts->config_path != nullptr) cfg = centrex::load_experiment(opts->config_path);
    cfg.scenario = ds->ds.config;
    if (opts->eps > 0.0) cfg.baselines.eps = opts->eps;
    if (opts->min_pts > 0) cfg.baselines.min_pts = opts->min_pts;

    centrex::RSquared r2;
    if (algo == "centrex" || algo == "decentrex") {
      r2 = centrex::cached_r_squared(static_cast<int>(ds->ds.data.rows()), cfg.centrex.mu2,
                                     cfg.centrex.rsq_samples, cfg.centrex.rsq_seed);
    }
    const auto start = std::chrono::steady_clock::now();
    auto res = std::make_unique<cx_result>();
    res->run = centrex::run_algorithm(algo, ds->ds, cfg, r2, opts->seed, opts->k);
    res->runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    *out = res.release();
  });
}

void cx_result_free(cx_result* r) { delete r; }

int cx_result_k_found(const cx_result* r) { return r ? r->run.k_found : -1; }

double cx_result_silhouette(const cx_result* r) {
  if (r == nullptr || !r->run.silhouette) return std::numeric_limits<double>::quiet_NaN();
  return *r->run.silhouette;
}

double cx_result_correct_k(const cx_result* r) { return r ? r->run.correct_k : 0.0; }
uint64_t cx_result_messages(const cx_result* r) { return r ? r->run.messages : 0; }
double cx_result_runtime_seconds(const cx_result* r) { return r ? r->runtime : 0.0; }
int cx_result_has_ledger(const cx_result* r) { return r && r->run.ledger ? 1 : 0; }

cx_status cx_result_assignments(const cx_result* r, int* out, size_t len) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    need_len(len, r->run.assignments.size());
    std::copy(r->run.assignments.begin(), r->run.assignments.end(), out);
  });
}

cx_status cx_result_centroids(const cx_result* r, double* out, size_t len) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    const auto& c = r->run.centroids;
    need_len(len, static_cast<size_t>(c.size()));
    std::copy(c.data(), c.data() + c.size(), out);
  });
}

cx_status cx_result_write_assignments(const cx_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    std::string text = "index,label\n";
    for (size_t i = 0; i < r->run.assignments.size(); ++i) {
      text += std::to_string(i) + "," + std::to_string(r->run.assignments[i]) + "\n";
    }
    write_text(path, text);
  });
}

cx_status cx_result_write_centroids(const cx_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    const auto& c = r->run.centroids;
    std::string text = "cluster";
    for (Eigen::Index i = 0; i < c.rows(); ++i) text += ",z" + std::to_string(i + 1);
    text += "\n";
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      text += std::to_string(k);
      for (Eigen::Index i = 0; i < c.rows(); ++i) text += "," + centrex::format_real(c(i, k));
      text += "\n";
    }
    write_text(path, text);
  });
}

cx_status cx_result_write_ledger(const cx_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    if (!r->run.ledger) throw centrex::ArgumentError("this algorithm keeps no message ledger");
    centrex::write_trace_csv(*r->run.ledger, path);
  });
}

cx_status cx_campaign(const char* config_path, int threads, const char* out_csv_path) {
  return guard([&] {
    need(config_path, "config_path");
    const auto cfg = centrex::load_experiment(config_path);
    std::filesystem::path out = out_csv_path != nullptr
                                    ? std::filesystem::path(out_csv_path)
                                    : std::filesystem::path(cfg.output_dir) / "campaign.csv";
    const auto rows = centrex::run_campaign(cfg, threads);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_text(out.c_str(), centrex::campaign_csv(rows, cfg));
  });
}

cx_status cx_r_squared(int m, double mu2, uint64_t samples, uint64_t seed, double* value, double* std_error) {
  return guard([&] {
    need(value, "value");
    const auto r = centrex::cached_r_squared(m, mu2, samples, seed);
    *value = r.value;
    if (std_error != nullptr) *std_error = r.std_error;
  });
}

double cx_marcum_q(int m, double b) {
  try {
    return centrex::marcum_q_half_m(m, b);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

cx_status cx_wald_threshold(int m, double alpha, double* out) {
  return guard([&] {
    need(out, "out");
    *out = centrex::invert_threshold(m, alpha);
  });
}

}  // extern "C"
