#include "centrex/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "centrex/baselines.hpp"
#include "centrex/dataset_io.hpp"
#include "centrex/detail/whitened.hpp"
#include "centrex/errors.hpp"
#include "centrex/rsq_cache.hpp"
#include "json_util.hpp"

namespace centrex {

namespace {

constexpr const char* kAlgorithms[] = {"centrex", "decentrex", "kmeans", "kmeans-aic", "dbscan", "dkmeans"};

std::uint64_t algorithm_code(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kAlgorithms); ++i)
    if (name == kAlgorithms[i]) return i + 1;
  throw ArgumentError("unknown algorithm '" + name + "'");
}

}  // namespace

bool is_known_algorithm(const std::string& name) {
  return std::find(std::begin(kAlgorithms), std::end(kAlgorithms), name) != std::end(kAlgorithms);
}

void ExperimentConfig::validate() const {
  scenario.validate();
  centrex.validate();
  network.validate();
  if (trials < 1) throw ArgumentError("experiment: trials must be >= 1");
  if (algorithms.empty()) throw ArgumentError("experiment: no algorithms listed");
  for (const auto& a : algorithms) {
    if (!is_known_algorithm(a)) throw ArgumentError("experiment: unknown algorithm '" + a + "'");
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) throw ArgumentError("experiment: sigmas must be positive");
  }
  if (baselines.replicates < 1 || baselines.k_max < 1 || baselines.restarts < 1 || baselines.min_pts < 1) {
    throw ArgumentError("experiment: baseline counts must be >= 1");
  }
  if (!(baselines.eps_quantile > 0.0 && baselines.eps_quantile <= 1.0)) {
    throw ArgumentError("experiment: eps_quantile must lie in (0, 1]");
  }
}

std::string experiment_to_json_text(const ExperimentConfig& cfg) {
  using jsonio::json;
  json j{{"scenario", jsonio::scenario_to_json(cfg.scenario)},
         {"centrex",
          {{"alpha", cfg.centrex.alpha},
           {"epsilon", cfg.centrex.epsilon},
           {"max_fp_iters", cfg.centrex.max_fp_iters},
           {"mu2", cfg.centrex.mu2},
           {"rsq_samples", cfg.centrex.rsq_samples},
           {"rsq_seed", cfg.centrex.rsq_seed}}},
         {"network",
          {{"sensors", cfg.network.sensors},
           {"slots", cfg.network.slots},
           {"peers", cfg.network.peers},
           {"match", cfg.network.match == MatchRule::kWald ? "wald" : "reversed_null"}}},
         {"baselines",
          {{"replicates", cfg.baselines.replicates},
           {"k_max", cfg.baselines.k_max},
           {"restarts", cfg.baselines.restarts},
           {"eps_quantile", cfg.baselines.eps_quantile},
           {"eps", cfg.baselines.eps},
           {"min_pts", cfg.baselines.min_pts}}},
         {"algorithms", cfg.algorithms},
         {"sigmas", cfg.sigmas},
         {"trials", cfg.trials},
         {"output_dir", cfg.output_dir},
         {"master_seed", cfg.master_seed}};
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_from_json_text(const std::string& text) {
  using jsonio::get;
  using jsonio::get_or;
  const std::string where = "config";
  const auto j = jsonio::parse(text, where);
  ExperimentConfig cfg;
  cfg.scenario = jsonio::scenario_from_json(jsonio::field(j, "scenario", where), where + ".scenario");
  cfg.trials = get<int>(j, "trials", where);
  cfg.master_seed = get<std::uint64_t>(j, "master_seed", where);
  cfg.algorithms = get<std::vector<std::string>>(j, "algorithms", where);
  cfg.sigmas = get_or<std::vector<double>>(j, "sigmas", {}, where);
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir, where);

  if (j.contains("centrex")) {
    const auto& c = j["centrex"];
    const std::string w = where + ".centrex";
    cfg.centrex.alpha = get_or(c, "alpha", cfg.centrex.alpha, w);
    cfg.centrex.epsilon = get_or(c, "epsilon", cfg.centrex.epsilon, w);
    cfg.centrex.max_fp_iters = get_or(c, "max_fp_iters", cfg.centrex.max_fp_iters, w);
    cfg.centrex.mu2 = get_or(c, "mu2", cfg.centrex.mu2, w);
    cfg.centrex.rsq_samples = get_or(c, "rsq_samples", cfg.centrex.rsq_samples, w);
    cfg.centrex.rsq_seed = get_or(c, "rsq_seed", cfg.centrex.rsq_seed, w);
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    const std::string w = where + ".network";
    cfg.network.sensors = get_or(n, "sensors", cfg.network.sensors, w);
    cfg.network.slots = get_or(n, "slots", cfg.network.slots, w);
    cfg.network.peers = get_or(n, "peers", cfg.network.peers, w);
    const auto match = get_or<std::string>(n, "match", "wald", w);
    if (match == "wald") {
      cfg.network.match = MatchRule::kWald;
    } else if (match == "reversed_null") {
      cfg.network.match = MatchRule::kReversedNull;
    } else {
      throw DataError(w + ": field 'match' must be one of wald, reversed_null (got '" + match + "')");
    }
  }
  if (j.contains("baselines")) {
    const auto& b = j["baselines"];
    const std::string w = where + ".baselines";
    cfg.baselines.replicates = get_or(b, "replicates", cfg.baselines.replicates, w);
    cfg.baselines.k_max = get_or(b, "k_max", cfg.baselines.k_max, w);
    cfg.baselines.restarts = get_or(b, "restarts", cfg.baselines.restarts, w);
    cfg.baselines.eps_quantile = get_or(b, "eps_quantile", cfg.baselines.eps_quantile, w);
    cfg.baselines.eps = get_or(b, "eps", cfg.baselines.eps, w);
    cfg.baselines.min_pts = get_or(b, "min_pts", cfg.baselines.min_pts, w);
  }
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw DataError(where + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return experiment_from_json_text(ss.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

MatrixXd columns(const std::vector<VectorXd>& v, Eigen::Index rows) {
  MatrixXd out(rows, static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = v[k];
  return out;
}

std::vector<int> nearest_euclidean(const MatrixXd& data, const MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(data.cols()), 0);
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    Eigen::Index arg = 0;
    (centroids.colwise() - data.col(n)).colwise().squaredNorm().minCoeff(&arg);
    labels[static_cast<std::size_t>(n)] = static_cast<int>(arg);
  }
  return labels;
}

std::optional<double> score(const MatrixXd& data, const std::vector<int>& labels, const MatrixXd* dist) {
  return dist != nullptr ? silhouette_from_distances(*dist, labels) : silhouette(data, labels);
}

int modal(const std::vector<int>& v) {
  std::map<int, int> counts;
  for (int x : v) ++counts[x];
  int best = 0, best_count = -1;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {  // ties go to the smaller value
      best = value;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

AlgorithmRun run_algorithm(const std::string& algo, const Dataset& ds, const ExperimentConfig& cfg,
                           const RSquared& r2, std::uint64_t seed, int k, const MatrixXd* dist) {
  algorithm_code(algo);
  const int k_true = ds.k_true();
  const MatrixXd& data = ds.data;
  AlgorithmRun out;

  if (algo == "centrex") {
    const auto model = ds.model();
    auto res = centrex_run(model, data, cfg.centrex, r2, seed);
    out.k_found = res.k_found();
    out.assignments = std::move(res.assignments);
    std::vector<VectorXd> phis;
    for (const auto& c : res.centroids) phis.push_back(c.phi_hat);
    out.centroids = columns(phis, data.rows());
  } else if (algo == "decentrex" || algo == "dkmeans") {
    const auto parts = shard(data, cfg.network.sensors, seed);
    const auto model = ds.model();
    std::vector<std::vector<VectorXd>> sensor_centroids;
    if (algo == "decentrex") {
      auto res = decentrex_run(parts.data, model, cfg.network, cfg.centrex, r2, seed);
      for (const auto& s : res.states) sensor_centroids.push_back(s.centroids);
      out.ledger = std::move(res.ledger);
    } else {
      auto res = decentralized_kmeans(parts.data, cfg.baselines.k_max, cfg.baselines.restarts, cfg.network, seed);
      for (const auto& s : res.sensors) {
        std::vector<VectorXd> phis;
        for (const auto& c : s.centroids) phis.push_back(c.phi_hat);
        sensor_centroids.push_back(std::move(phis));
      }
      out.ledger = std::move(res.ledger);
    }
    out.messages = out.ledger->scalars_sent();

    // Each sensor's centroids classify the pooled data; quality is averaged.
    const MatrixXd whitened = model.whiten_points(data);
    double sil_total = 0.0;
    int sil_count = 0, hits = 0;
    for (std::size_t s = 0; s < sensor_centroids.size(); ++s) {
      const auto& phis = sensor_centroids[s];
      std::vector<int> labels;
      if (algo == "decentrex") {
        std::vector<VectorXd> w;
        for (const auto& p : phis) w.push_back(model.whiten_point(p));
        labels = detail::classify_whitened(whitened, w, nullptr);
      } else {
        labels = nearest_euclidean(data, columns(phis, data.rows()));
      }
      if (auto sil = score(data, labels, dist)) {
        sil_total += *sil;
        ++sil_count;
      }
      const int ks = static_cast<int>(phis.size());
      out.sensor_k.push_back(ks);
      hits += ks == k_true ? 1 : 0;
      if (s == 0) {
        out.assignments = std::move(labels);
        out.centroids = columns(phis, data.rows());
      }
    }
    if (sil_count > 0) out.silhouette = sil_total / sil_count;
    out.k_found = modal(out.sensor_k);
    out.correct_k = static_cast<double>(hits) / static_cast<double>(out.sensor_k.size());
    return out;
  } else {
    BaselineResult res;
    if (algo == "kmeans") {
      res = kmeans(data, k > 0 ? k : k_true, cfg.baselines.replicates, seed);
    } else if (algo == "kmeans-aic") {
      res = kmeans_aic(data, cfg.baselines.k_max, cfg.baselines.replicates, seed);
    } else {
      const double eps = cfg.baselines.eps > 0.0 ? cfg.baselines.eps
                                                 : pairwise_distance_quantile(data, cfg.baselines.eps_quantile);
      res = dbscan(data, eps, cfg.baselines.min_pts);
    }
    out.k_found = res.k_found;
    out.assignments = std::move(res.assignments);
    out.centroids = std::move(res.centroids);
  }

  out.silhouette = score(data, out.assignments, dist);
  out.correct_k = out.k_found == k_true ? 1.0 : 0.0;
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return seed::derive(master_seed, {seed::kTrial, static_cast<std::uint64_t>(trial)});
}

std::vector<CampaignRow> run_campaign(const ExperimentConfig& cfg, int threads, const RSquared& r2) {
  cfg.validate();
  const std::vector<double> sigmas = cfg.sigmas.empty() ? std::vector<double>{cfg.scenario.sigma} : cfg.sigmas;
  const int tasks = static_cast<int>(sigmas.size()) * cfg.trials;
  const std::size_t per_task = cfg.algorithms.size();
  std::vector<CampaignRow> rows(static_cast<std::size_t>(tasks) * per_task);

  auto run_task = [&](int task) {
    const int si = task / cfg.trials;
    const int trial = task % cfg.trials;
    const std::uint64_t tseed = trial_seed(cfg.master_seed, trial);
    CampaignRow base;
    base.sigma_index = si;
    base.sigma = sigmas[static_cast<std::size_t>(si)];
    base.trial = trial;

    std::optional<Dataset> ds;
    std::optional<MatrixXd> dist;
    std::string setup_error;
    try {
      ScenarioConfig sc = cfg.scenario;
      sc.sigma = base.sigma;
      sc.seed = tseed;
      ds = gen_dataset(sc);
      dist = pairwise_distances(ds->data);
      base.k_true = ds->k_true();
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (std::size_t a = 0; a < per_task; ++a) {
      CampaignRow row = base;
      row.algorithm = cfg.algorithms[a];
      row.seed = seed::derive(tseed, {seed::kAlgorithm, algorithm_code(row.algorithm)});
      try {
        if (!ds) throw DataError(setup_error);
        const AlgorithmRun run = run_algorithm(row.algorithm, *ds, cfg, r2, row.seed, 0, &*dist);
        row.k_found = run.k_found;
        row.correct_k = run.correct_k;
        row.silhouette = run.silhouette;
        row.messages = run.messages;
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
        row.k_found = -1;
      }
      rows[static_cast<std::size_t>(task) * per_task + a] = std::move(row);
    }
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, tasks);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < tasks; t = next++) run_task(t);
    });
  }
  for (auto& th : pool) th.join();
  // Rows are stored by (sigma, trial, algorithm) slot, so order is fixed.
  return rows;
}

std::vector<CampaignRow> run_campaign(const ExperimentConfig& cfg, int threads) {
  const RSquared r2 =
      cached_r_squared(cfg.scenario.m, cfg.centrex.mu2, cfg.centrex.rsq_samples, cfg.centrex.rsq_seed);
  return run_campaign(cfg, threads, r2);
}

namespace {

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

}  // namespace

std::string campaign_csv(const std::vector<CampaignRow>& rows, const ExperimentConfig& cfg) {
  std::string out = "sigma,trial,algorithm,seed,k_true,k_found,correct_k,silhouette,messages,status\n";
  for (const auto& r : rows) {
    out += format_real(r.sigma) + "," + std::to_string(r.trial) + "," + r.algorithm + "," +
           std::to_string(r.seed) + "," + std::to_string(r.k_true) + "," + std::to_string(r.k_found) + "," +
           format_real(r.correct_k) + "," + (r.silhouette ? format_real(*r.silhouette) : "nan") + "," +
           std::to_string(r.messages) + "," + csv_safe(r.status) + "\n";
  }

  int sigma_count = 0;
  for (const auto& r : rows) sigma_count = std::max(sigma_count, r.sigma_index + 1);
  for (int si = 0; si < sigma_count; ++si) {
    for (const auto& algo : cfg.algorithms) {
      double sigma = 0.0, k_true = 0.0, k_found = 0.0, correct = 0.0, sil = 0.0, msgs = 0.0;
      int ok = 0, sil_n = 0, failed = 0;
      for (const auto& r : rows) {
        if (r.sigma_index != si || r.algorithm != algo) continue;
        sigma = r.sigma;
        if (r.status != "ok") {
          ++failed;
          continue;
        }
        ++ok;
        k_true += r.k_true;
        k_found += r.k_found;
        correct += r.correct_k;
        msgs += static_cast<double>(r.messages);
        if (r.silhouette) {
          sil += *r.silhouette;
          ++sil_n;
        }
      }
      const auto mean = [](double s, int n) { return n > 0 ? format_real(s / n) : std::string("nan"); };
      out += format_real(sigma) + ",all," + algo + ",," + mean(k_true, ok) + "," + mean(k_found, ok) + "," +
             mean(correct, ok) + "," + mean(sil, sil_n) + "," + mean(msgs, ok) + ",ok=" + std::to_string(ok) +
             " failed=" + std::to_string(failed) + "\n";
    }
  }
  return out;
}

}  // namespace centrex
