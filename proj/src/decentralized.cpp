#include "centrex/decentralized.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "centrex/baselines.hpp"
#include "centrex/detail/whitened.hpp"
#include "centrex/errors.hpp"
#include "centrex/random.hpp"

namespace centrex {

void NetworkConfig::validate() const {
  if (sensors < 1) throw ArgumentError("network: need at least one sensor");
  if (slots < 1) throw ArgumentError("network: need at least one time slot");
  if (peers < 0 || peers > sensors - 1) {
    throw ArgumentError("network: peers must lie in [0, sensors - 1]");
  }
}

MessageLedger::MessageLedger(int sensors, int slots)
    : per_slot_(static_cast<std::size_t>(slots) + 1, 0),
      per_sensor_(static_cast<std::size_t>(sensors), 0) {}

void MessageLedger::record(int slot, int sender, std::uint64_t scalars) {
  total_ += scalars;
  per_slot_.at(static_cast<std::size_t>(slot)) += scalars;
  per_sensor_.at(static_cast<std::size_t>(sender)) += scalars;
}

void MessageLedger::snapshot(int slot, const std::vector<SensorState>& states) {
  for (std::size_t s = 0; s < states.size(); ++s) {
    trace_.push_back({slot, states[s].sensor_id, states[s].k(), per_sensor_.at(s)});
  }
}

void write_trace_csv(const MessageLedger& ledger, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "slot,sensor,k_found,scalars_sent_cumulative\n";
  for (const auto& row : ledger.trace()) {
    out << row.slot << ',' << row.sensor << ',' << row.k_found << ','
        << row.scalars_sent_cumulative << '\n';
  }
  if (!out) throw IoError("failed while writing " + path);
}

SensorState make_sensor(int sensor_id, MatrixXd shard) {
  SensorState s;
  s.sensor_id = sensor_id;
  s.shard = std::move(shard);
  return s;
}

namespace {

std::vector<VectorXd> whiten_all(const CompressionModel& model, const std::vector<VectorXd>& xs) {
  std::vector<VectorXd> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(model.whiten_point(x));
  return out;
}

// Gated classification (V, unassigned) and partial sums against the current
// centroids.
void recompute_local(SensorState& s, const MatrixXd& points, const CompressionModel& model,
                     const WaldTests& tests) {
  const auto phis = whiten_all(model, s.centroids);
  const auto labels = detail::classify_whitened(points, phis, &tests);
  s.V.assign(phis.size(), 0);
  s.unassigned.clear();
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] == kUnassigned) {
      s.unassigned.push_back(static_cast<int>(n));
    } else {
      ++s.V[static_cast<std::size_t>(labels[n])];
    }
  }
  s.P.resize(phis.size());
  s.Q.resize(phis.size());
  VectorXd w;
  for (std::size_t k = 0; k < phis.size(); ++k) {
    detail::wald_weights(points, phis[k], 1.0, w);
    s.Q[k] = w.sum();
    s.P[k] = s.shard * w;
  }
}

bool coincide(const WaldTests& tests, double dist, double scale, MatchRule rule) {
  if (rule == MatchRule::kReversedNull) return tests.fusion_whitened(dist, scale).accepted == Hypothesis::H1;
  return tests.wald_whitened(dist, scale).accepted == Hypothesis::H0;
}

// Repeated pairwise sweep with midpoint merges, as in centralized fusion.
void fuse_rule(std::vector<CentroidEstimate>& centroids, const WaldTests& tests, const RSquared& r2,
               MatchRule rule) {
  if (rule == MatchRule::kReversedNull) {
    detail::fuse_whitened(centroids, tests, r2);
    return;
  }
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      for (std::size_t j = i + 1; j < centroids.size();) {
        const double scale = fusion_scale(std::max(1L, centroids[i].n_hat), std::max(1L, centroids[j].n_hat), r2);
        if (coincide(tests, (centroids[i].phi_hat - centroids[j].phi_hat).norm(), scale, rule)) {
          centroids[i].phi_hat = 0.5 * (centroids[i].phi_hat + centroids[j].phi_hat);
          centroids[i].n_hat += centroids[j].n_hat;
          centroids.erase(centroids.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        } else {
          ++j;
        }
      }
    }
  }
}

void require_shard(const SensorState& s, const CompressionModel& model) {
  if (s.shard.cols() == 0) throw ArgumentError("sensor " + std::to_string(s.sensor_id) + ": empty shard");
  if (s.shard.rows() != model.m()) {
    throw ArgumentError("sensor " + std::to_string(s.sensor_id) + ": shard dimension mismatch");
  }
}

}  // namespace

void local_init(SensorState& state, const CompressionModel& model, const CentrexParams& params,
                const RSquared& r2, std::uint64_t seed, MatchRule rule) {
  require_shard(state, model);
  const WaldTests tests(model, params.alpha);
  const MatrixXd points = model.whiten_points(state.shard);
  RandomEngine rng = make_engine(seed, {seed::kAlgorithm, static_cast<std::uint64_t>(state.sensor_id)});

  std::vector<bool> marked(static_cast<std::size_t>(points.cols()), false);
  std::vector<CentroidEstimate> estimates;
  while (true) {
    std::vector<int> unmarked;
    for (std::size_t n = 0; n < marked.size(); ++n) {
      if (!marked[n]) unmarked.push_back(static_cast<int>(n));
    }
    if (unmarked.empty()) break;
    auto pass = detail::estimate_pass(points, unmarked, tests, params, rng, true);
    marked[static_cast<std::size_t>(pass.seed_index)] = true;
    for (int n : pass.accepted) marked[static_cast<std::size_t>(n)] = true;
    estimates.push_back({pass.phi, static_cast<long>(pass.accepted.size()), pass.iterations});
  }
  fuse_rule(estimates, tests, r2, rule);

  state.centroids.clear();
  for (const auto& e : estimates) state.centroids.push_back(model.unwhiten_point(e.phi_hat));
  recompute_local(state, points, model, tests);
}

void merge_received(SensorState& state, const SensorMessage& msg, const WaldTests& tests,
                    const RSquared& r2, MatchRule rule) {
  const CompressionModel& model = tests.model();
  std::vector<VectorXd> local = whiten_all(model, state.centroids);
  for (std::size_t kp = 0; kp < msg.centroids.size(); ++kp) {
    const VectorXd incoming = model.whiten_point(msg.centroids[kp]);
    const long v_in = std::max(1L, msg.V[kp]);
    bool absorbed = false;
    for (std::size_t k = 0; k < local.size(); ++k) {
      const double scale = fusion_scale(std::max(1L, state.V[k]), v_in, r2);
      if (coincide(tests, (local[k] - incoming).norm(), scale, rule)) {
        state.P[k] += msg.P[kp];
        state.Q[k] += msg.Q[kp];
        absorbed = true;
        break;
      }
    }
    if (!absorbed) {
      state.centroids.push_back(msg.centroids[kp]);
      state.P.push_back(msg.P[kp]);
      state.Q.push_back(msg.Q[kp]);
      state.V.push_back(msg.V[kp]);
      local.push_back(incoming);
    }
  }
}

void refresh_sensor(SensorState& state, const CompressionModel& model, const WaldTests& tests,
                    const RSquared& r2, MatchRule rule) {
  require_shard(state, model);
  const MatrixXd points = model.whiten_points(state.shard);

  std::vector<CentroidEstimate> estimates;
  estimates.reserve(state.centroids.size());
  for (std::size_t k = 0; k < state.centroids.size(); ++k) {
    VectorXd phi = state.centroids[k];
    if (state.Q[k] > 0.0) {
      VectorXd candidate = state.P[k] / state.Q[k];
      if (candidate.allFinite()) phi = std::move(candidate);
    }
    estimates.push_back({model.whiten_point(phi), state.V[k], 0});
  }
  fuse_rule(estimates, tests, r2, rule);

  state.centroids.clear();
  for (const auto& e : estimates) state.centroids.push_back(model.unwhiten_point(e.phi_hat));
  recompute_local(state, points, model, tests);
}

void exchange_slot(std::vector<SensorState>& states, const NetworkConfig& net,
                   const CompressionModel& model, const RSquared& r2, const CentrexParams& params,
                   int t, std::uint64_t seed, MessageLedger& ledger) {
  net.validate();
  if (t < 2 || t > net.slots) throw ArgumentError("exchange_slot: slot index must lie in 2..slots");
  if (static_cast<int>(states.size()) != net.sensors) {
    throw ArgumentError("exchange_slot: sensor count does not match the network");
  }
  const WaldTests tests(model, params.alpha);

  std::vector<SensorMessage> outbox;
  outbox.reserve(states.size());
  for (const auto& s : states) outbox.push_back(SensorMessage::from(s));

  const int m = model.m();
  for (int s = 0; s < net.sensors; ++s) {
    std::vector<int> others;
    for (int o = 0; o < net.sensors; ++o) {
      if (o != s) others.push_back(o);
    }
    RandomEngine rng = make_engine(seed, {seed::kPeers, static_cast<std::uint64_t>(t),
                                          static_cast<std::uint64_t>(s)});
    // Partial Fisher-Yates: the first `peers` entries are a uniform draw
    // without replacement.
    for (int j = 0; j < net.peers; ++j) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), others.size() - 1);
      std::swap(others[static_cast<std::size_t>(j)], others[pick(rng)]);
    }
    for (int j = 0; j < net.peers; ++j) {
      const int sender = others[static_cast<std::size_t>(j)];
      const SensorMessage& msg = outbox[static_cast<std::size_t>(sender)];
      merge_received(states[static_cast<std::size_t>(s)], msg, tests, r2, net.match);
      ledger.record(t, sender, msg.scalar_count(m));
    }
  }
  for (auto& s : states) refresh_sensor(s, model, tests, r2, net.match);
  ledger.snapshot(t, states);
}

DecentrexResult decentrex_run(const std::vector<MatrixXd>& shards, const CompressionModel& model,
                              const NetworkConfig& net, const CentrexParams& params,
                              const RSquared& r2, std::uint64_t seed) {
  net.validate();
  params.validate();
  if (static_cast<int>(shards.size()) != net.sensors) {
    throw ArgumentError("decentrex_run: number of shards must equal the sensor count");
  }
  DecentrexResult result;
  result.ledger = MessageLedger(net.sensors, net.slots);
  result.states.reserve(shards.size());
  for (int s = 0; s < net.sensors; ++s) {
    result.states.push_back(make_sensor(s, shards[static_cast<std::size_t>(s)]));
    local_init(result.states.back(), model, params, r2, seed, net.match);
  }
  result.ledger.snapshot(1, result.states);
  for (int t = 2; t <= net.slots; ++t) {
    exchange_slot(result.states, net, model, r2, params, t, seed, result.ledger);
  }

  for (const auto& s : result.states) {
    ClusteringResult local;
    local.assignments = detail::classify_whitened(model.whiten_points(s.shard),
                                                  whiten_all(model, s.centroids), nullptr);
    for (const auto& phi : s.centroids) local.centroids.push_back({phi, 0, 0});
    for (int label : local.assignments) ++local.centroids[static_cast<std::size_t>(label)].n_hat;
    result.sensors.push_back(std::move(local));
  }
  return result;
}

std::uint64_t predicted_messages_decentrex(std::uint64_t rounds, std::uint64_t peers,
                                           std::uint64_t sensors, std::uint64_t k1, std::uint64_t m) {
  return 2 * rounds * peers * sensors * k1 * (m + 1);
}

std::uint64_t predicted_messages_kmeans(std::uint64_t restarts, std::uint64_t rounds,
                                        std::uint64_t peers, std::uint64_t sensors,
                                        std::uint64_t k2, std::uint64_t m) {
  return restarts * rounds * peers * sensors * (k2 * (k2 + 1) / 2) * (m + 1);
}

namespace {

struct LocalMeans {
  MatrixXd means;  // m x K; columns of empty clusters keep the current centroid
  std::vector<long> counts;
};

std::vector<int> nearest(const MatrixXd& data, const MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(data.cols()), 0);
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < centroids.cols(); ++k) {
      const double d2 = (data.col(n) - centroids.col(k)).squaredNorm();
      if (d2 < best) {
        best = d2;
        labels[static_cast<std::size_t>(n)] = static_cast<int>(k);
      }
    }
  }
  return labels;
}

LocalMeans local_means(const MatrixXd& data, const MatrixXd& centroids) {
  LocalMeans out{MatrixXd::Zero(centroids.rows(), centroids.cols()),
                 std::vector<long>(static_cast<std::size_t>(centroids.cols()), 0)};
  const auto labels = nearest(data, centroids);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    out.means.col(labels[n]) += data.col(static_cast<Eigen::Index>(n));
    ++out.counts[static_cast<std::size_t>(labels[n])];
  }
  for (Eigen::Index k = 0; k < centroids.cols(); ++k) {
    const long c = out.counts[static_cast<std::size_t>(k)];
    out.means.col(k) = c > 0 ? VectorXd(out.means.col(k) / static_cast<double>(c))
                             : VectorXd(centroids.col(k));
  }
  return out;
}

double local_inertia(const MatrixXd& data, const MatrixXd& centroids, std::vector<int>& labels) {
  labels = nearest(data, centroids);
  double total = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    total += (data.col(static_cast<Eigen::Index>(n)) - centroids.col(labels[n])).squaredNorm();
  }
  return total;
}

}  // namespace

DecentralizedKMeansResult decentralized_kmeans(const std::vector<MatrixXd>& shards, int k_max,
                                               int restarts, const NetworkConfig& net,
                                               std::uint64_t seed) {
  net.validate();
  if (static_cast<int>(shards.size()) != net.sensors) {
    throw ArgumentError("decentralized_kmeans: number of shards must equal the sensor count");
  }
  if (k_max < 1 || restarts < 1) throw ArgumentError("decentralized_kmeans: k_max and restarts must be >= 1");
  long total_points = 0;
  for (const auto& s : shards) {
    if (s.cols() == 0) throw ArgumentError("decentralized_kmeans: empty shard");
    total_points += s.cols();
  }
  if (k_max > total_points) throw ArgumentError("decentralized_kmeans: k_max exceeds the data size");
  const int m = static_cast<int>(shards.front().rows());
  // Pooled view used only to draw the common initial centroids, which a
  // coordinator would broadcast once; that broadcast is not counted.
  MatrixXd pooled(m, total_points);
  {
    Eigen::Index at = 0;
    for (const auto& s : shards) {
      pooled.middleCols(at, s.cols()) = s;
      at += s.cols();
    }
  }

  const int S = net.sensors;
  DecentralizedKMeansResult result;
  result.ledger = MessageLedger(S, net.slots);

  // best[s][k-1]: lowest-inertia centroids over restarts for that K.
  std::vector<std::vector<MatrixXd>> best(static_cast<std::size_t>(S),
                                          std::vector<MatrixXd>(static_cast<std::size_t>(k_max)));
  std::vector<std::vector<double>> best_inertia(
      static_cast<std::size_t>(S),
      std::vector<double>(static_cast<std::size_t>(k_max), std::numeric_limits<double>::infinity()));

  for (int r = 0; r < restarts; ++r) {
    for (int k = 1; k <= k_max; ++k) {
      RandomEngine rng = make_engine(seed, {seed::kBaseline, static_cast<std::uint64_t>(r),
                                            static_cast<std::uint64_t>(k)});
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(total_points));
      std::iota(idx.begin(), idx.end(), 0);
      MatrixXd init(m, k);
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), idx.size() - 1);
        std::swap(idx[static_cast<std::size_t>(j)], idx[pick(rng)]);
        init.col(j) = pooled.col(idx[static_cast<std::size_t>(j)]);
      }
      std::vector<MatrixXd> centroids(static_cast<std::size_t>(S), init);

      for (int t = 2; t <= net.slots; ++t) {
        std::vector<LocalMeans> outbox;
        outbox.reserve(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) {
          outbox.push_back(local_means(shards[static_cast<std::size_t>(s)],
                                       centroids[static_cast<std::size_t>(s)]));
        }
        for (int s = 0; s < S; ++s) {
          std::vector<int> others;
          for (int o = 0; o < S; ++o) {
            if (o != s) others.push_back(o);
          }
          RandomEngine peer_rng = make_engine(
              seed, {seed::kPeers, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(s)});
          const auto& own = outbox[static_cast<std::size_t>(s)];
          MatrixXd sums = own.means;
          VectorXd weights(k);
          for (int j = 0; j < k; ++j) {
            weights(j) = static_cast<double>(own.counts[static_cast<std::size_t>(j)]);
            sums.col(j) *= weights(j);
          }
          for (int j = 0; j < net.peers; ++j) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), others.size() - 1);
            std::swap(others[static_cast<std::size_t>(j)], others[pick(peer_rng)]);
            const int sender = others[static_cast<std::size_t>(j)];
            const auto& msg = outbox[static_cast<std::size_t>(sender)];
            for (int c = 0; c < k; ++c) {
              const double v = static_cast<double>(msg.counts[static_cast<std::size_t>(c)]);
              sums.col(c) += v * msg.means.col(c);
              weights(c) += v;
            }
            result.ledger.record(t, sender, static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(m + 1));
          }
          auto& mine = centroids[static_cast<std::size_t>(s)];
          for (int c = 0; c < k; ++c) {
            if (weights(c) > 0.0) mine.col(c) = sums.col(c) / weights(c);
          }
        }
      }

      for (int s = 0; s < S; ++s) {
        std::vector<int> labels;
        const double inertia = local_inertia(shards[static_cast<std::size_t>(s)],
                                             centroids[static_cast<std::size_t>(s)], labels);
        auto& slot = best_inertia[static_cast<std::size_t>(s)][static_cast<std::size_t>(k - 1)];
        if (inertia < slot) {
          slot = inertia;
          best[static_cast<std::size_t>(s)][static_cast<std::size_t>(k - 1)] =
              centroids[static_cast<std::size_t>(s)];
        }
      }
    }
  }

  for (int s = 0; s < S; ++s) {
    const MatrixXd& data = shards[static_cast<std::size_t>(s)];
    int chosen = 1;
    double chosen_aic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
      const double aic = aic_score(data.cols(), m,
                                   best_inertia[static_cast<std::size_t>(s)][static_cast<std::size_t>(k - 1)], k);
      if (aic < chosen_aic) {
        chosen_aic = aic;
        chosen = k;
      }
    }
    ClusteringResult local;
    const MatrixXd& centroids = best[static_cast<std::size_t>(s)][static_cast<std::size_t>(chosen - 1)];
    local_inertia(data, centroids, local.assignments);
    for (Eigen::Index c = 0; c < centroids.cols(); ++c) local.centroids.push_back({centroids.col(c), 0, 0});
    for (int label : local.assignments) ++local.centroids[static_cast<std::size_t>(label)].n_hat;
    result.sensors.push_back(std::move(local));
  }
  return result;
}

}  // namespace centrex
