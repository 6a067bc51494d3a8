#pragma once

#include <cstdint>
#include <vector>

#include "centrex/centralized.hpp"
#include "centrex/mathcore.hpp"
#include "centrex/types.hpp"
#include "centrex/wald.hpp"

namespace centrex {

/// Complete (any-to-any) network of `sensors` nodes. The protocol lasts
/// `slots` time slots: slot 1 is local initialization, slots 2..slots are
/// exchange rounds in which every sensor receives from `peers` others.
/// How a sensor decides that two centroid estimates coincide during the
/// exchange phase (matching received centroids and the per-slot fusion).
enum class MatchRule {
  /// Test 4 as stated: merge iff the statistic is <= lambda_{1-alpha}.
  kReversedNull,
  /// Wald test with null "same centroid": merge iff the statistic is <= lambda_alpha.
  kWald,
};

struct NetworkConfig {
  int sensors = 20;
  int slots = 10;
  int peers = 2;
  MatchRule match = MatchRule::kWald;

  int exchange_rounds() const { return slots - 1; }
  /// sensors >= 1, slots >= 1, 0 <= peers <= sensors - 1.
  void validate() const;
};

/// Local state of one sensor. Vectors are in compressed coordinates.
struct SensorState {
  int sensor_id = 0;
  /// Local measurement vectors, one per column.
  MatrixXd shard;
  std::vector<VectorXd> centroids;
  /// Weighted sums P_k = sum_n w_C(Z_n - phi_k) Z_n over the local data.
  std::vector<VectorXd> P;
  /// Weight totals Q_k = sum_n w_C(Z_n - phi_k).
  std::vector<double> Q;
  /// Number of local data classified (with the test-2 gate) to each centroid.
  std::vector<long> V;
  /// Local data rejected by test 2 against their nearest centroid.
  std::vector<int> unassigned;

  int k() const { return static_cast<int>(centroids.size()); }
};

/// What a sensor transmits in one slot: (P, Q, Phi, V).
struct SensorMessage {
  std::vector<VectorXd> centroids;
  std::vector<VectorXd> P;
  std::vector<double> Q;
  std::vector<long> V;

  static SensorMessage from(const SensorState& s) { return {s.centroids, s.P, s.Q, s.V}; }
  /// Scalars on the wire: K (m + 1 + m + 1).
  std::uint64_t scalar_count(int m) const {
    return 2ULL * centroids.size() * static_cast<std::uint64_t>(m + 1);
  }
};

struct TraceRow {
  int slot = 0;
  int sensor = 0;
  int k_found = 0;
  /// Scalars transmitted by this sensor up to and including this slot.
  std::uint64_t scalars_sent_cumulative = 0;
};

/// Exact count of transmitted scalars.
class MessageLedger {
 public:
  MessageLedger() = default;
  MessageLedger(int sensors, int slots);

  void record(int slot, int sender, std::uint64_t scalars);
  void snapshot(int slot, const std::vector<SensorState>& states);

  std::uint64_t scalars_sent() const { return total_; }
  /// Index by slot number (entry 0 and 1 are always zero).
  const std::vector<std::uint64_t>& per_slot() const { return per_slot_; }
  /// Scalars transmitted by each sensor.
  const std::vector<std::uint64_t>& per_sensor() const { return per_sensor_; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> per_slot_;
  std::vector<std::uint64_t> per_sensor_;
  std::vector<TraceRow> trace_;
};

/// Writes the trace as CSV with header `slot,sensor,k_found,scalars_sent_cumulative`.
void write_trace_csv(const MessageLedger& ledger, const std::string& path);

SensorState make_sensor(int sensor_id, MatrixXd shard);

/// Rough local clustering: single 2C fixed-point step per centroid, test-2
/// marking, fusion under `rule`, gated classification, and partial sums over
/// all local data.
void local_init(SensorState& state, const CompressionModel& model, const CentrexParams& params,
                const RSquared& r2, std::uint64_t seed, MatchRule rule = MatchRule::kWald);

/// Absorbs one received message into `state` (before re-estimation): each
/// received component is added to the partial sums of the first local
/// centroid that test 4 merges it with, or appended as a new centroid.
/// V = 0 is treated as 1 in r^2 (1/V + 1/V').
void merge_received(SensorState& state, const SensorMessage& msg, const WaldTests& tests,
                    const RSquared& r2, MatchRule rule = MatchRule::kWald);

/// Local update after the receptions of a slot: phi = P / Q, fusion,
/// gated classification (V), and partial sums against the new centroids.
/// A centroid whose Q underflowed to zero keeps its previous position.
void refresh_sensor(SensorState& state, const CompressionModel& model, const WaldTests& tests,
                    const RSquared& r2, MatchRule rule = MatchRule::kWald);

/// One synchronous exchange slot t in 2..slots. Every sensor reads its
/// peers' state as of slot t-1, then all sensors update.
void exchange_slot(std::vector<SensorState>& states, const NetworkConfig& net,
                   const CompressionModel& model, const RSquared& r2, const CentrexParams& params,
                   int t, std::uint64_t seed, MessageLedger& ledger);

struct DecentrexResult {
  /// Final clustering of each sensor's local data (ungated classification).
  std::vector<ClusteringResult> sensors;
  MessageLedger ledger;
  /// Sensor states after the last slot, before the final classification.
  std::vector<SensorState> states;
};

/// Local initialization, slots - 1 exchange rounds, final classification.
DecentrexResult decentrex_run(const std::vector<MatrixXd>& shards, const CompressionModel& model,
                              const NetworkConfig& net, const CentrexParams& params,
                              const RSquared& r2, std::uint64_t seed);

/// Lambda_1 = 2 R J S K1 (m + 1) for R receiving rounds at constant K1 centroids.
std::uint64_t predicted_messages_decentrex(std::uint64_t rounds, std::uint64_t peers,
                                           std::uint64_t sensors, std::uint64_t k1, std::uint64_t m);

/// Lambda_2 = restarts * R * J * S * K2 (K2 + 1) / 2 * (m + 1) for decentralized
/// K-means sweeping K = 1..K2 over R receiving rounds.
std::uint64_t predicted_messages_kmeans(std::uint64_t restarts, std::uint64_t rounds,
                                        std::uint64_t peers, std::uint64_t sensors,
                                        std::uint64_t k2, std::uint64_t m);

struct DecentralizedKMeansResult {
  /// Per sensor: labels of local data and the centroids of the selected K.
  std::vector<ClusteringResult> sensors;
  MessageLedger ledger;
};

/// Gossip K-means baseline. For every restart and every K in 1..k_max all
/// sensors start from the same K seeds, then each round a sensor combines its
/// local cluster means with those received from `peers` others, weighted by
/// the counts V. Each transmission carries (Phi, V): K (m + 1) scalars.
/// Each sensor keeps the restart with lowest local inertia per K and picks K
/// by the same AIC as the centralized baseline.
DecentralizedKMeansResult decentralized_kmeans(const std::vector<MatrixXd>& shards, int k_max,
                                               int restarts, const NetworkConfig& net,
                                               std::uint64_t seed);

}  // namespace centrex
