#pragma once

#include <cstdint>
#include <map>

#include "rem/model.hpp"

namespace rem {

// How the capability-scaled terms (worker unpack, worker process, output
// pack, receiver unpack) are evaluated for an external worker.
//
// time_inverted: t_worker = t_local * (local_capability / worker_capability).
// literal:       the printed rate form (1 / t_local) * (worker / local), kept
//                only for side-by-side comparison; it is not a duration.
enum class FormulaVariant { time_inverted, literal };

// Worker i bound to its link context.
struct WorkerView {
  NodeProfile profile;
  DynamicContext context;
  LinkPath path_from_delegator;
  LinkPath path_to_receiver;
  bool is_delegator_local = false;
  bool is_receiver = false;
};

double rw_average(double read, double write);

Seconds pack_time(const Calibration& c, std::int64_t wp);
Seconds request_transmit_time(const WorkerView& w, const RequestSpec& r, std::int64_t wp);
Seconds local_unpack_time(const Calibration& c, std::int64_t wp);
Seconds worker_unpack_time(const Calibration& c, std::int64_t wp, double rw_local, double rw_i,
                           FormulaVariant variant = FormulaVariant::time_inverted);

// Weighted mean of the node's resource values. Free RAM is counted in
// gigabytes (10^9 bytes) and idle CPU as a fraction, so every value grows
// with capability.
double resource_score(const NodeProfile& profile, const DynamicContext& context,
                      const ResourceWeights& weights);

Seconds worker_process_time(const Calibration& c, std::int64_t wp, double score_local,
                            double score_i, FormulaVariant variant = FormulaVariant::time_inverted);
Seconds output_pack_time(const Calibration& c, std::int64_t wp, double rw_local, double rw_i,
                         FormulaVariant variant = FormulaVariant::time_inverted);
Seconds output_transmit_time(const WorkerView& w, const Calibration& c, std::int64_t wp);
Seconds receiver_unpack_time(const Calibration& c, std::int64_t wp, double rw_local,
                             double rw_receiver,
                             FormulaVariant variant = FormulaVariant::time_inverted);

// Full per-worker estimate. For the delegator-local worker the transmit
// terms are zero and the local calibration is used unscaled.
CostBreakdown get_time(const WorkerView& w, const Calibration& c, const RequestSpec& r,
                       const ResourceWeights& weights, const WorkerView& delegator,
                       const WorkerView& receiver, std::int64_t wp,
                       FormulaVariant variant = FormulaVariant::time_inverted);

// Throws std::invalid_argument if the node, its context, or a required link
// is missing.
WorkerView make_worker_view(const Scenario& s, const NodeId& id);

// Scenario-bound evaluator; owns copies of everything it needs.
class CostModel {
 public:
  explicit CostModel(const Scenario& s, FormulaVariant variant = FormulaVariant::time_inverted);

  CostBreakdown get_time(const NodeId& id, std::int64_t wp) const;
  const WorkerView& view(const NodeId& id) const;
  bool has_node(const NodeId& id) const { return views_.count(id) != 0; }
  FormulaVariant variant() const { return variant_; }

 private:
  Calibration calibration_;
  RequestSpec request_;
  ResourceWeights weights_;
  FormulaVariant variant_;
  NodeId delegator_;
  std::map<NodeId, WorkerView> views_;
};

}  // namespace rem
