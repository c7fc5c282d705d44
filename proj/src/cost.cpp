#include "rem/cost.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rem {

namespace {

void require_count(std::int64_t wp) {
  if (wp < 0) throw std::domain_error("object count must be >= 0, got " + std::to_string(wp));
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw std::domain_error(std::string(what) + " must be > 0");
}

double to_double(std::int64_t wp) { return static_cast<double>(wp); }

// Capability-scaled term: `local_time` is what the delegator would take,
// `local_cap` / `worker_cap` its speed ratio against the worker.
Seconds scaled(Seconds local_time, double local_cap, double worker_cap, FormulaVariant variant) {
  require_positive(local_cap, "local capability");
  require_positive(worker_cap, "worker capability");
  if (variant == FormulaVariant::literal) {
    if (local_time == 0.0) return 0.0;
    return (1.0 / local_time) * (worker_cap / local_cap);
  }
  return local_time * (local_cap / worker_cap);
}

}  // namespace

double rw_average(double read, double write) {
  require_positive(read, "read speed");
  require_positive(write, "write speed");
  return (read + write) / 2.0;
}

Seconds pack_time(const Calibration& c, std::int64_t wp) {
  require_count(wp);
  return c.t_pk_mdl + c.t_pk_alg + c.t_pk_d * to_double(wp);
}

Seconds request_transmit_time(const WorkerView& w, const RequestSpec& r, std::int64_t wp) {
  require_count(wp);
  if (w.is_delegator_local) return 0.0;
  const Bytes payload = r.byte_mdl + r.byte_alg + r.byte_d * static_cast<Bytes>(wp);
  return w.path_from_delegator.per_byte_time * static_cast<double>(payload) +
         w.path_from_delegator.fixed_latency;
}

Seconds local_unpack_time(const Calibration& c, std::int64_t wp) {
  require_count(wp);
  return c.t_upk_mdl + c.t_upk_alg + c.t_upk_d * to_double(wp);
}

Seconds worker_unpack_time(const Calibration& c, std::int64_t wp, double rw_local, double rw_i,
                           FormulaVariant variant) {
  return scaled(local_unpack_time(c, wp), rw_local, rw_i, variant);
}

double resource_score(const NodeProfile& profile, const DynamicContext& context,
                      const ResourceWeights& weights) {
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (const auto& [kind, weight] : weights.entries) {
    if (!(weight >= 0.0)) throw std::domain_error("resource weights must be >= 0");
    double value = 0.0;
    switch (kind) {
      case ResourceKind::cpu_benchmark: value = profile.cpu_benchmark; break;
      case ResourceKind::cores_available: value = profile.cores_available; break;
      case ResourceKind::ram_free:
        value = context.ram_used >= profile.ram_total
                    ? 0.0
                    : static_cast<double>(profile.ram_total - context.ram_used) / 1e9;
        break;
      case ResourceKind::cpu_idle_fraction: value = 1.0 - context.cpu_usage; break;
    }
    weighted += value * weight;
    weight_sum += weight;
  }
  if (!(weight_sum > 0.0)) throw std::domain_error("at least one resource weight must be > 0");
  return weighted / weight_sum;
}

Seconds worker_process_time(const Calibration& c, std::int64_t wp, double score_local,
                            double score_i, FormulaVariant variant) {
  require_count(wp);
  require_positive(score_local, "local resource score");
  require_positive(score_i, "worker resource score");
  const double local = c.t_proc1 * to_double(wp);
  if (variant == FormulaVariant::literal) {
    if (wp == 0) return 0.0;
    return (to_double(wp) / local) * (score_i / score_local);
  }
  return local * (score_local / score_i);
}

Seconds output_pack_time(const Calibration& c, std::int64_t wp, double rw_local, double rw_i,
                         FormulaVariant variant) {
  require_count(wp);
  return scaled(c.t_pk_o1 * to_double(wp), rw_local, rw_i, variant);
}

Seconds output_transmit_time(const WorkerView& w, const Calibration& c, std::int64_t wp) {
  require_count(wp);
  if (w.is_receiver) return 0.0;
  const Bytes payload = c.out_bytes_per_object * static_cast<Bytes>(wp);
  return w.path_to_receiver.per_byte_time * static_cast<double>(payload) +
         w.path_to_receiver.fixed_latency;
}

Seconds receiver_unpack_time(const Calibration& c, std::int64_t wp, double rw_local,
                             double rw_receiver, FormulaVariant variant) {
  require_count(wp);
  if (std::isinf(rw_receiver) && variant == FormulaVariant::time_inverted) return 0.0;
  return scaled(c.t_upk_o1 * to_double(wp), rw_local, rw_receiver, variant);
}

CostBreakdown get_time(const WorkerView& w, const Calibration& c, const RequestSpec& r,
                       const ResourceWeights& weights, const WorkerView& delegator,
                       const WorkerView& receiver, std::int64_t wp, FormulaVariant variant) {
  require_count(wp);
  const double rw_local = rw_average(delegator.profile.disk_read, delegator.profile.disk_write);
  const double rw_receiver = rw_average(receiver.profile.disk_read, receiver.profile.disk_write);

  const Seconds pack = pack_time(c, wp);
  const Seconds send = request_transmit_time(w, r, wp);
  const Seconds out_send = output_transmit_time(w, c, wp);

  Seconds unpack, process, out_pack, out_unpack;
  if (w.is_delegator_local) {
    unpack = local_unpack_time(c, wp);
    process = c.t_proc1 * to_double(wp);
    out_pack = c.t_pk_o1 * to_double(wp);
  } else {
    const double rw_i = rw_average(w.profile.disk_read, w.profile.disk_write);
    const double score_local = resource_score(delegator.profile, delegator.context, weights);
    const double score_i = resource_score(w.profile, w.context, weights);
    unpack = worker_unpack_time(c, wp, rw_local, rw_i, variant);
    process = worker_process_time(c, wp, score_local, score_i, variant);
    out_pack = output_pack_time(c, wp, rw_local, rw_i, variant);
  }
  if (variant == FormulaVariant::literal && !w.is_delegator_local) {
    // The printed form scales by the worker's RW here.
    const double rw_i = rw_average(w.profile.disk_read, w.profile.disk_write);
    out_unpack = receiver_unpack_time(c, wp, rw_local, rw_i, variant);
  } else {
    out_unpack = receiver_unpack_time(c, wp, rw_local, rw_receiver, FormulaVariant::time_inverted);
  }
  return CostBreakdown::from_terms(pack, send, unpack, process, out_pack, out_send, out_unpack);
}

WorkerView make_worker_view(const Scenario& s, const NodeId& id) {
  const NodeProfile* profile = s.find_node(id);
  if (profile == nullptr) throw std::invalid_argument("unknown node '" + id + "'");
  const DynamicContext* context = s.find_context(id);
  if (context == nullptr) throw std::invalid_argument("node '" + id + "' has no dynamic context");

  WorkerView w;
  w.profile = *profile;
  w.context = *context;
  w.is_delegator_local = id == s.delegator;
  w.is_receiver = id == s.request.receiver;
  if (w.is_delegator_local) {
    w.path_from_delegator = LinkPath{id, id, 0.0, 0.0, {}};
  } else {
    const LinkPath* l = s.find_link(s.delegator, id);
    if (l == nullptr) throw std::invalid_argument("no link from delegator to '" + id + "'");
    w.path_from_delegator = *l;
  }
  if (w.is_receiver) {
    w.path_to_receiver = LinkPath{id, id, 0.0, 0.0, {}};
  } else {
    const LinkPath* l = s.find_link(id, s.request.receiver);
    if (l == nullptr) throw std::invalid_argument("no link from '" + id + "' to the receiver");
    w.path_to_receiver = *l;
  }
  return w;
}

CostModel::CostModel(const Scenario& s, FormulaVariant variant)
    : calibration_(s.calibration),
      request_(s.request),
      weights_(s.weights),
      variant_(variant),
      delegator_(s.delegator) {
  for (const auto& n : s.nodes) views_.emplace(n.node_id, make_worker_view(s, n.node_id));
  if (!has_node(delegator_)) throw std::invalid_argument("unknown delegator '" + delegator_ + "'");
  if (!has_node(request_.receiver))
    throw std::invalid_argument("unknown receiver '" + request_.receiver + "'");
}

const WorkerView& CostModel::view(const NodeId& id) const {
  auto it = views_.find(id);
  if (it == views_.end()) throw std::invalid_argument("unknown node '" + id + "'");
  return it->second;
}

CostBreakdown CostModel::get_time(const NodeId& id, std::int64_t wp) const {
  return rem::get_time(view(id), calibration_, request_, weights_, view(delegator_),
                       view(request_.receiver), wp, variant_);
}

}  // namespace rem
